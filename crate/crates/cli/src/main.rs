use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qrefine_core::harness::{self, family_instances, run_eval, Instance, DEFAULT_REPETITIONS};
use qrefine_core::{
    families, load, refine_with, report_json, AssertionKind, Config, EntanglementCriterion, Error, Family, Mode,
};

macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = write!(std::io::stdout().lock(), $($arg)*);
    }};
}

macro_rules! outln {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

/// Refine, check and evaluate assertions in extended OpenQASM 2 programs.
#[derive(Parser)]
#[command(name = "qrefine", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration file; command-line flags override it.
    #[arg(long, env = "QREFINE_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    equality_epsilon: Option<f64>,
    #[arg(long)]
    separability_threshold: Option<f64>,
    #[arg(long)]
    diagonal_threshold: Option<f64>,
    #[arg(long, value_enum)]
    entanglement_criterion: Option<Criterion>,
    #[arg(long)]
    qubit_cap: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Criterion {
    Correlation,
    Ppt,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Kind {
    Ent,
    Eq,
}

impl Kind {
    fn assertion(self) -> AssertionKind {
        match self {
            Kind::Ent => AssertionKind::Entanglement,
            Kind::Eq => AssertionKind::Equality,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMode {
    Moving,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Add and move assertions; writes the refined program and a JSON report.
    Refine {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Report path (default: `<output>.json` when `-o` is given).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Mark moved and added assertions with trailing comments.
        #[arg(long)]
        annotations: bool,
        /// Remove equality assertions that split completely into single-qubit ones.
        #[arg(long)]
        drop_subsumed: bool,
        #[arg(long, value_enum, default_value = "full")]
        mode: CliMode,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate and print one verdict per assertion; exits 1 on any failure.
    Check {
        input: PathBuf,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        common: Common,
    },
    /// List the state-changing single-instruction mutants of a program.
    Mutate {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
        repetitions: usize,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Generate, mutate, refine and score; prints the aggregate table.
    Eval {
        /// Correct programs to evaluate in addition to generated families.
        inputs: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        family: Vec<Family>,
        /// `4..8`, `4..=8`, `5` or `4,6,8`.
        #[arg(long, default_value = "4..8")]
        sizes: String,
        #[arg(long, value_enum, value_delimiter = ',', default_values = ["ent", "eq"])]
        kind: Vec<Kind>,
        #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
        repetitions: usize,
        /// Per-mutant CSV output.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Aggregate JSON output.
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Emit a benchmark program.
    Generate {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        qubits: usize,
        #[arg(long, value_enum, default_value = "ent")]
        kind: Kind,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Input(String),
    Analysis(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => Failure::Input(e.to_string()),
            _ => Failure::Analysis(e.to_string()),
        }
    }
}

type Outcome = Result<ExitCode, Failure>;

fn config(c: &Common) -> Result<Config, Failure> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Analysis(format!("cannot read config {}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| Failure::Analysis(format!("config {}: {e}", path.display())))?
        }
        None => Config::default(),
    };
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = c.equality_epsilon {
        cfg.equality_epsilon = v;
    }
    if let Some(v) = c.separability_threshold {
        cfg.separability_threshold = v;
    }
    if let Some(v) = c.diagonal_threshold {
        cfg.diagonal_threshold = v;
    }
    if let Some(v) = c.qubit_cap {
        cfg.qubit_cap = v;
    }
    if let Some(v) = c.entanglement_criterion {
        cfg.entanglement_criterion = match v {
            Criterion::Correlation => EntanglementCriterion::Correlation,
            Criterion::Ppt => EntanglementCriterion::Ppt,
        };
    }
    cfg.validate().map_err(|e| Failure::Analysis(e.to_string()))?;
    Ok(cfg)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Analysis(format!("cannot write {}: {e}", path.display())))
}

fn parse_sizes(s: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Analysis(format!("invalid size list `{s}`"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(bad());
        }
        Ok((a..=b).collect())
    } else {
        s.split(',').map(num).collect()
    }
}

fn refine_cmd(
    input: &Path,
    output: Option<&Path>,
    report: Option<&Path>,
    annotations: bool,
    drop_subsumed: bool,
    mode: CliMode,
    common: &Common,
) -> Outcome {
    let mut cfg = config(common)?;
    cfg.annotations |= annotations;
    cfg.drop_subsumed |= drop_subsumed;
    let p = load(&read(input)?, &cfg)?;
    let mode = match mode {
        CliMode::Moving => Mode::Moving,
        CliMode::Full => Mode::AddingMoving,
    };
    let r = refine_with(&p, &cfg, mode);
    let text = qrefine_core::print(&r.program.to_source(), cfg.annotations);
    let json = serde_json::to_string_pretty(&report_json(&r, &input.display().to_string())).unwrap();
    match output {
        Some(out) => {
            write(out, &text)?;
            let default_report = out.with_extension("json");
            write(report.unwrap_or(&default_report), &json)?;
        }
        None => {
            out!("{text}");
            if let Some(rep) = report {
                write(rep, &json)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn check_cmd(input: &Path, json: bool, common: &Common) -> Outcome {
    let cfg = config(common)?;
    let p = load(&read(input)?, &cfg)?;
    let run = qrefine_core::simulate(&p, &cfg).map_err(Error::from)?;
    if json {
        outln!("{}", serde_json::to_string_pretty(&run.verdicts).unwrap());
    } else {
        for v in &run.verdicts {
            let d = &v.diagnostics;
            let detail = [
                d.support.map(|s| format!("support={s}")),
                d.correlation.map(|c| format!("correlation={c:.6}")),
                d.negativity.map(|n| format!("negativity={n:.6}")),
                d.fidelity.map(|f| format!("fidelity={f:.6}")),
            ]
            .into_iter()
            .flatten()
            .collect::<Vec<_>>()
            .join(" ");
            let status = if v.passed() { "PASS" } else { "FAIL" };
            outln!(
                "line {:>4}  {status}  {}  {detail}",
                v.line,
                p.describe(v.assertion_index)
            );
        }
    }
    Ok(if run.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn mutate_cmd(input: &Path, repetitions: usize, json: bool, common: &Common) -> Outcome {
    let cfg = config(common)?;
    let p = load(&read(input)?, &cfg)?;
    let mutants = harness::generate_mutants(&p, repetitions, &cfg)?;
    if json {
        outln!("{}", serde_json::to_string_pretty(&mutants).unwrap());
    } else {
        for m in &mutants {
            outln!("{:>3}  line {:>4}  {}", m.id, m.line, m.description);
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn eval_cmd(
    inputs: &[PathBuf],
    family: &[Family],
    sizes: &str,
    kind: &[Kind],
    repetitions: usize,
    csv: Option<&Path>,
    json: Option<&Path>,
    common: &Common,
) -> Outcome {
    let cfg = config(common)?;
    let families: Vec<Family> = if family.is_empty() && inputs.is_empty() {
        families::ALL_FAMILIES.to_vec()
    } else {
        family.to_vec()
    };
    let kinds: Vec<AssertionKind> = kind.iter().map(|k| k.assertion()).collect();
    let mut instances = family_instances(&families, &parse_sizes(sizes)?, &kinds, &cfg)?;
    for path in inputs {
        let name = path
            .file_stem()
            .map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned());
        instances.push(Instance {
            group: name.clone(),
            name,
            program: load(&read(path)?, &cfg)?,
        });
    }
    let result = run_eval(&instances, repetitions, &cfg)?;
    if let Some(path) = csv {
        write(path, &result.to_csv())?;
    }
    if let Some(path) = json {
        write(path, &serde_json::to_string_pretty(&result.aggregates_json()).unwrap())?;
    }
    out!("{}", result.to_markdown());
    Ok(ExitCode::SUCCESS)
}

fn generate_cmd(family: Family, qubits: usize, kind: Kind, output: Option<&Path>, common: &Common) -> Outcome {
    config(common)?;
    let text = families::generate_text(family, qubits, kind.assertion())?;
    match output {
        Some(out) => write(out, &text)?,
        None => out!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Refine {
            input,
            output,
            report,
            annotations,
            drop_subsumed,
            mode,
            common,
        } => refine_cmd(
            input,
            output.as_deref(),
            report.as_deref(),
            *annotations,
            *drop_subsumed,
            *mode,
            common,
        ),
        Command::Check { input, json, common } => check_cmd(input, *json, common),
        Command::Mutate {
            input,
            repetitions,
            json,
            common,
        } => mutate_cmd(input, *repetitions, *json, common),
        Command::Eval {
            inputs,
            family,
            sizes,
            kind,
            repetitions,
            csv,
            json,
            common,
        } => eval_cmd(
            inputs,
            family,
            sizes,
            kind,
            *repetitions,
            csv.as_deref(),
            json.as_deref(),
            common,
        ),
        Command::Generate {
            family,
            qubits,
            kind,
            output,
            common,
        } => generate_cmd(*family, *qubits, *kind, output.as_deref(), common),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Analysis(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
