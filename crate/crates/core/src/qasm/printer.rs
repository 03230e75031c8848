use std::fmt::Write;

use num_complex::Complex64;

use super::ast::*;

/// Renders a program, one statement per line. With `annotations` set, statements
/// carrying an [`Annotation`] get it as a trailing comment.
pub fn print(program: &SourceProgram, annotations: bool) -> String {
    let mut out = String::new();
    for (i, stmt) in program.statements.iter().enumerate() {
        out.push_str(&statement_text(stmt));
        if annotations {
            if let Some(note) = program.annotation(i) {
                let _ = write!(out, " {note}");
            }
        }
        out.push('\n');
    }
    out
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

pub fn statement_text(stmt: &Statement) -> String {
    match stmt {
        Statement::Version(v) => format!("OPENQASM {v};"),
        Statement::Include(f) => format!("include \"{f}\";"),
        Statement::QReg { name, size } => format!("qreg {name}[{size}];"),
        Statement::CReg { name, size } => format!("creg {name}[{size}];"),
        Statement::GateDef(def) => {
            let mut s = format!("gate {}", def.name);
            if !def.params.is_empty() {
                let _ = write!(s, "({})", def.params.join(", "));
            }
            let _ = write!(s, " {} {{", def.args.join(", "));
            for b in &def.body {
                s.push(' ');
                s.push_str(&body_text(b));
            }
            s.push_str(" }");
            s
        }
        Statement::Apply { gate, params, operands } => format!("{}{} {};", gate, param_text(params), join(operands)),
        Statement::Measure { qubit, bit } => format!("measure {qubit} -> {bit};"),
        Statement::Reset(q) => format!("reset {q};"),
        Statement::Barrier(qs) => format!("barrier {};", join(qs)),
        Statement::Assertion(a) => assertion_text(a),
    }
}

fn param_text(params: &[Expr]) -> String {
    if params.is_empty() {
        String::new()
    } else {
        format!("({})", join(params))
    }
}

fn body_text(b: &BodyStmt) -> String {
    match b {
        BodyStmt::Apply { gate, params, args } => {
            format!("{}{} {};", gate, param_text(params), args.join(", "))
        }
        BodyStmt::Barrier(args) => format!("barrier {};", args.join(", ")),
        BodyStmt::Reset(a) => format!("reset {a};"),
    }
}

/// Equality assertions are printed without a trailing `;`, the way they are
/// usually written; the parser accepts both.
pub fn assertion_text(a: &AssertionStmt) -> String {
    let head = format!("{} {}", a.kind.keyword(), join(&a.targets));
    match &a.amplitudes {
        Some(amps) => {
            let body = amps.iter().map(|z| complex_text(*z)).collect::<Vec<_>>().join(", ");
            format!("{head} {{ {body} }}")
        }
        None => format!("{head};"),
    }
}

/// Shortest text that parses back to the same complex value.
pub fn complex_text(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", if z.re == 0.0 { 0.0 } else { z.re })
    } else if z.re == 0.0 {
        format!("{}i", z.im)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}
