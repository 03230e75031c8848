use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("undeclared register `{0}`")]
    UndeclaredRegister(String),
    #[error("register `{0}` declared twice")]
    DuplicateRegister(String),
    #[error("index {index} out of range for register `{register}` of size {size}")]
    IndexOutOfRange {
        register: String,
        index: usize,
        size: usize,
    },
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate `{gate}` expects {expected} qubit operand(s), found {found}")]
    GateArity {
        gate: String,
        expected: usize,
        found: usize,
    },
    #[error("gate `{gate}` expects {expected} parameter(s), found {found}")]
    ParamCount {
        gate: String,
        expected: usize,
        found: usize,
    },
    #[error("qubit `{0}` used more than once in one operand list")]
    DuplicateQubit(String),
    #[error("register operands of mismatched sizes")]
    RegisterSizeMismatch,
    #[error("equality assertion over {qubits} qubit(s) needs {expected} amplitudes, found {found}")]
    AmplitudeCount {
        qubits: usize,
        expected: usize,
        found: usize,
    },
    #[error("amplitude vector has squared norm {0}, expected 1 within 1e-6")]
    AmplitudeNorm(f64),
    #[error("amplitude blocks accept numeric literals only: {0}")]
    AmplitudeLiteral(String),
    #[error("entanglement assertions need at least 2 target qubits, found {0}")]
    EntanglementArity(usize),
    #[error("unknown parameter `{0}` in gate expression")]
    UnknownParam(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
}

/// A parse failure with its 1-based source position.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn new(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        Self { line, column, kind }
    }
}
