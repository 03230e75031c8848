use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A reference to one qubit (`q[3]`) or a whole register (`q`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitRef {
    pub register: String,
    pub index: Option<usize>,
}

impl QubitRef {
    pub fn whole(register: impl Into<String>) -> Self {
        Self {
            register: register.into(),
            index: None,
        }
    }

    pub fn indexed(register: impl Into<String>, index: usize) -> Self {
        Self {
            register: register.into(),
            index: Some(index),
        }
    }
}

impl fmt::Display for QubitRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{}[{}]", self.register, i),
            None => f.write_str(&self.register),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 3,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sqrt => x.sqrt(),
        }
    }
}

/// Gate-angle expression. Parameter names only occur inside gate bodies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Number(f64),
    Pi,
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Evaluates the expression, looking parameter names up in `bindings`.
    pub fn eval(&self, bindings: &[(String, f64)]) -> Option<f64> {
        Some(match self {
            Expr::Number(v) => *v,
            Expr::Pi => std::f64::consts::PI,
            Expr::Param(name) => bindings.iter().find(|(n, _)| n == name)?.1,
            Expr::Neg(e) => -e.eval(bindings)?,
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(bindings)?, b.eval(bindings)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(func, e) => func.apply(e.eval(bindings)?),
        })
    }

    pub fn params(&self, out: &mut Vec<String>) {
        match self {
            Expr::Param(name) => out.push(name.clone()),
            Expr::Neg(e) | Expr::Call(_, e) => e.params(out),
            Expr::Binary(_, a, b) => {
                a.params(out);
                b.params(out);
            }
            Expr::Number(_) | Expr::Pi => {}
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        match self {
            Expr::Number(v) => write!(f, "{v}"),
            Expr::Pi => f.write_str("pi"),
            Expr::Param(name) => f.write_str(name),
            Expr::Neg(e) => {
                if parent >= 3 {
                    f.write_str("(-")?;
                    e.fmt_prec(f, 4)?;
                    f.write_str(")")
                } else {
                    f.write_str("-")?;
                    e.fmt_prec(f, 4)
                }
            }
            Expr::Call(func, e) => {
                write!(f, "{}(", func.name())?;
                e.fmt_prec(f, 0)?;
                f.write_str(")")
            }
            Expr::Binary(op, a, b) => {
                let prec = op.precedence();
                let wrap = prec < parent;
                if wrap {
                    f.write_str("(")?;
                }
                // Left-associative except `^`; the side that would re-associate gets parens.
                let (left, right) = if *op == BinOp::Pow {
                    (prec + 1, prec)
                } else {
                    (prec, prec + 1)
                };
                a.fmt_prec(f, left)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_prec(f, right)?;
                if wrap {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssertionKind {
    Superposition,
    Entanglement,
    Equality,
}

impl AssertionKind {
    pub fn keyword(self) -> &'static str {
        match self {
            AssertionKind::Superposition => "assert-sup",
            AssertionKind::Entanglement => "assert-ent",
            AssertionKind::Equality => "assert-eq",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionStmt {
    pub kind: AssertionKind,
    pub targets: Vec<QubitRef>,
    /// Present for equality assertions only. The first resolved target is the
    /// least-significant bit of the amplitude index.
    pub amplitudes: Option<Vec<Complex64>>,
}

/// A statement inside a `gate` body. Operands are the gate's formal arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BodyStmt {
    Apply {
        gate: String,
        params: Vec<Expr>,
        args: Vec<String>,
    },
    Barrier(Vec<String>),
    Reset(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateDef {
    pub name: String,
    pub params: Vec<String>,
    pub args: Vec<String>,
    pub body: Vec<BodyStmt>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Statement {
    Version(String),
    Include(String),
    QReg {
        name: String,
        size: usize,
    },
    CReg {
        name: String,
        size: usize,
    },
    GateDef(GateDef),
    Apply {
        gate: String,
        params: Vec<Expr>,
        operands: Vec<QubitRef>,
    },
    Measure {
        qubit: QubitRef,
        bit: QubitRef,
    },
    Reset(QubitRef),
    Barrier(Vec<QubitRef>),
    Assertion(AssertionStmt),
}

impl Statement {
    /// Declarations are the statements the printer keeps at the top of a program.
    pub fn is_declaration(&self) -> bool {
        matches!(
            self,
            Statement::Version(_)
                | Statement::Include(_)
                | Statement::QReg { .. }
                | Statement::CReg { .. }
                | Statement::GateDef(_)
        )
    }
}

/// Trailing comment attached to a printed statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Annotation {
    MovedFrom(usize),
    AddedBy(String),
}

impl fmt::Display for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Annotation::MovedFrom(line) => write!(f, "// moved from line {line}"),
            Annotation::AddedBy(method) => write!(f, "// added by {method}"),
        }
    }
}

/// A parsed program. `line_map[i]` is the 1-based source line of `statements[i]`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SourceProgram {
    pub statements: Vec<Statement>,
    pub line_map: Vec<usize>,
    #[serde(default)]
    pub annotations: Vec<Option<Annotation>>,
}

impl SourceProgram {
    pub fn annotation(&self, index: usize) -> Option<&Annotation> {
        self.annotations.get(index).and_then(Option::as_ref)
    }

    /// Structural equality: same statements, ignoring line numbers and annotations.
    pub fn same_structure(&self, other: &SourceProgram) -> bool {
        self.statements == other.statements
    }

    pub fn registers(&self) -> impl Iterator<Item = (&str, usize)> {
        self.statements.iter().filter_map(|s| match s {
            Statement::QReg { name, size } => Some((name.as_str(), *size)),
            _ => None,
        })
    }
}
