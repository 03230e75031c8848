//! Extended OpenQASM 2 frontend: lexing, parsing, and printing of programs that
//! carry `assert-eq`, `assert-sup`, and `assert-ent` statements.
//!
//! ```text
//! assertion  := "assert-eq" targets "{" complex ("," complex)* "}" [";"]
//!             | "assert-sup" targets ";"
//!             | "assert-ent" targets ";"
//! targets    := target ("," target)*
//! target     := id | id "[" int "]"
//! complex    := ["+"|"-"] real [("+"|"-") real "i"] | ["+"|"-"] real "i"
//! ```
//!
//! Amplitude ordering: the first resolved target qubit is the least-significant
//! bit of the amplitude index, so `assert-eq a, b { x0, x1, x2, x3 }` assigns
//! `x1` to the state with `a = 1, b = 0`.

mod ast;
mod error;
mod lexer;
mod parser;
mod printer;

pub use ast::*;
pub use error::{ParseError, ParseErrorKind};
pub use parser::{parse, AMPLITUDE_NORM_TOLERANCE};
pub use printer::{assertion_text, complex_text, print, statement_text};
