//! Builtin gate vocabulary and unitary matrices.
//!
//! Matrices act on the gate's operands in listed order, with the first operand
//! as the least-significant bit of the row/column index.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    Rx,
    Ry,
    Rz,
    U1,
    U2,
    U3,
    Cx,
    Cz,
    Swap,
    Ccx,
}

pub const ALL_BUILTINS: [Builtin; 18] = [
    Builtin::X,
    Builtin::Y,
    Builtin::Z,
    Builtin::H,
    Builtin::S,
    Builtin::Sdg,
    Builtin::T,
    Builtin::Tdg,
    Builtin::Rx,
    Builtin::Ry,
    Builtin::Rz,
    Builtin::U1,
    Builtin::U2,
    Builtin::U3,
    Builtin::Cx,
    Builtin::Cz,
    Builtin::Swap,
    Builtin::Ccx,
];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn expi(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

impl Builtin {
    pub fn from_name(name: &str) -> Option<Self> {
        ALL_BUILTINS.iter().copied().find(|b| b.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::X => "x",
            Builtin::Y => "y",
            Builtin::Z => "z",
            Builtin::H => "h",
            Builtin::S => "s",
            Builtin::Sdg => "sdg",
            Builtin::T => "t",
            Builtin::Tdg => "tdg",
            Builtin::Rx => "rx",
            Builtin::Ry => "ry",
            Builtin::Rz => "rz",
            Builtin::U1 => "u1",
            Builtin::U2 => "u2",
            Builtin::U3 => "u3",
            Builtin::Cx => "cx",
            Builtin::Cz => "cz",
            Builtin::Swap => "swap",
            Builtin::Ccx => "ccx",
        }
    }

    pub fn num_params(self) -> usize {
        match self {
            Builtin::Rx | Builtin::Ry | Builtin::Rz | Builtin::U1 => 1,
            Builtin::U2 => 2,
            Builtin::U3 => 3,
            _ => 0,
        }
    }

    pub fn num_qubits(self) -> usize {
        match self {
            Builtin::Cx | Builtin::Cz | Builtin::Swap => 2,
            Builtin::Ccx => 3,
            _ => 1,
        }
    }

    /// Unitary for the given (already evaluated) parameters.
    pub fn matrix(self, params: &[f64]) -> DMatrix<Complex64> {
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = |i: usize| params.get(i).copied().unwrap_or(0.0);
        let m2 = |a, b, cc, d| DMatrix::from_row_slice(2, 2, &[a, b, cc, d]);
        match self {
            Builtin::X => m2(zero, one, one, zero),
            Builtin::Y => m2(zero, c(0.0, -1.0), c(0.0, 1.0), zero),
            Builtin::Z => m2(one, zero, zero, -one),
            Builtin::H => m2(c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)),
            Builtin::S => m2(one, zero, zero, c(0.0, 1.0)),
            Builtin::Sdg => m2(one, zero, zero, c(0.0, -1.0)),
            Builtin::T => m2(one, zero, zero, expi(std::f64::consts::FRAC_PI_4)),
            Builtin::Tdg => m2(one, zero, zero, expi(-std::f64::consts::FRAC_PI_4)),
            Builtin::Rx => {
                let (co, si) = ((p(0) / 2.0).cos(), (p(0) / 2.0).sin());
                m2(c(co, 0.0), c(0.0, -si), c(0.0, -si), c(co, 0.0))
            }
            Builtin::Ry => {
                let (co, si) = ((p(0) / 2.0).cos(), (p(0) / 2.0).sin());
                m2(c(co, 0.0), c(-si, 0.0), c(si, 0.0), c(co, 0.0))
            }
            Builtin::Rz => m2(expi(-p(0) / 2.0), zero, zero, expi(p(0) / 2.0)),
            Builtin::U1 => m2(one, zero, zero, expi(p(0))),
            Builtin::U2 => u3(std::f64::consts::FRAC_PI_2, p(0), p(1)),
            Builtin::U3 => u3(p(0), p(1), p(2)),
            Builtin::Cx => permutation(4, |i| if i & 1 == 1 { i ^ 2 } else { i }),
            Builtin::Cz => {
                let mut m = DMatrix::identity(4, 4);
                m[(3, 3)] = -one;
                m
            }
            Builtin::Swap => permutation(4, |i| ((i & 1) << 1) | ((i >> 1) & 1)),
            Builtin::Ccx => permutation(8, |i| if i & 3 == 3 { i ^ 4 } else { i }),
        }
    }
}

fn u3(theta: f64, phi: f64, lambda: f64) -> DMatrix<Complex64> {
    let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    DMatrix::from_row_slice(
        2,
        2,
        &[c(co, 0.0), -expi(lambda) * si, expi(phi) * si, expi(phi + lambda) * co],
    )
}

fn permutation(dim: usize, f: impl Fn(usize) -> usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        m[(f(col), col)] = c(1.0, 0.0);
    }
    m
}

/// Largest entry of `U†U − I` in modulus.
pub fn unitarity_error(m: &DMatrix<Complex64>) -> f64 {
    let prod = m.adjoint() * m;
    let n = prod.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for col in 0..n {
            let target = if r == col { 1.0 } else { 0.0 };
            worst = worst.max((prod[(r, col)] - c(target, 0.0)).norm());
        }
    }
    worst
}
