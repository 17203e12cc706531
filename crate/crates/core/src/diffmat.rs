//! Periodic differentiation matrices on uniform and graded grids.
//!
//! The spectral matrices are the closed-form trigonometric-interpolation
//! derivatives (equivalent to FFT differentiation of the nodal sequence).
//! On a graded mesh the nodal values are `ψ(s) = φ(w(s))`, and the
//! derivatives are taken through
//!
//! ```text
//! ψ'  = ((w'ψ)' − w''ψ) / w'
//! ψ'' = ((w'ψ)'' − 2w''ψ' − w'''ψ) / w'
//! ```
//!
//! before converting to `φ'(t)`, `φ''(t)` by the chain rule.

use crate::geometry::GradedMesh;
use crate::linalg::RMatrix;
use crate::{Error, Result};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffOrder {
    /// Centered fourth-order finite differences.
    Fd4,
    /// Trigonometric interpolation.
    Spectral,
}

impl fmt::Display for DiffOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiffOrder::Fd4 => "fd4",
            DiffOrder::Spectral => "spectral",
        })
    }
}

impl FromStr for DiffOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fd4" | "fd" => Ok(DiffOrder::Fd4),
            "spectral" | "fft" => Ok(DiffOrder::Spectral),
            _ => Err(Error::InvalidInput(format!("unknown differentiation '{s}' (expected fd4 or spectral)"))),
        }
    }
}

/// First and second parametric derivative matrices `D1`, `D2`: nodal values
/// of `φ∘x∘w` to `φ'(t)`, `φ''(t)` at the nodes.
#[derive(Clone, Debug)]
pub struct DiffMatrices {
    pub d1: RMatrix,
    pub d2: RMatrix,
}

/// Uniform-grid matrices on `size` equispaced points with spacing
/// `2π/size` (any common shift of the grid gives the same matrices).
pub fn uniform(order: DiffOrder, size: usize) -> DiffMatrices {
    let h = 2.0 * PI / size as f64;
    match order {
        DiffOrder::Spectral => {
            assert!(size % 2 == 0, "spectral differentiation needs an even node count");
            let d1 = RMatrix::from_fn(size, |i, j| {
                if i == j {
                    0.0
                } else {
                    let l = i as isize - j as isize;
                    let sign = if l.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    0.5 * sign / (0.5 * l as f64 * h).tan()
                }
            });
            let d2 = RMatrix::from_fn(size, |i, j| {
                if i == j {
                    -PI * PI / (3.0 * h * h) - 1.0 / 6.0
                } else {
                    let l = i as isize - j as isize;
                    let sign = if l.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    -sign / (2.0 * (0.5 * l as f64 * h).sin().powi(2))
                }
            });
            DiffMatrices { d1, d2 }
        }
        DiffOrder::Fd4 => {
            assert!(size >= 5, "fourth-order differences need at least 5 nodes");
            let mut d1 = RMatrix::zeros(size);
            let mut d2 = RMatrix::zeros(size);
            let c1 = [(1isize, 8.0), (2, -1.0), (-1, -8.0), (-2, 1.0)];
            let c2 = [(0isize, -30.0), (1, 16.0), (-1, 16.0), (2, -1.0), (-2, -1.0)];
            for i in 0..size {
                for (off, c) in c1 {
                    let j = (i as isize + off).rem_euclid(size as isize) as usize;
                    d1.data[i * size + j] += c / (12.0 * h);
                }
                for (off, c) in c2 {
                    let j = (i as isize + off).rem_euclid(size as isize) as usize;
                    d2.data[i * size + j] += c / (12.0 * h * h);
                }
            }
            DiffMatrices { d1, d2 }
        }
    }
}

/// Matrices for nodes `s_j` of a discretization with `size` nodes under the
/// change of variable `mesh`.
pub fn diff_matrices(order: DiffOrder, size: usize, mesh: &GradedMesh, params: &[f64]) -> DiffMatrices {
    let base = uniform(order, size);
    if mesh.is_identity() {
        return base;
    }
    let pts: Vec<_> = params.iter().map(|&s| mesh.eval(s)).collect();
    let w1: Vec<f64> = pts.iter().map(|m| m.w1).collect();
    let w2: Vec<f64> = pts.iter().map(|m| m.w2).collect();
    let w3: Vec<f64> = pts.iter().map(|m| m.w3).collect();
    let n = size;
    // ψ' and ψ'' operators in the integration variable.
    let (psi1, psi2) = match order {
        DiffOrder::Spectral => {
            let psi1 = RMatrix::from_fn(n, |i, j| {
                let mut v = base.d1.get(i, j) * w1[j];
                if i == j {
                    v -= w2[i];
                }
                v / w1[i]
            });
            let psi2 = RMatrix::from_fn(n, |i, j| {
                let mut v = base.d2.get(i, j) * w1[j] - 2.0 * w2[i] * psi1.get(i, j);
                if i == j {
                    v -= w3[i];
                }
                v / w1[i]
            });
            (psi1, psi2)
        }
        DiffOrder::Fd4 => (base.d1, base.d2),
    };
    let d1 = RMatrix::from_fn(n, |i, j| psi1.get(i, j) / w1[i]);
    let d2 = RMatrix::from_fn(n, |i, j| (psi2.get(i, j) - w2[i] * d1.get(i, j)) / (w1[i] * w1[i]));
    DiffMatrices { d1, d2 }
}
