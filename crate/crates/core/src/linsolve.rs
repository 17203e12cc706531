//! Full (non-restarted) GMRES.

use crate::linalg::norm2;
use crate::C64;

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solution: Vec<C64>,
    /// Krylov dimension when the iteration stopped.
    pub iterations: usize,
    /// Relative residual estimates `‖b − A x_j‖/‖b‖`, starting with `j = 0`.
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&0.0)
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

/// GMRES from a zero initial guess, stopping when the relative residual
/// drops to `tol` or after `max_iter` Krylov steps. Non-convergence is
/// reported through `converged`.
pub fn gmres<F>(matvec: F, rhs: &[C64], tol: f64, max_iter: usize) -> SolveReport
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let n = rhs.len();
    let bnorm = norm2(rhs);
    if bnorm == 0.0 {
        return SolveReport {
            solution: vec![C64::new(0.0, 0.0); n],
            iterations: 0,
            residual_history: vec![0.0],
            converged: true,
        };
    }
    let max_iter = max_iter.min(n).max(1);
    let mut basis: Vec<Vec<C64>> = vec![rhs.iter().map(|v| v / bnorm).collect()];
    // Columns of the (rotated) Hessenberg matrix.
    let mut hcols: Vec<Vec<C64>> = Vec::new();
    let mut rot: Vec<(f64, C64)> = Vec::new();
    let mut g = vec![C64::new(bnorm, 0.0)];
    let mut history = vec![1.0];
    let mut converged = false;

    for j in 0..max_iter {
        let mut w = matvec(&basis[j]);
        let mut h = vec![C64::new(0.0, 0.0); j + 2];
        for _pass in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = dot(v, &w);
                h[i] += c;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= c * vk;
                }
            }
        }
        let wn = norm2(&w);
        h[j + 1] = C64::new(wn, 0.0);
        for (i, &(c, s)) in rot.iter().enumerate() {
            let (a, b) = (h[i], h[i + 1]);
            h[i] = c * a + s * b;
            h[i + 1] = -s.conj() * a + c * b;
        }
        let (a, b) = (h[j], h[j + 1]);
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if a.norm() == 0.0 {
            (0.0, C64::new(1.0, 0.0))
        } else {
            let phase = a / a.norm();
            (a.norm() / r, phase * b.conj() / r)
        };
        h[j] = c * a + s * b;
        h[j + 1] = C64::new(0.0, 0.0);
        rot.push((c, s));
        let gj = g[j];
        g[j] = c * gj;
        g.push(-s.conj() * gj);
        hcols.push(h);

        let rel = g[j + 1].norm() / bnorm;
        history.push(rel);
        if rel <= tol {
            converged = true;
        }
        if converged || wn == 0.0 || j + 1 == max_iter {
            if wn == 0.0 {
                converged = converged || rel <= tol;
            }
            break;
        }
        basis.push(w.iter().map(|v| v / wn).collect());
    }

    let m = hcols.len();
    let mut y = vec![C64::new(0.0, 0.0); m];
    for i in (0..m).rev() {
        let mut s = g[i];
        for k in i + 1..m {
            s -= hcols[k][i] * y[k];
        }
        y[i] = s / hcols[i][i];
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for (yk, v) in y.iter().zip(&basis) {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi += yk * vi;
        }
    }
    SolveReport { solution: x, iterations: m, residual_history: history, converged }
}
