//! Small dense matrix types and a partial-pivoting LU solver.

use crate::{Error, Result, C64};

/// Row-major real square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl RMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn apply_complex(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n).map(|i| self.row(i).iter().zip(x).map(|(a, b)| b * a).sum()).collect()
    }
}

/// Row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a * b))
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Solve `A x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        if self.rows != self.cols || b.len() != self.rows {
            return Err(Error::InvalidInput("dimension mismatch in dense solve".into()));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&p, &q| a[p * n + col].norm().total_cmp(&a[q * n + col].norm()))
                .unwrap();
            if a[piv * n + col].norm() == 0.0 {
                return Err(Error::InvalidInput("singular matrix".into()));
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                x.swap(col, piv);
            }
            let inv = 1.0 / a[col * n + col];
            let (upper, lower) = a.split_at_mut((col + 1) * n);
            let pivot_row = &upper[col * n..];
            for r in 0..n - col - 1 {
                let row = &mut lower[r * n..(r + 1) * n];
                let f = row[col] * inv;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                row[col] = f;
                for j in col + 1..n {
                    row[j] -= f * pivot_row[j];
                }
                let xc = x[col];
                x[col + 1 + r] -= f * xc;
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= a[i * n + j] * x[j];
            }
            x[i] = s / a[i * n + i];
        }
        Ok(x)
    }
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn lu_solves_random_systems() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let n = 40;
        let mut a = CMatrix::zeros(n, n);
        for v in a.data.iter_mut() {
            *v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let x: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
        let b = a.matvec(&x);
        let got = a.solve(&b).unwrap();
        let err: f64 = got.iter().zip(&x).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn singular_is_reported() {
        let a = CMatrix::zeros(3, 3);
        assert!(a.solve(&[C64::new(1.0, 0.0); 3]).is_err());
    }
}
