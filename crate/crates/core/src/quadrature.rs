//! Periodic quadrature rules for integrands with a logarithmic diagonal
//! singularity, and the node sets they act on.

use crate::geometry::{CurveJet, GradedMesh, MeshPoint, ParametricCurve};
use crate::{Error, Result};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Plain trapezoidal rule, diagonal evaluated by the integrand limit.
    Tr,
    /// Martensen–Kussmaul product rule for `log(4 sin²((t−τ)/2))`.
    Mk,
    /// Kapur–Rokhlin corrected trapezoidal rules of order 6 and 10.
    Kr6,
    Kr10,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Tr, Method::Mk, Method::Kr6, Method::Kr10];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Tr => "TR",
            Method::Mk => "MK",
            Method::Kr6 => "KR6",
            Method::Kr10 => "KR10",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TR" => Ok(Method::Tr),
            "MK" => Ok(Method::Mk),
            "KR6" => Ok(Method::Kr6),
            "KR10" => Ok(Method::Kr10),
            _ => Err(Error::InvalidInput(format!("unknown quadrature method '{s}' (expected TR, MK, KR6 or KR10)"))),
        }
    }
}

/// Martensen–Kussmaul weights `R_j`, `j = 0..2n−1`:
///
/// `R_j = −(2π/n) Σ_{m=1}^{n−1} cos(m j π/n)/m − (−1)^j π/n²`.
pub fn mk_weights(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    let nf = n as f64;
    // cos(m j π/n) only depends on m·j mod 2n.
    let cosines: Vec<f64> = (0..2 * n).map(|q| (q as f64 * PI / nf).cos()).collect();
    (0..2 * n)
        .map(|j| {
            let sum: f64 = (1..n).map(|m| cosines[(m * j) % (2 * n)] / m as f64).sum();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            -2.0 * PI / nf * sum - sign * PI / (nf * nf)
        })
        .collect()
}

const KR2: [f64; 2] = [1.825748064736159399, -1.325748064736159399];

const KR6: [f64; 6] = [
    4.9673629782877582632,
    -16.205015048591260683,
    25.851537618326387638,
    -22.225994667918829008,
    9.9301049980375378726,
    -1.8179958781415940819,
];

const KR10: [f64; 10] = [
    7.8324320205687793349,
    -45.651616703747485847,
    145.21688463546776066,
    -290.1348302886378899,
    387.08621625798996619,
    -352.38213835706800717,
    217.24215475193424741,
    -87.077960873829893843,
    20.535842660726346025,
    -2.1669841034038228483,
];

/// Kapur–Rokhlin correction coefficients `γ_1..γ_m` for a logarithmic
/// singularity at the excluded node. The rule is
/// `h Σ_{j≠0} f(jh) + h Σ_{l=1}^{m} γ_l (f(lh) + f(−lh))`, so the diagonal
/// weight is 0. Supported orders: 2, 6 and 10.
pub fn kr_weights(order: u32) -> Result<&'static [f64]> {
    match order {
        2 => Ok(&KR2),
        6 => Ok(&KR6),
        10 => Ok(&KR10),
        _ => Err(Error::InvalidInput(format!("no Kapur-Rokhlin rule of order {order}"))),
    }
}

/// One quadrature node on a curve.
#[derive(Clone, Copy, Debug)]
pub struct Node {
    /// Integration variable.
    pub s: f64,
    /// Curve parameter `t = w(s)`.
    pub t: f64,
    pub mesh: MeshPoint,
    pub jet: CurveJet,
}

/// The nodes of one curve under a discretization.
#[derive(Clone, Debug)]
pub struct NodeSet {
    pub curve: ParametricCurve,
    pub nodes: Vec<Node>,
    pub h: f64,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Trapezoidal surface weights `h·w'(s_j)·|x'(t_j)|`.
    pub fn surface_weights(&self) -> Vec<f64> {
        self.nodes.iter().map(|nd| self.h * nd.mesh.w1 * nd.jet.speed).collect()
    }
}

/// A quadrature method, half node count `n` (so `2n` nodes per curve) and
/// the change of variable.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub method: Method,
    pub n: usize,
    pub mesh: GradedMesh,
    /// `½(R_l − h·log(4 sin²(lh/2)))`, the MK log weight per index offset.
    mk_log: Vec<f64>,
    /// `R_0`.
    mk_r0: f64,
    /// Trapezoid multiplier `1 + γ_|l|` per index offset for KR rules.
    kr_factor: Vec<f64>,
}

impl Discretization {
    pub fn new(method: Method, n: usize, mesh: GradedMesh) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("n must be at least 2, got {n}")));
        }
        if let GradedMesh::Kress { p } = mesh {
            if p < 2 {
                return Err(Error::InvalidInput(format!("grading exponent must be at least 2, got {p}")));
            }
        }
        let size = 2 * n;
        let h = PI / n as f64;
        let (mut mk_log, mut mk_r0) = (Vec::new(), 0.0);
        if method == Method::Mk {
            let r = mk_weights(n);
            mk_r0 = r[0];
            mk_log = (0..size)
                .map(|l| {
                    if l == 0 {
                        0.0
                    } else {
                        let lg = (4.0 * (0.5 * l as f64 * h).sin().powi(2)).ln();
                        0.5 * (r[l] - h * lg)
                    }
                })
                .collect();
        }
        let mut kr_factor = Vec::new();
        if let Some(order) = method.kr_order() {
            let gamma = kr_weights(order)?;
            let m = gamma.len();
            if size < 2 * m + 2 {
                return Err(Error::InvalidInput(format!(
                    "{method} needs at least {} nodes per curve, got {size}",
                    2 * m + 2
                )));
            }
            kr_factor = vec![1.0; size];
            kr_factor[0] = 0.0;
            for (l, g) in gamma.iter().enumerate() {
                kr_factor[l + 1] += g;
                kr_factor[size - l - 1] += g;
            }
        }
        Ok(Self { method, n, mesh, mk_log, mk_r0, kr_factor })
    }

    pub fn len(&self) -> usize {
        2 * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        PI / self.n as f64
    }

    /// Values of the integration variable: `jπ/n`, or `(j+½)π/n` on graded
    /// meshes so that the corner is never a node.
    pub fn params(&self) -> Vec<f64> {
        let h = self.h();
        let shift = if self.mesh.is_identity() { 0.0 } else { 0.5 };
        (0..self.len()).map(|j| (j as f64 + shift) * h).collect()
    }

    pub fn nodes(&self, curve: &ParametricCurve) -> NodeSet {
        let nodes = self
            .params()
            .into_iter()
            .map(|s| {
                let mesh = self.mesh.eval(s);
                Node { s, t: mesh.w, mesh, jet: curve.jet(mesh.w) }
            })
            .collect();
        NodeSet { curve: *curve, nodes, h: self.h() }
    }

    /// Off-diagonal weights `(wf, wl)` in the integration variable for the
    /// pair `(i, j)`: the pair contributes `(wf·F + wl·F1)·w'(s_j)` where
    /// `F` is the integrand and `F1` the coefficient of `log|t − τ|`.
    pub fn pair_weights(&self, i: usize, j: usize) -> (f64, f64) {
        let size = self.len();
        let l = (j + size - i) % size;
        let h = self.h();
        match self.method {
            Method::Tr => (h, 0.0),
            Method::Mk => (h, self.mk_log[l]),
            Method::Kr6 | Method::Kr10 => (h * self.kr_factor[l], 0.0),
        }
    }

    /// `R_0` of the MK rule (0 for other methods).
    pub fn mk_r0(&self) -> f64 {
        self.mk_r0
    }

    /// Adds `delta` to the MK weight `R_l` (both `l` and `−l`). Only used to
    /// check that the self-tests notice a wrong weight.
    pub fn perturb_mk_weight(&mut self, l: usize, delta: f64) {
        if self.method != Method::Mk {
            return;
        }
        let size = self.len();
        let l = l % size;
        if l == 0 {
            self.mk_r0 += delta;
        } else {
            self.mk_log[l] += 0.5 * delta;
            if size - l != l {
                self.mk_log[size - l] += 0.5 * delta;
            }
        }
    }
}

impl Method {
    pub fn kr_order(&self) -> Option<u32> {
        match self {
            Method::Kr6 => Some(6),
            Method::Kr10 => Some(10),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn mk_small_cases() {
        let r = mk_weights(1);
        assert!((r[0] + PI).abs() < 1e-15 && (r[1] - PI).abs() < 1e-15);
        for n in [1, 2, 5, 16, 64, 200] {
            let r = mk_weights(n);
            assert!(r.iter().sum::<f64>().abs() < 1e-12, "n={n}");
            for j in 1..2 * n {
                assert!((r[j] - r[2 * n - j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn mk_integrates_log_times_trig_polynomials() {
        // ∫ log(4 sin²((t−τ)/2)) e^{imτ} dτ = −2π/|m| e^{imt} (m ≠ 0), 0 for m = 0.
        let n = 16;
        let r = mk_weights(n);
        for m in 0..n as i32 {
            let got: f64 = (0..2 * n).map(|j| r[j] * (m as f64 * j as f64 * PI / n as f64).cos()).sum();
            let want = if m == 0 { 0.0 } else { -TAU / m as f64 };
            assert!((got - want).abs() < 1e-12, "m={m}: {got} vs {want}");
        }
    }

    fn kr_integral(order: u32, n: usize) -> f64 {
        // ∫₀^{2π} log(4 sin²(t/2)) cos t dt on nodes jπ/n with the singular
        // point at j = 0 excluded.
        let d = Discretization::new(if order == 6 { Method::Kr6 } else { Method::Kr10 }, n, GradedMesh::Identity).unwrap();
        let h = d.h();
        (1..2 * n)
            .map(|j| {
                let t = j as f64 * h;
                let f = (4.0 * (0.5 * t).sin().powi(2)).ln() * t.cos();
                d.pair_weights(0, j).0 * f
            })
            .sum()
    }

    #[test]
    fn kr_orders() {
        let exact = -TAU;
        for (order, min_rate) in [(6u32, 5.5), (10, 9.0)] {
            let e1 = (kr_integral(order, 20) - exact).abs();
            let e2 = (kr_integral(order, 40) - exact).abs();
            let e3 = (kr_integral(order, 80) - exact).abs();
            let rate = (e1 / e3).log2() / 2.0;
            assert!(rate >= min_rate, "order {order}: errors {e1:e} {e2:e} {e3:e} rate {rate}");
        }
        assert!((kr_integral(6, 320) - exact).abs() < 1e-13);
    }

    #[test]
    fn kr_low_order_matches_published_table() {
        let g = kr_weights(2).unwrap();
        assert!((g[0] - 1.825748064736159).abs() < 1e-15);
        assert!((g[1] + 1.325748064736159).abs() < 1e-15);
        for order in [2, 6, 10] {
            let s: f64 = kr_weights(order).unwrap().iter().sum();
            assert!((2.0 * s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kr_diagonal_weight_is_zero() {
        for m in [Method::Kr6, Method::Kr10] {
            let d = Discretization::new(m, 32, GradedMesh::Identity).unwrap();
            for i in [0, 5, 63] {
                assert_eq!(d.pair_weights(i, i).0, 0.0);
            }
        }
    }

    #[test]
    fn tr_weights_sum_to_period() {
        let d = Discretization::new(Method::Tr, 10, GradedMesh::Identity).unwrap();
        let s: f64 = (0..20).map(|j| d.pair_weights(3, j).0).sum();
        assert!((s - TAU).abs() < 1e-14);
    }

    #[test]
    fn rejects_short_kr_grids() {
        assert!(Discretization::new(Method::Kr10, 10, GradedMesh::Identity).is_err());
        assert!(Discretization::new(Method::Kr10, 11, GradedMesh::Identity).is_ok());
        assert!(Discretization::new(Method::Kr6, 6, GradedMesh::Identity).is_err());
    }

    #[test]
    fn graded_nodes_skip_the_corner() {
        let d = Discretization::new(Method::Mk, 8, GradedMesh::Kress { p: 4 }).unwrap();
        let s = d.params();
        assert!((s[0] - PI / 16.0).abs() < 1e-15);
        assert!(s.iter().all(|&v| v > 0.0 && v < TAU));
    }

    #[test]
    fn method_parsing() {
        assert_eq!("kr10".parse::<Method>().unwrap(), Method::Kr10);
        assert!("simpson".parse::<Method>().is_err());
    }
}
