//! Smoothing functions `p0`, `p1` and the residual densities `ρ_D`, `ρ_S`.
//!
//! With `a = n0·(y − x0)`, `b = τ0·(y − x0)` and `c = k/√2`:
//!
//! ```text
//! p0(y) = cos(k a) + (iη/k) sin(k a)
//! p1(y) = [√2/k cos(c a) + (κ + iη)(2/k²) sin(c a)] sin(c b)
//! ```
//!
//! where `κ = n0·x''(t0)/|x'(t0)|²`. Both solve the Helmholtz equation, and
//! at `x0` they satisfy `p0 = 1, ∂n p0 = iη, ∂s p0 = 0` and
//! `p1 = 0, ∂n p1 = 0, ∂s p1 = 1, ∂s∂n p1 = iη`.

use crate::geometry::{CurveJet, Vec2};
use crate::C64;
use std::f64::consts::SQRT_2;

/// Anchor point and frame of the smoothing functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothingAnchor {
    pub t0: f64,
    pub x0: Vec2,
    pub n0: Vec2,
    pub tau0: Vec2,
    pub curv: f64,
    pub k: f64,
    pub eta: f64,
}

/// Values and normal derivatives of both smoothing functions at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothingValues {
    pub p0: C64,
    pub dn_p0: C64,
    pub p1: C64,
    pub dn_p1: C64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    P0,
    P1,
}

/// Partial derivatives in the anchor frame `(a, b)`.
#[derive(Clone, Copy, Debug)]
struct Local {
    v: C64,
    da: C64,
    db: C64,
    daa: C64,
    dab: C64,
    dbb: C64,
}

impl Local {
    fn gradient_dot(&self, anchor: &SmoothingAnchor, dir: Vec2) -> C64 {
        self.da * anchor.n0.dot(dir) + self.db * anchor.tau0.dot(dir)
    }

    fn hessian_form(&self, anchor: &SmoothingAnchor, u: Vec2) -> C64 {
        let (ua, ub) = (anchor.n0.dot(u), anchor.tau0.dot(u));
        self.daa * (ua * ua) + self.dab * (2.0 * ua * ub) + self.dbb * (ub * ub)
    }
}

impl SmoothingAnchor {
    pub fn new(jet: &CurveJet, k: f64, eta: f64) -> Self {
        Self {
            t0: jet.t,
            x0: jet.point,
            n0: jet.normal,
            tau0: jet.tangent,
            curv: jet.curvature_coeff(),
            k,
            eta,
        }
    }

    fn coords(&self, y: Vec2) -> (f64, f64) {
        let d = y - self.x0;
        (self.n0.dot(d), self.tau0.dot(d))
    }

    fn local0(&self, y: Vec2) -> Local {
        let k = self.k;
        let (a, _) = self.coords(y);
        let (s, c) = (k * a).sin_cos();
        let ie = C64::new(0.0, self.eta);
        let v = c + ie / k * s;
        let zero = C64::new(0.0, 0.0);
        Local {
            v,
            da: -k * s + ie * c,
            db: zero,
            daa: -k * k * v,
            dab: zero,
            dbb: zero,
        }
    }

    fn local1(&self, y: Vec2) -> Local {
        let k = self.k;
        let cc = k / SQRT_2;
        let (a, b) = self.coords(y);
        let (sa, ca) = (cc * a).sin_cos();
        let (sb, cb) = (cc * b).sin_cos();
        let beta = C64::new(self.curv, self.eta) * (2.0 / (k * k));
        let bracket = SQRT_2 / k * ca + beta * sa;
        let bracket_a = -sa + beta * (cc * ca);
        let v = bracket * sb;
        Local {
            v,
            da: bracket_a * sb,
            db: bracket * (cc * cb),
            daa: -cc * cc * v,
            dab: bracket_a * (cc * cb),
            dbb: -cc * cc * v,
        }
    }

    fn local(&self, which: Which, y: Vec2) -> Local {
        match which {
            Which::P0 => self.local0(y),
            Which::P1 => self.local1(y),
        }
    }

    /// Both functions and their derivatives along `ny` at `y`.
    pub fn eval(&self, y: Vec2, ny: Vec2) -> SmoothingValues {
        let l0 = self.local0(y);
        let l1 = self.local1(y);
        SmoothingValues {
            p0: l0.v,
            dn_p0: l0.gradient_dot(self, ny),
            p1: l1.v,
            dn_p1: l1.gradient_dot(self, ny),
        }
    }

    /// Gradient of `p0` or `p1` at `y`, as complex components `(x, y)`.
    pub fn gradient(&self, which: Which, y: Vec2) -> (C64, C64) {
        let l = self.local(which, y);
        (l.gradient_dot(self, Vec2::new(1.0, 0.0)), l.gradient_dot(self, Vec2::new(0.0, 1.0)))
    }
}

/// `(p0(y), ∇p0(y)·ny)`.
pub fn p0_eval(anchor: &SmoothingAnchor, y: Vec2, ny: Vec2) -> (C64, C64) {
    let l = anchor.local0(y);
    (l.v, l.gradient_dot(anchor, ny))
}

/// `(p1(y), ∇p1(y)·ny)`.
pub fn p1_eval(anchor: &SmoothingAnchor, y: Vec2, ny: Vec2) -> (C64, C64) {
    let l = anchor.local1(y);
    (l.v, l.gradient_dot(anchor, ny))
}

/// `Δp + k²p` from the analytic second derivatives.
pub fn helmholtz_residual(anchor: &SmoothingAnchor, which: Which, y: Vec2) -> C64 {
    let l = anchor.local(which, y);
    l.daa + l.dbb + anchor.k * anchor.k * l.v
}

/// Second derivative of `τ ↦ p(x(τ))` at the anchor parameter, for `p0`
/// and `p1`. `jet` must be the curve jet at the anchor.
pub fn diag_second_derivs(anchor: &SmoothingAnchor, jet: &CurveJet) -> (C64, C64) {
    let second = |which| {
        let l = anchor.local(which, jet.point);
        l.hessian_form(anchor, jet.d1) + l.gradient_dot(anchor, jet.d2)
    };
    (second(Which::P0), second(Which::P1))
}

/// Residual densities at a source point `y` with normal `ny`:
///
/// ```text
/// ρ_D = φ(τ) − φ(t) p0 − φ'(t) p1 / |x'(t)|
/// ρ_S = iη φ(τ) − φ(t) ∂n p0 − φ'(t) ∂n p1 / |x'(t)|
/// ```
#[allow(clippy::too_many_arguments)]
pub fn rho_pair(
    phi_tau: C64,
    phi_t: C64,
    dphi_t: C64,
    anchor: &SmoothingAnchor,
    y: Vec2,
    ny: Vec2,
    speed_t: f64,
) -> (C64, C64) {
    let v = anchor.eval(y, ny);
    let d = dphi_t / speed_t;
    let rho_d = phi_tau - phi_t * v.p0 - d * v.p1;
    let rho_s = C64::new(0.0, anchor.eta) * phi_tau - phi_t * v.dn_p0 - d * v.dn_p1;
    (rho_d, rho_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ParametricCurve, Shape};
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{PI, TAU};

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn anchors() -> Vec<(ParametricCurve, SmoothingAnchor, CurveJet)> {
        let mut out = Vec::new();
        for (shape, t0, k, eta) in [
            (Shape::Circle { radius: 1.0 }, 0.7, 2.0, 2.0),
            (Shape::Kite, 1.3, 4.0, 4.0),
            (Shape::Kite, 4.0, 3.0, 1.5),
            (Shape::Ellipse { a: 2.0, b: 0.5 }, 2.2, 5.0, 5.0),
        ] {
            let c = ParametricCurve::new(shape);
            let j = c.jet(t0);
            out.push((c, SmoothingAnchor::new(&j, k, eta), j));
        }
        out
    }

    #[test]
    fn point_conditions() {
        for (_, a, _) in anchors() {
            let ie = C64::new(0.0, a.eta);
            let (v, dn) = p0_eval(&a, a.x0, a.n0);
            assert!(close(v, C64::new(1.0, 0.0), 1e-15));
            assert!(close(dn, ie, 1e-15));
            let (_, ds) = p0_eval(&a, a.x0, a.tau0);
            assert!(ds.norm() < 1e-15);
            let (v, dn) = p1_eval(&a, a.x0, a.n0);
            assert!(v.norm() < 1e-15 && dn.norm() < 1e-15);
            let (_, ds) = p1_eval(&a, a.x0, a.tau0);
            assert!(close(ds, C64::new(1.0, 0.0), 1e-14));
            for s in [-0.7, 0.1, 2.0] {
                let (v, _) = p0_eval(&a, a.x0 + s * a.tau0, a.n0);
                assert!(close(v, C64::new(1.0, 0.0), 1e-15));
            }
        }
    }

    #[test]
    fn tangential_derivatives_along_curve() {
        let h = 1e-5;
        for (c, a, j) in anchors() {
            // ∂s p1 = 1 and ∂s ∂n p1 = iη, with s the arc length.
            let f = |t: f64| {
                let jt = c.jet(t);
                p1_eval(&a, jt.point, jt.normal)
            };
            let (vp, np) = f(a.t0 + h);
            let (vm, nm) = f(a.t0 - h);
            let ds = (vp - vm) / (2.0 * h * j.speed);
            let dsn = (np - nm) / (2.0 * h * j.speed);
            assert!(close(ds, C64::new(1.0, 0.0), 1e-8), "{ds}");
            assert!(close(dsn, C64::new(0.0, a.eta), 1e-7), "{dsn}");
            // ∂s p0 = 0 along the curve as well.
            let g = |t: f64| p0_eval(&a, c.point(t), a.n0).0;
            assert!(((g(a.t0 + h) - g(a.t0 - h)) / (2.0 * h)).norm() < 1e-8);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(17);
        let h = 1e-6;
        for (_, a, _) in anchors() {
            for _ in 0..20 {
                let y = a.x0 + Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                for which in [Which::P0, Which::P1] {
                    let val = |p: Vec2| match which {
                        Which::P0 => p0_eval(&a, p, a.n0).0,
                        Which::P1 => p1_eval(&a, p, a.n0).0,
                    };
                    let ex = Vec2::new(h, 0.0);
                    let ey = Vec2::new(0.0, h);
                    let gx = (val(y + ex) - val(y - ex)) / (2.0 * h);
                    let gy = (val(y + ey) - val(y - ey)) / (2.0 * h);
                    let (ax, ay) = a.gradient(which, y);
                    let scale = 1.0 + a.k;
                    assert!(close(gx, ax, 1e-7 * scale) && close(gy, ay, 1e-7 * scale));
                    let theta: f64 = rng.gen_range(0.0..TAU);
                    let ny = Vec2::new(theta.cos(), theta.sin());
                    let dn = match which {
                        Which::P0 => p0_eval(&a, y, ny).1,
                        Which::P1 => p1_eval(&a, y, ny).1,
                    };
                    assert!(close(dn, ax * ny.x + ay * ny.y, 1e-13 * scale));
                }
            }
        }
    }

    #[test]
    fn helmholtz_residuals_vanish() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(23);
        for (_, a, _) in anchors() {
            for _ in 0..100 {
                let y = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                for which in [Which::P0, Which::P1] {
                    let scale = a.k * a.k * (1.0 + a.eta / a.k + a.curv.abs());
                    assert!(helmholtz_residual(&a, which, y).norm() <= 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        let h = 1e-4;
        for (_, a, _) in anchors() {
            let y = a.x0 + Vec2::new(0.3, -0.2);
            let val = |p: Vec2| p1_eval(&a, p, a.n0).0;
            let lap = (val(y + Vec2::new(h, 0.0)) + val(y - Vec2::new(h, 0.0)) + val(y + Vec2::new(0.0, h))
                + val(y - Vec2::new(0.0, h))
                - 4.0 * val(y))
                / (h * h);
            assert!((lap + a.k * a.k * val(y)).norm() < 1e-5 * a.k * a.k);
        }
    }

    #[test]
    fn diag_second_derivatives() {
        // Circle, k = η = 2: p0'' = iη n0·x'' = −2i.
        let c = ParametricCurve::new(Shape::Circle { radius: 1.0 });
        for t0 in [0.0, 1.0, 4.5] {
            let j = c.jet(t0);
            let a = SmoothingAnchor::new(&j, 2.0, 2.0);
            let (p0dd, _) = diag_second_derivs(&a, &j);
            assert!(close(p0dd, C64::new(0.0, -2.0), 1e-14));
        }
        // Fourth-order central differences along the curve.
        let h = 1e-3;
        for (c, a, j) in anchors() {
            let (p0dd, p1dd) = diag_second_derivs(&a, &j);
            let f = |which: Which, t: f64| match which {
                Which::P0 => p0_eval(&a, c.point(t), a.n0).0,
                Which::P1 => p1_eval(&a, c.point(t), a.n0).0,
            };
            for (which, want) in [(Which::P0, p0dd), (Which::P1, p1dd)] {
                let t = a.t0;
                let fd = (-f(which, t + 2.0 * h) + 16.0 * f(which, t + h) - 30.0 * f(which, t)
                    + 16.0 * f(which, t - h)
                    - f(which, t - 2.0 * h))
                    / (12.0 * h * h);
                assert!(close(fd, want, 1e-6), "{which:?}: {fd} vs {want}");
            }
            assert!(close(p0dd, C64::new(0.0, a.eta * a.n0.dot(j.d2)), 1e-13));
            assert!(close(p1dd, C64::new(a.tau0.dot(j.d2), 0.0), 1e-13));
        }
    }

    #[test]
    fn rho_vanishes_on_the_diagonal() {
        for (_, a, j) in anchors() {
            let (rd, rs) = rho_pair(C64::new(0.3, -1.0), C64::new(0.3, -1.0), C64::new(2.0, 0.5), &a, a.x0, a.n0, j.speed);
            assert!(rd.norm() < 1e-15 && rs.norm() < 1e-14);
        }
    }

    #[test]
    fn rho_annihilates_its_basis() {
        // φ = trace of p0 has φ'(t0) = 0, so ρ_D ≡ 0 everywhere on the curve.
        for (c, a, j) in anchors() {
            for tau in [0.1, 1.0, 2.5, 5.0] {
                let jt = c.jet(tau);
                let phi = p0_eval(&a, jt.point, jt.normal).0;
                let (rd, _) = rho_pair(phi, C64::new(1.0, 0.0), C64::new(0.0, 0.0), &a, jt.point, jt.normal, j.speed);
                assert!(rd.norm() < 1e-15);
            }
        }
    }

    fn slope(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
        num / den
    }

    #[test]
    fn residuals_vanish_quadratically() {
        // Unit circle, k = η = 2, plane-wave trace density. The O(|τ − t|²)
        // bound is measured on the envelope over τ = t ± ε.
        let (k, eta) = (2.0, 2.0);
        let c = ParametricCurve::new(Shape::Circle { radius: 1.0 });
        let d = Vec2::new((PI / 8.0).cos(), (PI / 8.0).sin());
        let phi = |t: f64| {
            let arg = k * c.point(t).dot(d);
            C64::new(arg.cos(), arg.sin())
        };
        let dphi = |t: f64| {
            let j = c.jet(t);
            C64::new(0.0, k * j.d1.dot(d)) * phi(t)
        };
        let eps: Vec<f64> = (0..13).map(|i| 1e-4 * 10f64.powf(i as f64 / 4.0)).collect();
        for i in 0..32 {
            let t = TAU * i as f64 / 32.0 + 0.05;
            let j = c.jet(t);
            let a = SmoothingAnchor::new(&j, k, eta);
            let rho = |e: f64| {
                let jt = c.jet(t + e);
                rho_pair(phi(t + e), phi(t), dphi(t), &a, jt.point, jt.normal, j.speed)
            };
            let rd: Vec<f64> = eps.iter().map(|&e| rho(e).0.norm().max(rho(-e).0.norm())).collect();
            let rs: Vec<f64> = eps.iter().map(|&e| rho(e).1.norm().max(rho(-e).1.norm())).collect();
            assert!(slope(&eps, &rd) >= 1.9, "rho_D slope {} at t={t}", slope(&eps, &rd));
            assert!(slope(&eps, &rs) >= 1.9, "rho_S slope {} at t={t}", slope(&eps, &rs));
        }
    }
}
