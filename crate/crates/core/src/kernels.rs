//! Parametrized kernels of the layer operators and their splittings
//!
//! ```text
//! K(t, τ) = K0(t, τ)/(t − τ)² + K1(t, τ) log|t − τ| + K2(t, τ)
//! ```
//!
//! with `K0` nonzero only for the hypersingular kernel `H`. All kernels carry
//! the source speed `|x'(τ)|`. With `d = x(t) − x(τ)`, `R = |d|`:
//!
//! - `L = ∂n(τ) G · |x'(τ)|` (double layer),
//! - `M = G · |x'(τ)|` (single layer),
//! - `H = ∂n(t) ∂n(τ) G · |x'(τ)|` (hypersingular),
//! - `W = ∂n(t) G · |x'(τ)|` (adjoint double layer),
//!
//! where `G = (i/4) H0(kR)`. For `kR ≤ 2` the smooth parts are assembled from
//! the regular parts of `Y0`, `Y1` so that nothing cancels near the diagonal.

use crate::geometry::{CurveJet, ParametricCurve, Vec2};
use crate::specfun::{cylinder01, regular_parts, EULER_GAMMA};
use crate::C64;
use std::f64::consts::{PI, TAU};

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Below this argument the regularized forms are used.
const NEAR_LIMIT: f64 = 2.0;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KernelSplit {
    pub smooth: C64,
    pub log_coeff: C64,
    pub inv_sq_coeff: C64,
}

impl KernelSplit {
    /// The kernel value at parameter offset `delta = t − τ ≠ 0`
    /// (periodically wrapped).
    pub fn value(&self, delta: f64) -> C64 {
        self.inv_sq_coeff / (delta * delta) + self.log_coeff * delta.abs().ln() + self.smooth
    }

    pub fn scale(&self, c: C64) -> KernelSplit {
        KernelSplit { smooth: self.smooth * c, log_coeff: self.log_coeff * c, inv_sq_coeff: self.inv_sq_coeff * c }
    }

    pub fn add(&self, o: &KernelSplit) -> KernelSplit {
        KernelSplit {
            smooth: self.smooth + o.smooth,
            log_coeff: self.log_coeff + o.log_coeff,
            inv_sq_coeff: self.inv_sq_coeff + o.inv_sq_coeff,
        }
    }
}

/// The four kernels at one parameter pair.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PairKernels {
    pub l: KernelSplit,
    pub m: KernelSplit,
    pub h: KernelSplit,
    pub w: KernelSplit,
}

/// `t − τ` wrapped into `(−π, π]`.
pub fn wrap(delta: f64) -> f64 {
    let mut d = delta.rem_euclid(TAU);
    if d > PI {
        d -= TAU;
    }
    d
}

/// `z J0(z) − 2 J1(z)`, which behaves like `−z³/8` at the origin.
fn zj0_minus_2j1(z: f64) -> f64 {
    if z > NEAR_LIMIT {
        let c = cylinder01(z);
        return z * c.j0 - 2.0 * c.j1;
    }
    let q = 0.25 * z * z;
    // term_m = (−q)^m / (m! (m+1)!), series 2 (z/2) Σ m term_m.
    let mut term = 1.0;
    let mut sum = 0.0;
    for m in 1..30 {
        let mf = m as f64;
        term *= -q / (mf * (mf + 1.0));
        sum += mf * term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    z * sum
}

/// Kernel splittings at `(t, τ)` given the curve jets at both parameters and
/// the wrapped offset `delta = t − τ`. `delta == 0` selects the diagonal
/// limits (the two jets must then coincide).
pub fn pair_kernels(k: f64, jt: &CurveJet, jtau: &CurveJet, delta: f64) -> PairKernels {
    if delta == 0.0 {
        return diagonal_kernels(k, jt);
    }
    let d = jt.point - jtau.point;
    let r = d.norm();
    let z = k * r;
    let sp = jtau.speed;
    let dny = d.dot(jtau.normal);
    let dnx = d.dot(jt.normal);
    let nn = jt.normal.dot(jtau.normal);
    let dd = dny * dnx;
    let ld = delta.abs().ln();
    let c2pi = 1.0 / TAU;
    let h0coef = C64::new(c2pi * delta * delta / (r * r) * nn * sp, 0.0);

    if z <= NEAR_LIMIT {
        let rp = regular_parts(z);
        let a = zj0_minus_2j1(z);
        let lam = (z / (2.0 * delta.abs())).ln();
        let (r2, r3) = (r * r, r * r * r);

        let l1 = -k * c2pi * rp.j1 / r * dny * sp;
        let m1 = -c2pi * rp.j0 * sp;
        let h1 = -k * c2pi * a / r3 * dd * sp - k * c2pi * rp.j1 / r * nn * sp;
        let w1 = k * c2pi * rp.j1 / r * dnx * sp;

        let j1y1 = C64::new(rp.j1, rp.y1_reg);
        let l2 = I * (0.25 * k) * j1y1 / r * dny * sp + dny * sp / (TAU * r2) + l1 * lam;
        let m2 = (I * 0.25 * rp.j0 - 0.25 * rp.y0_reg) * sp + m1 * lam;
        let h2 = I * (0.25 * k * a / r3 * dd * sp)
            - 0.25 * k * (z * rp.y0_reg - 2.0 * rp.y1_reg) / r3 * dd * sp
            - dd * sp / (PI * r2 * r2)
            + I * (0.25 * k) * j1y1 / r * nn * sp
            + h1 * lam;
        let w2 = -I * (0.25 * k) * j1y1 / r * dnx * sp - dnx * sp / (TAU * r2) + w1 * lam;

        let split = |s: C64, l: f64| KernelSplit { smooth: s, log_coeff: C64::new(l, 0.0), inv_sq_coeff: ZERO };
        PairKernels {
            l: split(l2, l1),
            m: split(m2, m1),
            h: KernelSplit { smooth: h2, log_coeff: C64::new(h1, 0.0), inv_sq_coeff: h0coef },
            w: split(w2, w1),
        }
    } else {
        let c = cylinder01(z);
        let (hank0, hank1) = (c.h0(), c.h1());
        let a = zj0_minus_2j1(z);
        let l = I * (0.25 * k) * hank1 / r * dny * sp;
        let m = I * 0.25 * hank0 * sp;
        let h = I * (0.25 * k) * (z * hank0 - 2.0 * hank1) / (r * r * r) * dd * sp + I * (0.25 * k) * hank1 / r * nn * sp;
        let w = -I * (0.25 * k) * hank1 / r * dnx * sp;

        let l1 = -k * c2pi * c.j1 / r * dny * sp;
        let m1 = -c2pi * c.j0 * sp;
        let h1 = -k * c2pi * a / (r * r * r) * dd * sp - k * c2pi * c.j1 / r * nn * sp;
        let w1 = k * c2pi * c.j1 / r * dnx * sp;

        let split = |full: C64, l: f64| KernelSplit { smooth: full - l * ld, log_coeff: C64::new(l, 0.0), inv_sq_coeff: ZERO };
        PairKernels {
            l: split(l, l1),
            m: split(m, m1),
            h: KernelSplit {
                smooth: h - h1 * ld - h0coef / (delta * delta),
                log_coeff: C64::new(h1, 0.0),
                inv_sq_coeff: h0coef,
            },
            w: split(w, w1),
        }
    }
}

/// Diagonal limits.
fn diagonal_kernels(k: f64, j: &CurveJet) -> PairKernels {
    let sp = j.speed;
    let kappa = j.d2.dot(j.normal);
    let lam = (0.5 * k * sp).ln();
    let lw = kappa / (2.0 * TAU * sp);
    let m1 = -sp / TAU;
    let h1 = -k * k * sp / (2.0 * TAU);
    let real = |v: f64| C64::new(v, 0.0);
    PairKernels {
        l: KernelSplit { smooth: real(lw), log_coeff: ZERO, inv_sq_coeff: ZERO },
        m: KernelSplit {
            smooth: C64::new(-(EULER_GAMMA + lam) / TAU, 0.25) * sp,
            log_coeff: real(m1),
            inv_sq_coeff: ZERO,
        },
        h: KernelSplit {
            smooth: C64::new(
                kappa * kappa / (2.0 * TAU * sp * sp * sp) - k * k * (2.0 * EULER_GAMMA - 1.0) * sp / (8.0 * PI) + h1 * lam,
                k * k * sp / 8.0,
            ),
            log_coeff: real(h1),
            inv_sq_coeff: real(1.0 / (TAU * sp)),
        },
        w: KernelSplit { smooth: real(lw), log_coeff: ZERO, inv_sq_coeff: ZERO },
    }
}

pub fn kernel_l(curve: &ParametricCurve, k: f64, t: f64, tau: f64) -> KernelSplit {
    at(curve, k, t, tau).l
}

pub fn kernel_m(curve: &ParametricCurve, k: f64, t: f64, tau: f64) -> KernelSplit {
    at(curve, k, t, tau).m
}

pub fn kernel_h(curve: &ParametricCurve, k: f64, t: f64, tau: f64) -> KernelSplit {
    at(curve, k, t, tau).h
}

pub fn kernel_w(curve: &ParametricCurve, k: f64, t: f64, tau: f64) -> KernelSplit {
    at(curve, k, t, tau).w
}

fn at(curve: &ParametricCurve, k: f64, t: f64, tau: f64) -> PairKernels {
    let jt = curve.jet(t);
    let jtau = curve.jet(tau);
    pair_kernels(k, &jt, &jtau, wrap(t - tau))
}

/// Kernels of the classical layer operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classic {
    /// Single layer, `M`.
    S,
    /// Double layer, `L`.
    K,
    /// Adjoint double layer, `W`.
    KPrime,
    /// `k² n(t)·n(τ) G |x'(τ)|`, the non-derivative term of Maue's formula.
    MaueNormal,
    /// `G` without the speed factor; Maue's formula applies it to `φ'(τ)`.
    MaueTangential,
}

pub fn kernel_classic(curve: &ParametricCurve, k: f64, t: f64, tau: f64, which: Classic) -> KernelSplit {
    let jt = curve.jet(t);
    let jtau = curve.jet(tau);
    classic_split(k, &jt, &jtau, wrap(t - tau), which)
}

pub fn classic_split(k: f64, jt: &CurveJet, jtau: &CurveJet, delta: f64, which: Classic) -> KernelSplit {
    let p = pair_kernels(k, jt, jtau, delta);
    match which {
        Classic::S => p.m,
        Classic::K => p.l,
        Classic::KPrime => p.w,
        Classic::MaueNormal => p.m.scale(C64::new(k * k * jt.normal.dot(jtau.normal), 0.0)),
        Classic::MaueTangential => p.m.scale(C64::new(1.0 / jtau.speed, 0.0)),
    }
}

/// MK splitting of an integrand value `f` with `log|t−τ|` coefficient `f1`
/// at wrapped offset `delta ≠ 0`: returns `(C1, C2)` with
/// `f = C1 log(4 sin²(δ/2)) + C2`.
pub fn mk_split(f: C64, f1: C64, delta: f64) -> (C64, C64) {
    let c1 = 0.5 * f1;
    (c1, f - c1 * (4.0 * (0.5 * delta).sin().powi(2)).ln())
}

/// Green function and its normal derivatives between two arbitrary points,
/// without any speed factor: `(G, ∂n(y) G, ∂n(x) G, ∂n(x) ∂n(y) G)`.
pub fn green_terms(k: f64, x: Vec2, nx: Vec2, y: Vec2, ny: Vec2) -> [C64; 4] {
    let d = x - y;
    let r = d.norm();
    let z = k * r;
    let c = cylinder01(z);
    let (h0, h1) = (c.h0(), c.h1());
    let dny = d.dot(ny);
    let dnx = d.dot(nx);
    let g = I * 0.25 * h0;
    let gy = I * (0.25 * k) * h1 / r * dny;
    let gx = -I * (0.25 * k) * h1 / r * dnx;
    let gxy = I * (0.25 * k) * ((z * h0 - 2.0 * h1) / (r * r * r) * dny * dnx + h1 / r * nx.dot(ny));
    [g, gy, gx, gxy]
}

/// `G(x, y)` and `∂n(y) G(x, y)` only.
pub fn green_pair(k: f64, x: Vec2, y: Vec2, ny: Vec2) -> (C64, C64) {
    let d = x - y;
    let r = d.norm();
    let c = cylinder01(k * r);
    (I * 0.25 * c.h0(), I * (0.25 * k) * c.h1() / r * d.dot(ny))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;
    use crate::specfun::hankel1;
    use rand::{Rng, SeedableRng};

    fn curves() -> Vec<ParametricCurve> {
        vec![
            ParametricCurve::new(Shape::Circle { radius: 1.0 }),
            ParametricCurve::new(Shape::Kite),
            ParametricCurve::with_transform(Shape::Kite, Vec2::new(2.0, 0.0), true),
            ParametricCurve::new(Shape::Ellipse { a: 1.5, b: 0.6 }),
        ]
    }

    /// Direct Hankel evaluation of the unsplit kernels.
    fn direct(c: &ParametricCurve, k: f64, t: f64, tau: f64) -> [C64; 4] {
        let jt = c.jet(t);
        let js = c.jet(tau);
        let [g, gy, gx, gxy] = green_terms(k, jt.point, jt.normal, js.point, js.normal);
        let _ = g;
        let r = (jt.point - js.point).norm();
        let h0 = hankel1(0, k * r).unwrap();
        [gy * js.speed, I * 0.25 * h0 * js.speed, gxy * js.speed, gx * js.speed]
    }

    #[test]
    fn off_diagonal_reconstruction() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(31);
        for c in curves() {
            for k in [1.0, 4.0, 16.0] {
                for _ in 0..100 {
                    let t: f64 = rng.gen_range(0.0..TAU);
                    let tau: f64 = rng.gen_range(0.0..TAU);
                    let delta = wrap(t - tau);
                    if delta.abs() < 1e-3 {
                        continue;
                    }
                    let p = at(&c, k, t, tau);
                    let want = direct(&c, k, t, tau);
                    let got = [p.l.value(delta), p.m.value(delta), p.h.value(delta), p.w.value(delta)];
                    for q in 0..4 {
                        let tol = if q == 2 { 1e-11 } else { 1e-12 };
                        let scale = want[q].norm().max(1.0);
                        assert!((got[q] - want[q]).norm() <= tol * scale, "q={q} k={k} t={t} tau={tau}: {} vs {}", got[q], want[q]);
                    }
                }
            }
        }
    }

    #[test]
    fn near_diagonal_reconstruction() {
        // Pairs with kR < 2 exercise the regularized branch.
        for c in curves() {
            for k in [1.0, 4.0] {
                for t in [0.3, 2.0, 5.0] {
                    for eps in [1e-1, 3e-2, 1e-2] {
                        let p = at(&c, k, t, t - eps);
                        let want = direct(&c, k, t, t - eps);
                        let got = [p.l.value(eps), p.m.value(eps), p.h.value(eps), p.w.value(eps)];
                        for q in 0..4 {
                            let scale = want[q].norm().max(1.0);
                            assert!((got[q] - want[q]).norm() <= 1e-11 * scale, "q={q} eps={eps}: {} vs {}", got[q], want[q]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn diagonal_values() {
        let circle = ParametricCurve::new(Shape::Circle { radius: 1.0 });
        for t in [0.0, 1.0, 3.0] {
            let p = at(&circle, 2.0, t, t);
            assert!((p.l.smooth - C64::new(-1.0 / (4.0 * PI), 0.0)).norm() < 1e-15);
            assert!(p.l.log_coeff.norm() == 0.0 && p.w.log_coeff.norm() == 0.0);
            assert!((p.m.log_coeff + 1.0 / TAU).norm() < 1e-15);
            assert!((p.h.inv_sq_coeff - 1.0 / TAU).norm() < 1e-15);
        }
        let kite = ParametricCurve::new(Shape::Kite);
        let j = kite.jet(2.0);
        let p = at(&kite, 4.0, 2.0, 2.0);
        assert!((p.m.log_coeff + j.speed / TAU).norm() < 1e-15);
        assert!((p.h.inv_sq_coeff - 1.0 / (TAU * j.speed)).norm() < 1e-15);
    }

    #[test]
    fn components_are_continuous_across_the_diagonal() {
        for c in curves() {
            for k in [1.0, 4.0, 16.0] {
                for t in [0.4, 2.5, 4.9] {
                    let p0 = at(&c, k, t, t);
                    let comps0 = components(&p0);
                    let mut prev = f64::INFINITY;
                    for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
                        let mut worst: f64 = 0.0;
                        for sign in [1.0, -1.0] {
                            let p = at(&c, k, t, t - sign * eps);
                            for (a, b) in components(&p).iter().zip(&comps0) {
                                worst = worst.max((a - b).norm() / b.norm().max(1.0));
                            }
                        }
                        assert!(worst < 50.0 * eps.max(1e-6) * k * k, "{c:?} k={k} t={t} eps={eps}: {worst}");
                        assert!(worst <= prev * 1.01 || worst < 1e-6);
                        prev = worst;
                    }
                }
            }
        }
    }

    fn components(p: &PairKernels) -> Vec<C64> {
        let mut out = Vec::new();
        for s in [p.l, p.m, p.h, p.w] {
            out.extend([s.smooth, s.log_coeff, s.inv_sq_coeff]);
        }
        out
    }

    #[test]
    fn circle_single_layer_eigenvalues() {
        // S e^{imτ} = (iπ/2) J_m(k) H_m(k) e^{imt} on the unit circle.
        let k = 2.0;
        let c = ParametricCurve::new(Shape::Circle { radius: 1.0 });
        let n = 32;
        let r = crate::quadrature::mk_weights(n);
        let h = PI / n as f64;
        let t = 0.0;
        let eig = |m: i32| -> C64 {
            (0..2 * n)
                .map(|j| {
                    let tau = j as f64 * h;
                    let f = C64::new(0.0, m as f64 * tau).exp();
                    let s = kernel_classic(&c, k, t, tau, Classic::S);
                    if j == 0 {
                        r[0] * 0.5 * s.log_coeff * f + h * s.smooth * f
                    } else {
                        let delta = wrap(t - tau);
                        let (c1, c2) = mk_split(s.value(delta), s.log_coeff, delta);
                        (r[j] * c1 + h * c2) * f
                    }
                })
                .sum()
        };
        // J_m, H_m for m = 0, 1, 2 via recurrences from orders 0 and 1.
        let c01 = cylinder01(k);
        let j2 = 2.0 / k * c01.j1 - c01.j0;
        let y2 = 2.0 / k * c01.y1 - c01.y0;
        let vals = [(c01.j0, c01.h0()), (c01.j1, c01.h1()), (j2, C64::new(j2, y2))];
        for (m, (jm, hm)) in vals.iter().enumerate() {
            let want = I * (PI / 2.0) * jm * hm;
            let got = eig(m as i32);
            assert!((got - want).norm() < 1e-12, "m={m}: {got} vs {want}");
        }
    }

    #[test]
    fn mk_split_reconstructs() {
        let p = at(&ParametricCurve::new(Shape::Kite), 4.0, 1.0, 2.5);
        let delta = wrap(1.0 - 2.5);
        let f = p.m.value(delta);
        let (c1, c2) = mk_split(f, p.m.log_coeff, delta);
        let back = c1 * (4.0 * (0.5 * delta).sin().powi(2)).ln() + c2;
        assert!((back - f).norm() < 1e-14);
    }

    #[test]
    fn near_branch_series_matches_direct() {
        for z in [0.5, 1.0, 1.9, 2.0] {
            let c = cylinder01(z);
            assert!((zj0_minus_2j1(z) - (z * c.j0 - 2.0 * c.j1)).abs() < 1e-14);
        }
        let z: f64 = 1e-3;
        let want = -z.powi(3) / 8.0 + z.powi(5) / 96.0;
        assert!((zj0_minus_2j1(z) - want).abs() < 1e-14 * want.abs());
    }
}
