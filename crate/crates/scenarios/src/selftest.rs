//! Invariant suites run by `scfie selftest`, one `SUITE name PASS|FAIL` line
//! each.

use scfie_core::assemble::assemble_matrix;
use scfie_core::diffmat::uniform;
use scfie_core::kernels::{green_terms, pair_kernels, wrap};
use scfie_core::quadrature::mk_weights;
use scfie_core::specfun::cylinder01;
use scfie_core::*;
use std::f64::consts::{PI, TAU};

#[derive(Clone, Copy, Debug, Default)]
pub struct SelftestOptions {
    /// Adds `delta` to the MK weight `R_l` in the MK suites.
    pub mk_perturbation: Option<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SUITE {} {}", self.name, if self.passed { "PASS" } else { "FAIL" })
    }
}

fn suite(name: &'static str, worst: f64, tol: f64) -> SuiteResult {
    SuiteResult { name, passed: worst <= tol, detail: format!("worst {worst:.3e}, tolerance {tol:.1e}") }
}

/// Halton-style points, so the suites are deterministic without an RNG.
fn van_der_corput(i: usize, base: usize) -> f64 {
    let (mut f, mut r, mut i) = (1.0, 0.0, i + 1);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn wronskian() -> SuiteResult {
    let n = 1000;
    let (a, b) = (1e-6f64.ln(), 500f64.ln());
    let worst = (0..n)
        .map(|i| {
            let x = (a + (b - a) * i as f64 / (n - 1) as f64).exp();
            let c = cylinder01(x);
            let want = 2.0 / (PI * x);
            ((c.j1 * c.y0 - c.j0 * c.y1 - want) / want).abs()
        })
        .fold(0.0, f64::max);
    suite("wronskian", worst, 1e-11)
}

fn differentiation() -> SuiteResult {
    let mut worst: f64 = 0.0;
    for size in [16usize, 64] {
        let m = uniform(DiffOrder::Spectral, size);
        let t: Vec<f64> = (0..size).map(|j| TAU * j as f64 / size as f64).collect();
        let top = (size / 2 - 1) as f64;
        let f: Vec<f64> = t.iter().map(|x| (top * x).sin() + (2.0 * x).cos()).collect();
        let d1 = m.d1.apply(&f);
        let d2 = m.d2.apply(&f);
        for q in 0..size {
            let x = t[q];
            let e1 = d1[q] - (top * (top * x).cos() - 2.0 * (2.0 * x).sin());
            let e2 = d2[q] - (-top * top * (top * x).sin() - 4.0 * (2.0 * x).cos());
            worst = worst.max(e1.abs() / top).max(e2.abs() / (top * top));
        }
    }
    suite("differentiation", worst, 1e-10)
}

fn discretization(method: Method, n: usize, opts: &SelftestOptions) -> Discretization {
    let mut d = Discretization::new(method, n, GradedMesh::Identity).expect("valid selftest discretization");
    if let (Method::Mk, Some((l, delta))) = (method, opts.mk_perturbation) {
        d.perturb_mk_weight(l, delta);
    }
    d
}

/// Symmetric weights and exact integration of `log(4 sin²(τ/2)) cos(mτ)`.
fn mk_weight_suite(opts: &SelftestOptions) -> SuiteResult {
    let n = 16;
    let r = mk_weights(n);
    let mut worst: f64 = 0.0;
    for l in 1..2 * n {
        worst = worst.max((r[l] - r[2 * n - l]).abs());
    }
    let d = discretization(Method::Mk, n, opts);
    let h = d.h();
    for m in 0..n {
        // Σ_j (2·wl_j + h·log 4sin²) cos(m τ_j) + R_0 = ∫ log(4 sin²(τ/2)) cos(mτ) dτ.
        let mut s = d.mk_r0();
        for j in 1..2 * n {
            let tau = j as f64 * h;
            let (_, wl) = d.pair_weights(0, j);
            let lg = (4.0 * (0.5 * tau).sin().powi(2)).ln();
            s += (2.0 * wl + h * lg) * (m as f64 * tau).cos();
        }
        let want = if m == 0 { 0.0 } else { -TAU / m as f64 };
        worst = worst.max((s - want).abs());
    }
    suite("mk-weights", worst, 1e-12)
}

fn kr_zero_diagonal() -> SuiteResult {
    let mut worst: f64 = 0.0;
    for m in [Method::Kr6, Method::Kr10] {
        let d = Discretization::new(m, 32, GradedMesh::Identity).expect("valid KR grid");
        let size = d.len();
        worst = worst.max(d.pair_weights(5, 5).0.abs());
        for l in 1..size {
            worst = worst.max((d.pair_weights(0, l).0 - d.pair_weights(0, size - l).0).abs());
        }
    }
    suite("kr-zero-diagonal", worst, 0.0)
}

fn kernel_split() -> SuiteResult {
    let mut worst: f64 = 0.0;
    for curve in [ParametricCurve::new(Shape::Kite), ParametricCurve::new(Shape::Ellipse { a: 1.0, b: 0.4 })] {
        for k in [1.0, 4.0, 16.0] {
            for i in 0..200 {
                let t = TAU * van_der_corput(i, 2);
                let tau = TAU * van_der_corput(i, 3);
                let delta = wrap(t - tau);
                if delta.abs() < 1e-3 {
                    continue;
                }
                let (jt, js) = (curve.jet(t), curve.jet(tau));
                let p = pair_kernels(k, &jt, &js, delta);
                let [g, gy, gx, gxy] = green_terms(k, jt.point, jt.normal, js.point, js.normal);
                let sp = js.speed;
                let pairs = [(p.l.value(delta), gy * sp), (p.m.value(delta), g * sp), (p.h.value(delta), gxy * sp), (p.w.value(delta), gx * sp)];
                for (got, want) in pairs {
                    worst = worst.max((got - want).norm() / want.norm().max(1.0));
                }
            }
        }
    }
    suite("kernel-split", worst, 1e-11)
}

fn winding_mask() -> SuiteResult {
    let circle = ParametricCurve::new(Shape::Circle { radius: 1.0 });
    let mut wrong = 0usize;
    for i in 0..1000 {
        let r = Vec2::new(4.0 * van_der_corput(i, 2) - 2.0, 4.0 * van_der_corput(i, 3) - 2.0);
        if (r.norm() - 1.0).abs() < 1e-9 {
            continue;
        }
        if circle.contains(r) != (r.norm() < 1.0) {
            wrong += 1;
        }
    }
    SuiteResult { name: "winding-mask", passed: wrong == 0, detail: format!("{wrong} of 1000 misclassified") }
}

/// Point source at the centre of the unit circle: the far field is known.
fn mk_convergence(opts: &SelftestOptions) -> SuiteResult {
    let k = 3.0;
    let inc = IncidentField::point_source(Vec2::new(0.0, 0.0), -1.0);
    let exact = inc.exact_far_field(k, 64).expect("point sources have an exact far field");
    let mut worst: f64 = 0.0;
    for p in [Problem::SmoothedDirichlet, Problem::SmoothedNeumann] {
        let layout = Layout::new(
            Scene::new(vec![ParametricCurve::new(Shape::Circle { radius: 1.0 })], k),
            discretization(Method::Mk, 32, opts),
        )
        .expect("valid selftest layout");
        let err = assemble(p, &layout, DiffOrder::Spectral, &inc)
            .map(|s| far_field(&layout, &s.solve_gmres(1e-13, 200).solution, 64))
            .and_then(|ff| farfield_error(&ff, &exact))
            .unwrap_or(f64::INFINITY);
        worst = worst.max(err);
    }
    suite("mk-convergence", worst, 1e-8)
}

/// Smoothed and classic MK operators agree on a plane-wave trace.
fn operator_identities(opts: &SelftestOptions) -> SuiteResult {
    let k = 4.0;
    let layout = Layout::new(Scene::new(vec![ParametricCurve::new(Shape::Kite)], k), discretization(Method::Mk, 32, opts))
        .expect("valid selftest layout");
    let inc = IncidentField::plane_wave(0.3);
    let trace: Vec<C64> = layout.sets[0].nodes.iter().map(|nd| inc.value(k, nd.jet.point)).collect();
    let mut worst: f64 = 0.0;
    for (a, b, tol) in [(Problem::SmoothedDirichlet, Problem::Dirichlet, 1e-6), (Problem::SmoothedNeumann, Problem::Neumann, 1e-5)] {
        let (Ok(ma), Ok(mb)) = (assemble_matrix(a, &layout, DiffOrder::Spectral), assemble_matrix(b, &layout, DiffOrder::Spectral))
        else {
            return SuiteResult { name: "operator-identities", passed: false, detail: "assembly failed".into() };
        };
        let (va, vb) = (ma.matvec(&trace), mb.matvec(&trace));
        let diff = va.iter().zip(&vb).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        worst = worst.max(diff / tol);
    }
    suite("operator-identities", worst, 1.0)
}

pub fn run_selftest(opts: &SelftestOptions) -> Vec<SuiteResult> {
    vec![
        wronskian(),
        differentiation(),
        mk_weight_suite(opts),
        kr_zero_diagonal(),
        kernel_split(),
        winding_mask(),
        mk_convergence(opts),
        operator_identities(opts),
    ]
}
