//! Dense Nyström systems for the smoothed and classical combined field
//! integral equations on one or several obstacles.
//!
//! Every row is linear in the nodal density values. The smoothed
//! formulations also depend on `φ'`, and on the Neumann diagonal on `φ''`,
//! at the collocation node. Those values enter the row through the rows of
//! the differentiation matrices, so the assembled matrix acts on the nodal
//! values alone.

use crate::diffmat::{diff_matrices, DiffMatrices, DiffOrder};
use crate::fields::IncidentField;
use crate::geometry::{nearest_point, GradedMesh, ParametricCurve};
use crate::kernels::{classic_split, green_terms, pair_kernels, wrap, Classic, KernelSplit};
use crate::linalg::{CMatrix, RMatrix};
use crate::linsolve::{gmres, SolveReport};
use crate::quadrature::{Discretization, Method, NodeSet};
use crate::smoothing::{diag_second_derivs, SmoothingAnchor};
use crate::{Error, Result, C64};
use rayon::prelude::*;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Samples seeding the nearest-point search for cross-obstacle anchors.
pub const NEAREST_SEEDS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Problem {
    /// `K∘R_D − S∘R_S = −u^inc`.
    SmoothedDirichlet,
    /// `N∘R_D − K'∘R_S = −∂n u^inc`.
    SmoothedNeumann,
    /// `½φ + Kφ − iηSφ = −u^inc`.
    Dirichlet,
    /// `(iη/2)φ + Nφ − iηK'φ = −∂n u^inc`, with `N` from Maue's formula.
    Neumann,
}

impl Problem {
    pub fn is_neumann(&self) -> bool {
        matches!(self, Problem::SmoothedNeumann | Problem::Neumann)
    }

    pub fn is_smoothed(&self) -> bool {
        matches!(self, Problem::SmoothedDirichlet | Problem::SmoothedNeumann)
    }

    pub fn new(neumann: bool, smoothed: bool) -> Self {
        match (neumann, smoothed) {
            (false, true) => Problem::SmoothedDirichlet,
            (true, true) => Problem::SmoothedNeumann,
            (false, false) => Problem::Dirichlet,
            (true, false) => Problem::Neumann,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Problem::SmoothedDirichlet => "SD-CFIE",
            Problem::SmoothedNeumann => "SN-CFIE",
            Problem::Dirichlet => "D-CFIE",
            Problem::Neumann => "N-CFIE",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().trim_end_matches("-CFIE") {
            "SD" => Ok(Problem::SmoothedDirichlet),
            "SN" => Ok(Problem::SmoothedNeumann),
            "D" => Ok(Problem::Dirichlet),
            "N" => Ok(Problem::Neumann),
            _ => Err(Error::InvalidInput(format!("unknown problem '{s}' (expected SD, SN, D or N)"))),
        }
    }
}

/// Obstacles, wavenumber and coupling parameter.
#[derive(Clone, Debug)]
pub struct Scene {
    pub curves: Vec<ParametricCurve>,
    pub k: f64,
    pub eta: f64,
}

impl Scene {
    /// A scene with the usual coupling `η = k`.
    pub fn new(curves: Vec<ParametricCurve>, k: f64) -> Self {
        Self { curves, k, eta: k }
    }

    pub fn validate(&self) -> Result<()> {
        if self.curves.is_empty() {
            return Err(Error::InvalidInput("at least one obstacle is required".into()));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidInput(format!("wavenumber must be positive, got {}", self.k)));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidInput(format!("eta must be positive, got {}", self.eta)));
        }
        Ok(())
    }
}

/// Node sets of all obstacles under one discretization, and where each
/// obstacle's unknowns start in the global vector.
#[derive(Clone, Debug)]
pub struct Layout {
    pub scene: Scene,
    pub disc: Discretization,
    pub sets: Vec<NodeSet>,
    pub offsets: Vec<usize>,
}

impl Layout {
    pub fn new(scene: Scene, disc: Discretization) -> Result<Self> {
        scene.validate()?;
        if disc.mesh.is_identity() {
            if let Some(c) = scene.curves.iter().find(|c| c.has_corner()) {
                return Err(Error::InvalidInput(format!(
                    "{:?} has a corner and needs a graded mesh (p >= 2)",
                    c.shape
                )));
            }
        }
        let sets: Vec<NodeSet> = scene.curves.iter().map(|c| disc.nodes(c)).collect();
        let offsets = (0..sets.len()).map(|c| c * disc.len()).collect();
        Ok(Self { scene, disc, sets, offsets })
    }

    /// Total number of unknowns.
    pub fn len(&self) -> usize {
        self.sets.len() * self.disc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(curve, local index)` of a global unknown.
    pub fn locate(&self, g: usize) -> (usize, usize) {
        (g / self.disc.len(), g % self.disc.len())
    }

    /// The part of a global vector that belongs to curve `c`.
    pub fn block<'a>(&self, v: &'a [C64], c: usize) -> &'a [C64] {
        let size = self.disc.len();
        &v[self.offsets[c]..self.offsets[c] + size]
    }

    /// Weights `(a_j, b_j)` with `φ(t̄) ≈ Σ a_j φ_j` and `φ'(t̄) ≈ Σ b_j φ_j`
    /// on one curve. Trigonometric interpolation on uniform grids; four-point
    /// Lagrange interpolation in the integration variable on graded grids.
    pub fn interpolation_weights(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        interpolation_weights(&self.disc, t)
    }
}

/// See [`Layout::interpolation_weights`].
pub fn interpolation_weights(disc: &Discretization, t: f64) -> (Vec<f64>, Vec<f64>) {
    let size = disc.len();
    let n = disc.n;
    let h = disc.h();
    let mut a = vec![0.0; size];
    let mut b = vec![0.0; size];
    match disc.mesh {
        GradedMesh::Identity => {
            let nf = size as f64;
            for j in 0..size {
                let theta = wrap(t - j as f64 * h);
                if theta == 0.0 {
                    a[j] = 1.0;
                    continue;
                }
                let half = 0.5 * theta;
                if theta.abs() < 1e-3 {
                    // Direct sums avoid the cancellation in the closed form.
                    let mut v = 1.0 + (n as f64 * theta).cos();
                    let mut d = -(n as f64) * (n as f64 * theta).sin();
                    for m in 1..n {
                        let mf = m as f64;
                        v += 2.0 * (mf * theta).cos();
                        d -= 2.0 * mf * (mf * theta).sin();
                    }
                    a[j] = v / nf;
                    b[j] = d / nf;
                } else {
                    let (sn, cn) = (n as f64 * theta).sin_cos();
                    let cot = half.cos() / half.sin();
                    a[j] = sn * cot / nf;
                    b[j] = (n as f64 * cn * cot - sn / (2.0 * half.sin().powi(2))) / nf;
                }
            }
        }
        GradedMesh::Kress { .. } => {
            let s = disc.mesh.inverse(t.rem_euclid(TAU));
            let w1 = disc.mesh.eval(s).w1;
            // Nodes sit at (j + ½)h.
            let x = s / h - 0.5;
            let j0 = x.floor() as isize;
            let stencil: Vec<isize> = (j0 - 1..=j0 + 2).collect();
            for (q, &jq) in stencil.iter().enumerate() {
                let xq = jq as f64;
                let mut val = 1.0;
                let mut der = 0.0;
                for (r, &jr) in stencil.iter().enumerate() {
                    if r == q {
                        continue;
                    }
                    val *= (x - jr as f64) / (xq - jr as f64);
                    let mut term = 1.0 / (xq - jr as f64);
                    for (u, &ju) in stencil.iter().enumerate() {
                        if u != q && u != r {
                            term *= (x - ju as f64) / (xq - ju as f64);
                        }
                    }
                    der += term;
                }
                let idx = jq.rem_euclid(size as isize) as usize;
                a[idx] += val;
                // dψ/ds = der/h, φ' = ψ'/w'. At the corner itself w' = 0
                // and the derivative term is dropped.
                if w1 > 1e-10 {
                    b[idx] += der / (h * w1);
                }
            }
        }
    }
    (a, b)
}

/// An assembled dense system.
#[derive(Clone, Debug)]
pub struct DiscreteSystem {
    pub layout: Layout,
    pub problem: Problem,
    pub diff: DiffOrder,
    pub matrix: CMatrix,
    pub rhs: Vec<C64>,
}

impl DiscreteSystem {
    pub fn solve_gmres(&self, tol: f64, max_iter: usize) -> SolveReport {
        let m = &self.matrix;
        gmres(|v| par_matvec(m, v), &self.rhs, tol, max_iter)
    }

    pub fn solve_direct(&self) -> Result<Vec<C64>> {
        self.matrix.solve(&self.rhs)
    }
}

fn par_matvec(m: &CMatrix, v: &[C64]) -> Vec<C64> {
    (0..m.rows)
        .into_par_iter()
        .map(|i| m.row(i).iter().zip(v).fold(ZERO, |acc, (a, b)| acc + a * b))
        .collect()
}

/// Default differentiation for a discretization: fourth-order differences
/// for the trapezoidal rule and on graded meshes, spectral otherwise.
///
/// On a graded mesh `φ' = ψ'/w'` divides by a vanishing `w'` near the corner.
/// Global interpolation of `ψ`, which is only finitely smooth across the
/// corner, then spreads an error that makes the Neumann systems stall.
pub fn default_diff(disc: &Discretization) -> DiffOrder {
    match disc.method {
        Method::Tr => DiffOrder::Fd4,
        _ if !disc.mesh.is_identity() => DiffOrder::Fd4,
        _ => DiffOrder::Spectral,
    }
}

/// Assemble the system matrix and the right-hand side `−u^inc` (Dirichlet)
/// or `−∂n u^inc` (Neumann) at the nodes.
pub fn assemble(problem: Problem, layout: &Layout, diff: DiffOrder, incident: &IncidentField) -> Result<DiscreteSystem> {
    let matrix = assemble_matrix(problem, layout, diff)?;
    let rhs = rhs(problem, layout, incident);
    Ok(DiscreteSystem { layout: layout.clone(), problem, diff, matrix, rhs })
}

pub fn rhs(problem: Problem, layout: &Layout, incident: &IncidentField) -> Vec<C64> {
    let k = layout.scene.k;
    layout
        .sets
        .iter()
        .flat_map(|set| set.nodes.iter())
        .map(|nd| {
            if problem.is_neumann() {
                -incident.normal_derivative(k, nd.jet.point, nd.jet.normal)
            } else {
                -incident.value(k, nd.jet.point)
            }
        })
        .collect()
}

pub fn assemble_matrix(problem: Problem, layout: &Layout, diff: DiffOrder) -> Result<CMatrix> {
    let disc = &layout.disc;
    if !problem.is_smoothed() && disc.method == Method::Tr {
        return Err(Error::InvalidInput(format!(
            "{problem} has a logarithmic diagonal singularity; use MK, KR6 or KR10 instead of TR"
        )));
    }
    let size = disc.len();
    let dm = diff_matrices(diff, size, &disc.mesh, &disc.params());
    let maue = if problem == Problem::Neumann {
        layout.sets.iter().map(|set| maue_tangential(layout, set, &dm)).collect()
    } else {
        Vec::new()
    };
    let ctx = Ctx { problem, layout, dm, maue };
    let total = layout.len();
    let mut matrix = CMatrix::zeros(total, total);
    matrix.data.par_chunks_mut(total).enumerate().for_each(|(g, row)| ctx.fill_row(g, row));
    Ok(matrix)
}

struct Ctx<'a> {
    problem: Problem,
    layout: &'a Layout,
    dm: DiffMatrices,
    /// `D1·S0·D1` per curve (classic Neumann only).
    maue: Vec<CMatrix>,
}

impl Ctx<'_> {
    fn fill_row(&self, g: usize, row: &mut [C64]) {
        let (c, i) = self.layout.locate(g);
        let size = self.layout.disc.len();
        for b in 0..self.layout.sets.len() {
            let off = self.layout.offsets[b];
            let part = &mut row[off..off + size];
            match (b == c, self.problem.is_smoothed()) {
                (true, true) => self.self_smoothed(c, i, part),
                (true, false) => self.self_classic(c, i, part),
                (false, smoothed) => self.cross(c, i, b, part, smoothed),
            }
        }
    }

    fn add_row(out: &mut [C64], coef: C64, m: &RMatrix, i: usize) {
        if coef == ZERO {
            return;
        }
        for (o, v) in out.iter_mut().zip(m.row(i)) {
            *o += coef * v;
        }
    }

    fn self_smoothed(&self, c: usize, i: usize, row: &mut [C64]) {
        let layout = self.layout;
        let disc = &layout.disc;
        let (k, eta) = (layout.scene.k, layout.scene.eta);
        let ie = C64::new(0.0, eta);
        let neumann = self.problem.is_neumann();
        let set = &layout.sets[c];
        let nd = &set.nodes[i];
        let sp = nd.jet.speed;
        let anchor = SmoothingAnchor::new(&nd.jet, k, eta);
        let (mut c0, mut c1) = (ZERO, ZERO);
        for (j, ndj) in set.nodes.iter().enumerate() {
            if j == i {
                continue;
            }
            let delta = wrap(nd.t - ndj.t);
            let pk = pair_kernels(k, &nd.jet, &ndj.jet, delta);
            let (ka, kb) = if neumann { (pk.h, pk.w) } else { (pk.l, pk.m) };
            let (wf, wl) = disc.pair_weights(i, j);
            let weigh = |s: &KernelSplit| (s.value(delta) * wf + s.log_coeff * wl) * ndj.mesh.w1;
            let (a, b) = (weigh(&ka), weigh(&kb));
            let sv = anchor.eval(ndj.jet.point, ndj.jet.normal);
            row[j] += a - ie * b;
            c0 -= a * sv.p0 - b * sv.dn_p0;
            c1 -= a * sv.p1 - b * sv.dn_p1;
        }
        c1 /= sp;
        row[i] += c0;
        // Diagonal of the hypersingular integrand: H0(t,t)/2 · ρ_D''(t).
        let (mut c1d, mut c2d) = (ZERO, ZERO);
        if neumann && matches!(disc.method, Method::Tr | Method::Mk) {
            let d = C64::new(disc.h() * nd.mesh.w1 / (2.0 * TAU * sp), 0.0);
            let (p0dd, p1dd) = diag_second_derivs(&anchor, &nd.jet);
            row[i] -= d * p0dd;
            c1d = -d * p1dd / sp;
            c2d = d;
        }
        Self::add_row(row, c1 + c1d, &self.dm.d1, i);
        Self::add_row(row, c2d, &self.dm.d2, i);
    }

    fn self_classic(&self, c: usize, i: usize, row: &mut [C64]) {
        let layout = self.layout;
        let disc = &layout.disc;
        let (k, eta) = (layout.scene.k, layout.scene.eta);
        let ie = C64::new(0.0, eta);
        let set = &layout.sets[c];
        let nd = &set.nodes[i];
        let neumann = self.problem.is_neumann();
        let combined = |jt, jtau, delta| -> KernelSplit {
            if neumann {
                classic_split(k, jt, jtau, delta, Classic::KPrime)
                    .scale(-ie)
                    .add(&classic_split(k, jt, jtau, delta, Classic::MaueNormal))
            } else {
                classic_split(k, jt, jtau, delta, Classic::K).add(&classic_split(k, jt, jtau, delta, Classic::S).scale(-ie))
            }
        };
        for (j, ndj) in set.nodes.iter().enumerate() {
            if j == i {
                continue;
            }
            let delta = wrap(nd.t - ndj.t);
            let s = combined(&nd.jet, &ndj.jet, delta);
            let (wf, wl) = disc.pair_weights(i, j);
            row[j] += (s.value(delta) * wf + s.log_coeff * wl) * ndj.mesh.w1;
        }
        if disc.method == Method::Mk {
            let s = combined(&nd.jet, &nd.jet, 0.0);
            row[i] += diag_mk(disc, &s, nd.mesh.w1);
        }
        row[i] += if neumann { 0.5 * ie } else { C64::new(0.5, 0.0) };
        if neumann {
            let m = &self.maue[c];
            for (o, v) in row.iter_mut().zip(m.row(i)) {
                *o += v / nd.jet.speed;
            }
        }
    }

    fn cross(&self, c: usize, i: usize, b: usize, row: &mut [C64], smoothed: bool) {
        let layout = self.layout;
        let (k, eta) = (layout.scene.k, layout.scene.eta);
        let ie = C64::new(0.0, eta);
        let neumann = self.problem.is_neumann();
        let h = layout.disc.h();
        let nd = &layout.sets[c].nodes[i];
        let (x, nx) = (nd.jet.point, nd.jet.normal);
        let set = &layout.sets[b];
        let anchor = smoothed.then(|| {
            let tb = nearest_point(&set.curve, x, NEAREST_SEEDS.max(set.len()));
            let jb = set.curve.jet(tb);
            (SmoothingAnchor::new(&jb, k, eta), jb.speed, tb)
        });
        let (mut s0, mut s1) = (ZERO, ZERO);
        for (j, ndj) in set.nodes.iter().enumerate() {
            let g = green_terms(k, x, nx, ndj.jet.point, ndj.jet.normal);
            let wgt = h * ndj.mesh.w1 * ndj.jet.speed;
            let (a, bb) = if neumann { (g[3] * wgt, g[2] * wgt) } else { (g[1] * wgt, g[0] * wgt) };
            row[j] += a - ie * bb;
            if let Some((anc, _, _)) = &anchor {
                let sv = anc.eval(ndj.jet.point, ndj.jet.normal);
                s0 -= a * sv.p0 - bb * sv.dn_p0;
                s1 -= a * sv.p1 - bb * sv.dn_p1;
            }
        }
        if let Some((_, speed, tb)) = anchor {
            let (wa, wb) = interpolation_weights(&layout.disc, tb);
            let s1 = s1 / speed;
            for j in 0..row.len() {
                row[j] += s0 * wa[j] + s1 * wb[j];
            }
        }
    }
}

/// MK diagonal weight `w'·(R_0·F1/2 + h·(F2 + F1 log w'))` for a kernel with
/// diagonal split `F1 log|t−τ| + F2`.
fn diag_mk(disc: &Discretization, s: &KernelSplit, w1: f64) -> C64 {
    w1 * (disc.mk_r0() * 0.5 * s.log_coeff + disc.h() * (s.smooth + s.log_coeff * w1.ln()))
}

/// The tangential part of Maue's formula on one curve, `D1·S0·D1`, where
/// `S0` is the quadrature matrix of `G` acting on `φ'(τ) dτ`.
fn maue_tangential(layout: &Layout, set: &NodeSet, dm: &DiffMatrices) -> CMatrix {
    let disc = &layout.disc;
    let k = layout.scene.k;
    let size = set.len();
    let mut s0 = CMatrix::zeros(size, size);
    s0.data.par_chunks_mut(size).enumerate().for_each(|(i, row)| {
        let nd = &set.nodes[i];
        for (j, ndj) in set.nodes.iter().enumerate() {
            if j == i {
                if disc.method == Method::Mk {
                    let s = classic_split(k, &nd.jet, &nd.jet, 0.0, Classic::MaueTangential);
                    row[i] = diag_mk(disc, &s, nd.mesh.w1);
                }
                continue;
            }
            let delta = wrap(nd.t - ndj.t);
            let s = classic_split(k, &nd.jet, &ndj.jet, delta, Classic::MaueTangential);
            let (wf, wl) = disc.pair_weights(i, j);
            row[j] = (s.value(delta) * wf + s.log_coeff * wl) * ndj.mesh.w1;
        }
    });
    let inner = mul_cr(&s0, &dm.d1);
    mul_rc(&dm.d1, &inner)
}

/// Complex times real.
fn mul_cr(a: &CMatrix, b: &RMatrix) -> CMatrix {
    let n = b.n;
    let mut out = CMatrix::zeros(a.rows, n);
    out.data.par_chunks_mut(n).enumerate().for_each(|(i, orow)| {
        for (q, &aiq) in a.row(i).iter().enumerate() {
            if aiq == ZERO {
                continue;
            }
            for (o, v) in orow.iter_mut().zip(b.row(q)) {
                *o += aiq * v;
            }
        }
    });
    out
}

/// Real times complex.
fn mul_rc(a: &RMatrix, b: &CMatrix) -> CMatrix {
    let n = b.cols;
    let mut out = CMatrix::zeros(a.n, n);
    out.data.par_chunks_mut(n).enumerate().for_each(|(i, orow)| {
        for (q, &aiq) in a.row(i).iter().enumerate() {
            if aiq == 0.0 {
                continue;
            }
            for (o, v) in orow.iter_mut().zip(b.row(q)) {
                *o += v * aiq;
            }
        }
    });
    out
}
