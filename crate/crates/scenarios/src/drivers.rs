//! Single solves, sweeps and near-field grids.

use crate::config::{Reference, Scenario};
use crate::output::{num, write_csv, write_text, Report};
use crate::{Error, Result};
use scfie_core::assemble::default_diff;
use scfie_core::{assemble, far_field, farfield_error, near_grid, FarField, FieldGrid, Layout, Method, Scene, SolveReport};
use std::path::PathBuf;
use std::time::Instant;

/// One assembled and solved system.
pub struct Solved {
    pub layout: Layout,
    pub report: SolveReport,
    pub assembly_secs: f64,
    pub solve_secs: f64,
}

impl Solved {
    pub fn far_field(&self, n_dirs: usize) -> FarField {
        far_field(&self.layout, &self.report.solution, n_dirs)
    }

    fn check(&self) -> Result<()> {
        if self.report.converged {
            Ok(())
        } else {
            Err(Error::NotConverged { iterations: self.report.iterations, residual: self.report.final_residual() })
        }
    }
}

/// Assembles and solves `scenario` with the given method and nodes per curve.
pub fn solve_with(scenario: &Scenario, method: Method, n: usize) -> Result<Solved> {
    let disc = scenario.discretization(method, n)?;
    let mut scene = Scene::new(scenario.curves(), scenario.k);
    scene.eta = scenario.eta;
    let layout = Layout::new(scene, disc)?;
    let diff = scenario.diff.unwrap_or_else(|| default_diff(&layout.disc));
    let t0 = Instant::now();
    let system = assemble(scenario.problem(), &layout, diff, &scenario.incident)?;
    let assembly_secs = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let report = system.solve_gmres(scenario.gmres_tol, scenario.max_iter);
    let solve_secs = t1.elapsed().as_secs_f64();
    Ok(Solved { layout, report, assembly_secs, solve_secs })
}

pub struct SolveOutcome {
    pub solved: Solved,
    pub far_field: FarField,
    /// Far-field error against the exact solution, for point sources.
    pub exact_error: Option<f64>,
    pub files: Vec<PathBuf>,
}

fn out_path(scenario: &Scenario, suffix: &str) -> PathBuf {
    scenario.output.dir.join(format!("{}_{suffix}", scenario.output.prefix))
}

fn far_field_rows(ff: &FarField) -> impl Iterator<Item = Vec<String>> + '_ {
    ff.angles.iter().zip(&ff.values).map(|(a, v)| vec![num(a.to_degrees()), num(v.re), num(v.im)])
}

/// Solves the scenario and writes `<prefix>_farfield.csv` (angle_deg, re,
/// im), `<prefix>_density.csv` (curve, t, re, im) and `<prefix>_report.txt`.
/// Files are written even when GMRES fails to converge; the error is
/// returned afterwards.
pub fn run_solve(scenario: &Scenario) -> Result<SolveOutcome> {
    let solved = solve_with(scenario, scenario.method, scenario.n)?;
    let ndirs = scenario.output.far_field_dirs;
    let ff = solved.far_field(ndirs);
    let exact_error = match scenario.incident.exact_far_field(scenario.k, ndirs) {
        Some(exact) => Some(farfield_error(&ff, &exact)?),
        None => None,
    };

    let mut files = vec![write_csv(&out_path(scenario, "farfield.csv"), "angle_deg,re,im", far_field_rows(&ff))?];
    let layout = &solved.layout;
    let density = (0..layout.len()).map(|g| {
        let (c, j) = layout.locate(g);
        let v = solved.report.solution[g];
        vec![c.to_string(), num(layout.sets[c].nodes[j].t), num(v.re), num(v.im)]
    });
    files.push(write_csv(&out_path(scenario, "density.csv"), "curve,t,re,im", density)?);

    let mut rep = Report::default();
    rep.line("problem", scenario.problem().name());
    rep.line("method", scenario.method);
    rep.line("nodes_per_curve", scenario.n);
    rep.line("unknowns", layout.len());
    rep.line("k", scenario.k);
    rep.line("eta", scenario.eta);
    rep.line("iterations", solved.report.iterations);
    rep.line("converged", solved.report.converged);
    rep.line("final_residual", format!("{:.6e}", solved.report.final_residual()));
    let hist: Vec<String> = solved.report.residual_history.iter().map(|r| format!("{r:.6e}")).collect();
    rep.line("residual_history", hist.join(" "));
    if let Some(e) = exact_error {
        rep.line("farfield_error_exact", format!("{e:.6e}"));
    }
    rep.line("assembly_seconds", format!("{:.3}", solved.assembly_secs));
    rep.line("solve_seconds", format!("{:.3}", solved.solve_secs));
    files.push(write_text(&out_path(scenario, "report.txt"), rep.text())?);

    solved.check()?;
    Ok(SolveOutcome { solved, far_field: ff, exact_error, files })
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    /// Nodes per curve, or the separation for the pair sweep.
    pub param: f64,
    pub eps_inf: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_secs: f64,
}

pub struct ConvergenceOutcome {
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `log ε` against `log h`.
    pub slope: f64,
    /// Short description of the reference.
    pub reference: String,
    pub files: Vec<PathBuf>,
}

/// Least-squares slope of `log y` against `log x`, over pairs with `y > 0`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(_, v)| **v > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    let m = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    num / den
}

fn reference_far_field(scenario: &Scenario, n_max: usize) -> Result<(FarField, String)> {
    let ndirs = scenario.output.far_field_dirs;
    let exact = scenario.incident.exact_far_field(scenario.k, ndirs);
    match (scenario.convergence.reference, exact) {
        (Reference::Exact | Reference::Auto, Some(ff)) => Ok((ff, "exact".into())),
        (Reference::Exact, None) => Err(Error::Config("convergence.reference: no exact solution".into())),
        _ => {
            let method = scenario.convergence.reference_method.unwrap_or(scenario.method);
            let n_ref = scenario.convergence.reference_multiplier * n_max;
            let s = solve_with(scenario, method, n_ref)?;
            s.check()?;
            Ok((s.far_field(ndirs), format!("{method} with {n_ref} nodes per curve")))
        }
    }
}

/// Far-field errors over `convergence.n_list`, written to
/// `<prefix>_convergence.csv` (n, h, eps_inf, iterations, wall_time).
pub fn run_convergence(scenario: &Scenario) -> Result<ConvergenceOutcome> {
    let n_list = &scenario.convergence.n_list;
    let n_max = *n_list.last().ok_or_else(|| Error::Config("convergence.n_list: required and non-empty".into()))?;
    let (reference, label) = reference_far_field(scenario, n_max)?;
    let mut rows = Vec::new();
    for &n in n_list {
        let t0 = Instant::now();
        let s = solve_with(scenario, scenario.method, n)?;
        let eps = farfield_error(&s.far_field(scenario.output.far_field_dirs), &reference)?;
        rows.push(SweepRow {
            param: n as f64,
            eps_inf: eps,
            iterations: s.report.iterations,
            converged: s.report.converged,
            wall_secs: t0.elapsed().as_secs_f64(),
        });
    }
    let h: Vec<f64> = rows.iter().map(|r| std::f64::consts::TAU / r.param).collect();
    let eps: Vec<f64> = rows.iter().map(|r| r.eps_inf).collect();
    let slope = loglog_slope(&h, &eps);
    let csv = rows.iter().zip(&h).map(|(r, h)| {
        vec![(r.param as usize).to_string(), num(*h), num(r.eps_inf), r.iterations.to_string(), format!("{:.3}", r.wall_secs)]
    });
    let mut files = vec![write_csv(&out_path(scenario, "convergence.csv"), "n,h,eps_inf,iterations,wall_time", csv)?];
    let mut rep = Report::default();
    rep.line("problem", scenario.problem().name());
    rep.line("method", scenario.method);
    rep.line("reference", &label);
    rep.line("slope", format!("{slope:.4}"));
    files.push(write_text(&out_path(scenario, "convergence_report.txt"), rep.text())?);
    finish_sweep(&rows)?;
    Ok(ConvergenceOutcome { rows, slope, reference: label, files })
}

fn finish_sweep(rows: &[SweepRow]) -> Result<()> {
    match rows.iter().find(|r| !r.converged) {
        Some(r) => Err(Error::NotConverged { iterations: r.iterations, residual: f64::NAN }),
        None => Ok(()),
    }
}

/// Far-field errors of the close kite pair against the exact solution for
/// each separation in `convergence.separations`, at the scenario's `n`.
/// Written to `<prefix>_separation.csv` (d, eps_inf, iterations, wall_time).
pub fn run_separation_sweep(scenario: &Scenario) -> Result<(Vec<SweepRow>, PathBuf)> {
    if scenario.convergence.separations.is_empty() {
        return Err(Error::Config("convergence.separations: required and non-empty".into()));
    }
    let ndirs = scenario.output.far_field_dirs;
    let mut rows = Vec::new();
    for &d in &scenario.convergence.separations {
        let s = scenario.with_separation(d)?;
        let exact = s
            .incident
            .exact_far_field(s.k, ndirs)
            .ok_or_else(|| Error::Config("problem.incident: the separation sweep needs pair-sources".into()))?;
        let t0 = Instant::now();
        let solved = solve_with(&s, s.method, s.n)?;
        rows.push(SweepRow {
            param: d,
            eps_inf: farfield_error(&solved.far_field(ndirs), &exact)?,
            iterations: solved.report.iterations,
            converged: solved.report.converged,
            wall_secs: t0.elapsed().as_secs_f64(),
        });
    }
    let csv = rows
        .iter()
        .map(|r| vec![num(r.param), num(r.eps_inf), r.iterations.to_string(), format!("{:.3}", r.wall_secs)]);
    let path = write_csv(&out_path(scenario, "separation.csv"), "d,eps_inf,iterations,wall_time", csv)?;
    finish_sweep(&rows)?;
    Ok((rows, path))
}

pub struct NearfieldOutcome {
    pub grid: FieldGrid,
    /// Largest error against the exact field over unmasked samples.
    pub max_error: Option<f64>,
    pub files: Vec<PathBuf>,
}

/// Solves the scenario and samples the field on the `[nearfield]` grid.
/// Writes `<prefix>_grid.csv` (x, y, re, im, mask) and, for point sources,
/// `<prefix>_error.csv` (x, y, log10_abs_err; NaN on masked samples).
pub fn run_nearfield(scenario: &Scenario) -> Result<NearfieldOutcome> {
    let solved = solve_with(scenario, scenario.method, scenario.n)?;
    solved.check()?;
    let nf = &scenario.nearfield;
    let grid = near_grid(
        &solved.layout,
        &solved.report.solution,
        &scenario.incident,
        nf.bbox,
        nf.resolution,
        nf.smoothed,
        nf.total,
    )?;
    let (nx, ny) = nf.resolution;
    let idx = move |q: usize| (q % nx, q / nx);
    let rows = (0..nx * ny).map(|q| {
        let (ix, iy) = idx(q);
        let p = grid.point(ix, iy);
        let v = grid.values[q];
        vec![num(p.x), num(p.y), num(v.re), num(v.im), u8::from(grid.inside[q]).to_string()]
    });
    let mut files = vec![write_csv(&out_path(scenario, "grid.csv"), "x,y,re,im,mask", rows)?];

    let mut max_error = None;
    if scenario.incident.exact_scattered(scenario.k, grid.point(0, 0)).is_some() {
        let errs: Vec<f64> = (0..nx * ny)
            .map(|q| {
                if grid.inside[q] {
                    return f64::NAN;
                }
                let (ix, iy) = idx(q);
                let p = grid.point(ix, iy);
                let mut exact = scenario.incident.exact_scattered(scenario.k, p).unwrap_or_default();
                if nf.total {
                    exact += scenario.incident.value(scenario.k, p);
                }
                (grid.values[q] - exact).norm()
            })
            .collect();
        max_error = Some(errs.iter().filter(|e| !e.is_nan()).fold(0.0, |a: f64, b| a.max(*b)));
        let rows = errs.iter().enumerate().map(|(q, e)| {
            let (ix, iy) = idx(q);
            let p = grid.point(ix, iy);
            vec![num(p.x), num(p.y), num(e.log10())]
        });
        files.push(write_csv(&out_path(scenario, "error.csv"), "x,y,log10_abs_err", rows)?);
    }
    Ok(NearfieldOutcome { grid, max_error, files })
}
