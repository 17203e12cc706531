//! Scenario files.
//!
//! A scenario is a TOML file with the sections `[obstacle.N]` (one per
//! obstacle, `N = 1, 2, …`), `[problem]`, `[discretization]` and `[output]`,
//! plus optional `[convergence]` and `[nearfield]` sections for the sweep and
//! grid drivers. `[close_pair]` replaces the obstacle list by two mirrored
//! kites a distance `separation` apart.
//!
//! ```toml
//! [obstacle.1]
//! shape = "kite"
//!
//! [problem]
//! bc = "dirichlet"
//! formulation = "smoothed"
//! k = 4.0
//! incident = "plane-wave"
//! angle_deg = 0.0
//!
//! [discretization]
//! method = "MK"
//! n = 120
//!
//! [output]
//! dir = "out"
//! prefix = "kite"
//! ```

use crate::{Error, Result};
use scfie_core::fields::PointSource;
use scfie_core::{BBox, DiffOrder, Discretization, GradedMesh, IncidentField, Method, ParametricCurve, Problem, Shape, Vec2};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bc {
    Dirichlet,
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    Smoothed,
    Classic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObstacleSpec {
    pub shape: Shape,
    pub offset: Vec2,
    pub mirror: bool,
}

impl ObstacleSpec {
    pub fn curve(&self) -> ParametricCurve {
        ParametricCurve::with_transform(self.shape, self.offset, self.mirror)
    }
}

/// What convergence errors are measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reference {
    /// The exact far field when the incident field provides one, otherwise
    /// a refined solve.
    Auto,
    Exact,
    SelfConvergence,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceSpec {
    /// Nodes per curve, increasing.
    pub n_list: Vec<usize>,
    /// The self-reference uses `reference_multiplier × max(n_list)` nodes.
    pub reference_multiplier: usize,
    /// Quadrature for the self-reference; the scenario's method if unset.
    pub reference_method: Option<Method>,
    pub reference: Reference,
    /// Separations for the close-pair sweep.
    pub separations: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NearfieldSpec {
    pub bbox: BBox,
    pub resolution: (usize, usize),
    pub smoothed: bool,
    pub total: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub prefix: String,
    pub far_field_dirs: usize,
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub obstacles: Vec<ObstacleSpec>,
    /// Set when the obstacles are the close kite pair.
    pub pair_separation: Option<f64>,
    pub bc: Bc,
    pub formulation: Formulation,
    pub method: Method,
    /// Nodes per curve.
    pub n: usize,
    /// Kress grading exponent, 0 for a uniform mesh.
    pub mesh_p: u32,
    pub diff: Option<DiffOrder>,
    pub k: f64,
    pub eta: f64,
    pub incident: IncidentField,
    pub gmres_tol: f64,
    pub max_iter: usize,
    pub output: OutputSpec,
    pub convergence: ConvergenceSpec,
    pub nearfield: NearfieldSpec,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub method: Option<String>,
    pub k: Option<f64>,
    pub eta: Option<f64>,
    pub bc: Option<String>,
    pub formulation: Option<String>,
    pub mesh_p: Option<u32>,
    pub gmres_tol: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub prefix: Option<String>,
    pub n_list: Option<Vec<usize>>,
    pub reference_multiplier: Option<usize>,
    pub separations: Option<Vec<f64>>,
    pub resolution: Option<(usize, usize)>,
    pub bbox: Option<[f64; 4]>,
    pub plain: bool,
    pub total: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    obstacle: BTreeMap<String, RawObstacle>,
    close_pair: Option<RawPair>,
    #[serde(default)]
    problem: RawProblem,
    #[serde(default)]
    discretization: RawDiscretization,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    convergence: RawConvergence,
    #[serde(default)]
    nearfield: RawNearfield,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObstacle {
    shape: String,
    radius: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    offset: Option<[f64; 2]>,
    #[serde(default)]
    mirror: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    separation: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    bc: Option<String>,
    formulation: Option<String>,
    k: Option<f64>,
    eta: Option<f64>,
    incident: Option<String>,
    angle_deg: Option<f64>,
    sources: Option<Vec<[f64; 3]>>,
    gmres_tol: Option<f64>,
    max_iter: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiscretization {
    method: Option<String>,
    n: Option<usize>,
    mesh_p: Option<u32>,
    diff: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    prefix: Option<String>,
    far_field_dirs: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConvergence {
    n_list: Option<Vec<usize>>,
    reference_multiplier: Option<usize>,
    reference_method: Option<String>,
    reference: Option<String>,
    separations: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNearfield {
    bbox: Option<[f64; 4]>,
    resolution: Option<[usize; 2]>,
    smoothed: Option<bool>,
    total: Option<bool>,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be a positive number, got {v}")))
    }
}

/// The two kites of the close-obstacle experiment, `d` apart along `x`.
pub fn kite_pair(d: f64) -> Vec<ObstacleSpec> {
    vec![
        ObstacleSpec { shape: Shape::Kite, offset: Vec2::new(-1.0 - 0.5 * d, 0.0), mirror: false },
        ObstacleSpec { shape: Shape::Kite, offset: Vec2::new(1.0 + 0.5 * d, 0.0), mirror: true },
    ]
}

/// Point sources at the kite centres `∓(1 + d/2, 0)`, both with sign −1.
pub fn pair_sources(d: f64) -> IncidentField {
    IncidentField::PointSources(
        kite_pair(d).iter().map(|o| PointSource { location: o.offset, sign: -1.0 }).collect(),
    )
}

fn parse_shape(field: &str, o: &RawObstacle) -> Result<Shape> {
    let shape = match o.shape.to_ascii_lowercase().as_str() {
        "circle" => Shape::Circle { radius: positive(&format!("{field}.radius"), o.radius.unwrap_or(1.0))? },
        "ellipse" => {
            let a = o.a.ok_or_else(|| invalid(&format!("{field}.a"), "required for an ellipse"))?;
            let b = o.b.ok_or_else(|| invalid(&format!("{field}.b"), "required for an ellipse"))?;
            Shape::Ellipse { a: positive(&format!("{field}.a"), a)?, b: positive(&format!("{field}.b"), b)? }
        }
        "kite" => Shape::Kite,
        "drop" => Shape::Drop,
        "boomerang" => Shape::Boomerang,
        other => {
            return Err(invalid(
                &format!("{field}.shape"),
                format!("unknown shape '{other}' (expected circle, ellipse, kite, drop or boomerang)"),
            ))
        }
    };
    let used_radius = matches!(shape, Shape::Circle { .. });
    let used_ab = matches!(shape, Shape::Ellipse { .. });
    if o.radius.is_some() && !used_radius {
        return Err(invalid(&format!("{field}.radius"), "only applies to circles"));
    }
    if (o.a.is_some() || o.b.is_some()) && !used_ab {
        return Err(invalid(&format!("{field}.a"), "only applies to ellipses"));
    }
    Ok(shape)
}

fn parse_diff(field: &str, s: &str) -> Result<DiffOrder> {
    match s.to_ascii_lowercase().as_str() {
        "spectral" => Ok(DiffOrder::Spectral),
        "fd4" => Ok(DiffOrder::Fd4),
        other => Err(invalid(field, format!("unknown differentiation '{other}' (expected spectral or fd4)"))),
    }
}

fn parse_method(field: &str, s: &str) -> Result<Method> {
    s.parse().map_err(|e: scfie_core::Error| invalid(field, e))
}

impl Scenario {
    pub fn load(path: &Path, ov: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, ov)
    }

    pub fn from_toml_str(text: &str, ov: &Overrides) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_raw(raw, ov)
    }

    fn from_raw(raw: RawConfig, ov: &Overrides) -> Result<Self> {
        let (obstacles, pair_separation) = match (&raw.close_pair, raw.obstacle.is_empty()) {
            (Some(_), false) => {
                return Err(invalid("close_pair", "cannot be combined with [obstacle.N] sections"));
            }
            (Some(p), true) => (kite_pair(positive("close_pair.separation", p.separation)?), Some(p.separation)),
            (None, _) => {
                let mut keyed = Vec::new();
                for (key, o) in &raw.obstacle {
                    let field = format!("obstacle.{key}");
                    let idx: usize = key
                        .parse()
                        .ok()
                        .filter(|i| *i > 0)
                        .ok_or_else(|| invalid(&field, "obstacle sections are numbered 1, 2, …"))?;
                    let shape = parse_shape(&field, o)?;
                    let [ox, oy] = o.offset.unwrap_or([0.0, 0.0]);
                    if !(ox.is_finite() && oy.is_finite()) {
                        return Err(invalid(&format!("{field}.offset"), "must be finite"));
                    }
                    keyed.push((idx, ObstacleSpec { shape, offset: Vec2::new(ox, oy), mirror: o.mirror }));
                }
                keyed.sort_by_key(|(i, _)| *i);
                (keyed.into_iter().map(|(_, o)| o).collect::<Vec<_>>(), None)
            }
        };
        if obstacles.is_empty() {
            return Err(invalid("obstacle", "at least one [obstacle.N] section is required"));
        }

        let p = &raw.problem;
        let bc = match ov.bc.as_deref().or(p.bc.as_deref()).unwrap_or("dirichlet").to_ascii_lowercase().as_str() {
            "dirichlet" | "d" => Bc::Dirichlet,
            "neumann" | "n" => Bc::Neumann,
            other => return Err(invalid("problem.bc", format!("unknown boundary condition '{other}'"))),
        };
        let formulation =
            match ov.formulation.as_deref().or(p.formulation.as_deref()).unwrap_or("smoothed").to_ascii_lowercase().as_str() {
                "smoothed" => Formulation::Smoothed,
                "classic" => Formulation::Classic,
                other => return Err(invalid("problem.formulation", format!("unknown formulation '{other}'"))),
            };
        let k = positive("problem.k", ov.k.or(p.k).ok_or_else(|| invalid("problem.k", "required"))?)?;
        let eta = positive("problem.eta", ov.eta.or(p.eta).unwrap_or(k))?;
        let incident = match p.incident.as_deref().unwrap_or("plane-wave") {
            "plane-wave" => {
                if p.sources.is_some() {
                    return Err(invalid("problem.sources", "only used with incident = \"point-sources\""));
                }
                IncidentField::plane_wave(p.angle_deg.unwrap_or(0.0).to_radians())
            }
            "point-sources" => {
                let src = p.sources.as_ref().filter(|s| !s.is_empty()).ok_or_else(|| {
                    invalid("problem.sources", "a non-empty list of [x, y, sign] is required for point sources")
                })?;
                IncidentField::PointSources(
                    src.iter().map(|s| PointSource { location: Vec2::new(s[0], s[1]), sign: s[2] }).collect(),
                )
            }
            "pair-sources" => match pair_separation {
                Some(d) => pair_sources(d),
                None => return Err(invalid("problem.incident", "pair-sources needs a [close_pair] section")),
            },
            other => {
                return Err(invalid(
                    "problem.incident",
                    format!("unknown incident field '{other}' (expected plane-wave, point-sources or pair-sources)"),
                ))
            }
        };
        if let IncidentField::PointSources(src) = &incident {
            for s in src {
                if !obstacles.iter().any(|o| o.curve().contains(s.location)) {
                    return Err(invalid(
                        "problem.sources",
                        format!("source ({}, {}) is not inside an obstacle", s.location.x, s.location.y),
                    ));
                }
            }
        }
        let gmres_tol = positive("problem.gmres_tol", ov.gmres_tol.or(p.gmres_tol).unwrap_or(1e-6))?;
        let max_iter = p.max_iter.unwrap_or(2000);
        if max_iter == 0 {
            return Err(invalid("problem.max_iter", "must be positive"));
        }

        let d = &raw.discretization;
        let method = parse_method(
            "discretization.method",
            ov.method.as_deref().or(d.method.as_deref()).unwrap_or("MK"),
        )?;
        let n = ov.n.or(d.n).ok_or_else(|| invalid("discretization.n", "required"))?;
        check_n("discretization.n", n)?;
        let mesh_p = ov.mesh_p.or(d.mesh_p).unwrap_or(0);
        if mesh_p == 1 {
            return Err(invalid("discretization.mesh_p", "must be 0 (uniform) or at least 2"));
        }
        if mesh_p == 0 {
            if let Some(o) = obstacles.iter().find(|o| o.shape.has_corner()) {
                return Err(invalid(
                    "discretization.mesh_p",
                    format!("{:?} has a corner and needs a graded mesh (mesh_p >= 2)", o.shape),
                ));
            }
        }
        let diff = d.diff.as_deref().map(|s| parse_diff("discretization.diff", s)).transpose()?;
        if formulation == Formulation::Classic && method == Method::Tr {
            return Err(invalid("discretization.method", "TR is only available for the smoothed formulations"));
        }

        let o = &raw.output;
        let far_field_dirs = o.far_field_dirs.unwrap_or(360);
        if far_field_dirs == 0 {
            return Err(invalid("output.far_field_dirs", "must be positive"));
        }
        let output = OutputSpec {
            dir: ov.out_dir.clone().or_else(|| o.dir.clone()).unwrap_or_else(|| PathBuf::from(".")),
            prefix: ov.prefix.clone().or_else(|| o.prefix.clone()).unwrap_or_else(|| "scfie".into()),
            far_field_dirs,
        };

        let c = &raw.convergence;
        let n_list = ov.n_list.clone().or_else(|| c.n_list.clone()).unwrap_or_default();
        for &m in &n_list {
            check_n("convergence.n_list", m)?;
        }
        if n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("convergence.n_list", "must be strictly increasing"));
        }
        let reference_multiplier = ov.reference_multiplier.or(c.reference_multiplier).unwrap_or(8);
        if reference_multiplier < 2 {
            return Err(invalid("convergence.reference_multiplier", "must be at least 2"));
        }
        let reference_method =
            c.reference_method.as_deref().map(|s| parse_method("convergence.reference_method", s)).transpose()?;
        let reference = match c.reference.as_deref().unwrap_or("auto") {
            "auto" => Reference::Auto,
            "exact" => Reference::Exact,
            "self" => Reference::SelfConvergence,
            other => return Err(invalid("convergence.reference", format!("unknown reference '{other}'"))),
        };
        if reference == Reference::Exact && incident.exact_far_field(k, 1).is_none() {
            return Err(invalid("convergence.reference", "exact reference needs point sources"));
        }
        let separations = ov.separations.clone().or_else(|| c.separations.clone()).unwrap_or_default();
        for &s in &separations {
            positive("convergence.separations", s)?;
        }

        let nf = &raw.nearfield;
        let [xmin, xmax, ymin, ymax] = ov.bbox.or(nf.bbox).unwrap_or([-3.0, 3.0, -3.0, 3.0]);
        if !(xmin < xmax && ymin < ymax) {
            return Err(invalid("nearfield.bbox", "expected [xmin, xmax, ymin, ymax] with xmin < xmax, ymin < ymax"));
        }
        let resolution = ov.resolution.unwrap_or_else(|| {
            let [a, b] = nf.resolution.unwrap_or([101, 101]);
            (a, b)
        });
        if resolution.0 < 2 || resolution.1 < 2 {
            return Err(invalid("nearfield.resolution", "at least 2 samples per direction"));
        }
        let nearfield = NearfieldSpec {
            bbox: BBox { xmin, xmax, ymin, ymax },
            resolution,
            smoothed: !ov.plain && nf.smoothed.unwrap_or(true),
            total: ov.total || nf.total.unwrap_or(false),
        };

        Ok(Scenario {
            obstacles,
            pair_separation,
            bc,
            formulation,
            method,
            n,
            mesh_p,
            diff,
            k,
            eta,
            incident,
            gmres_tol,
            max_iter,
            output,
            convergence: ConvergenceSpec { n_list, reference_multiplier, reference_method, reference, separations },
            nearfield,
        })
    }

    pub fn problem(&self) -> Problem {
        Problem::new(self.bc == Bc::Neumann, self.formulation == Formulation::Smoothed)
    }

    pub fn curves(&self) -> Vec<ParametricCurve> {
        self.obstacles.iter().map(|o| o.curve()).collect()
    }

    pub fn mesh(&self) -> GradedMesh {
        if self.mesh_p == 0 {
            GradedMesh::Identity
        } else {
            GradedMesh::Kress { p: self.mesh_p }
        }
    }

    /// Discretization with `n` nodes per curve.
    pub fn discretization(&self, method: Method, n: usize) -> Result<Discretization> {
        check_n("discretization.n", n)?;
        Ok(Discretization::new(method, n / 2, self.mesh())?)
    }

    /// The same scenario with the close pair moved to separation `d`.
    pub fn with_separation(&self, d: f64) -> Result<Self> {
        if self.pair_separation.is_none() {
            return Err(invalid("close_pair", "a separation sweep needs a [close_pair] section"));
        }
        let mut s = self.clone();
        s.obstacles = kite_pair(positive("convergence.separations", d)?);
        s.pair_separation = Some(d);
        if let IncidentField::PointSources(_) = s.incident {
            s.incident = pair_sources(d);
        }
        Ok(s)
    }
}

fn check_n(field: &str, n: usize) -> Result<()> {
    if n < 4 || n % 2 != 0 {
        return Err(invalid(field, format!("nodes per curve must be even and at least 4, got {n}")));
    }
    Ok(())
}
