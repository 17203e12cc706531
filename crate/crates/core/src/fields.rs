//! Incident fields, far-field patterns, combined potentials (plain and
//! smoothed) and near-field grids.

use crate::assemble::{interpolation_weights, Layout};
use crate::geometry::{nearest_point, Vec2};
use crate::kernels::green_pair;
use crate::smoothing::SmoothingAnchor;
use crate::specfun::cylinder01;
use crate::{Error, Result, C64};
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_4, PI, TAU};

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// A point source `sign · H0(k|x − location|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointSource {
    pub location: Vec2,
    pub sign: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum IncidentField {
    /// `exp(ik d·x)` with `d = (cos α, sin α)`.
    PlaneWave { angle: f64 },
    /// A sum of point sources. With all sources inside the obstacles the
    /// scattered field is known exactly: it is minus the incident field.
    PointSources(Vec<PointSource>),
}

impl IncidentField {
    pub fn plane_wave(angle: f64) -> Self {
        IncidentField::PlaneWave { angle }
    }

    pub fn point_source(location: Vec2, sign: f64) -> Self {
        IncidentField::PointSources(vec![PointSource { location, sign }])
    }

    pub fn value(&self, k: f64, x: Vec2) -> C64 {
        match self {
            IncidentField::PlaneWave { angle } => {
                let d = Vec2::new(angle.cos(), angle.sin());
                C64::from_polar(1.0, k * d.dot(x))
            }
            IncidentField::PointSources(src) => src
                .iter()
                .map(|s| s.sign * cylinder01(k * (x - s.location).norm()).h0())
                .sum(),
        }
    }

    /// `(∂x u, ∂y u)`.
    pub fn gradient(&self, k: f64, x: Vec2) -> (C64, C64) {
        match self {
            IncidentField::PlaneWave { angle } => {
                let d = Vec2::new(angle.cos(), angle.sin());
                let u = I * k * C64::from_polar(1.0, k * d.dot(x));
                (u * d.x, u * d.y)
            }
            IncidentField::PointSources(src) => src.iter().fold((ZERO, ZERO), |(gx, gy), s| {
                let r = x - s.location;
                let rn = r.norm();
                // d/dx H0(k|x|) = −k H1(k|x|) x/|x|.
                let f = -s.sign * k * cylinder01(k * rn).h1() / rn;
                (gx + f * r.x, gy + f * r.y)
            }),
        }
    }

    pub fn normal_derivative(&self, k: f64, x: Vec2, n: Vec2) -> C64 {
        let (gx, gy) = self.gradient(k, x);
        gx * n.x + gy * n.y
    }

    /// The exact scattered field `−u^inc`, radiating when every source lies
    /// inside an obstacle. `None` for plane waves.
    pub fn exact_scattered(&self, k: f64, x: Vec2) -> Option<C64> {
        match self {
            IncidentField::PlaneWave { .. } => None,
            IncidentField::PointSources(_) => Some(-self.value(k, x)),
        }
    }

    /// Far field of [`IncidentField::exact_scattered`].
    pub fn exact_far_field(&self, k: f64, n_dirs: usize) -> Option<FarField> {
        let IncidentField::PointSources(src) = self else {
            return None;
        };
        let angles = uniform_angles(n_dirs);
        let amp = (2.0 / (PI * k)).sqrt() * C64::from_polar(1.0, -FRAC_PI_4);
        let values = angles
            .iter()
            .map(|&a| {
                let d = Vec2::new(a.cos(), a.sin());
                src.iter().map(|s| -s.sign * amp * C64::from_polar(1.0, -k * d.dot(s.location))).sum()
            })
            .collect();
        Some(FarField { angles, values })
    }
}

/// Far-field pattern on uniformly spaced directions.
#[derive(Clone, Debug, PartialEq)]
pub struct FarField {
    /// Direction angles in radians.
    pub angles: Vec<f64>,
    pub values: Vec<C64>,
}

pub fn uniform_angles(n_dirs: usize) -> Vec<f64> {
    (0..n_dirs).map(|m| TAU * m as f64 / n_dirs as f64).collect()
}

/// Far field of the combined potential with density `phi`:
///
/// ```text
/// u∞(x̂) = e^{−iπ/4}/√(8πk) ∫ (k n(y)·x̂ + η) e^{−ik x̂·y} φ(y) ds(y)
/// ```
///
/// by the trapezoidal rule in the integration variable.
pub fn far_field(layout: &Layout, phi: &[C64], n_dirs: usize) -> FarField {
    let (k, eta) = (layout.scene.k, layout.scene.eta);
    let angles = uniform_angles(n_dirs);
    let pre = C64::from_polar(1.0, -FRAC_PI_4) / (8.0 * PI * k).sqrt();
    let values = angles
        .par_iter()
        .map(|&a| {
            let d = Vec2::new(a.cos(), a.sin());
            let mut sum = ZERO;
            for (c, set) in layout.sets.iter().enumerate() {
                let dens = layout.block(phi, c);
                for (nd, &p) in set.nodes.iter().zip(dens) {
                    let w = set.h * nd.mesh.w1 * nd.jet.speed;
                    let y = nd.jet.point;
                    sum += (k * nd.jet.normal.dot(d) + eta) * C64::from_polar(w, -k * d.dot(y)) * p;
                }
            }
            pre * sum
        })
        .collect();
    FarField { angles, values }
}

/// `max |ũ∞ − u∞|/|u∞|` over directions, skipping directions where
/// `|u∞| < 1e-14 · max |u∞|`.
pub fn farfield_error(candidate: &FarField, reference: &FarField) -> Result<f64> {
    if candidate.angles.len() != reference.angles.len()
        || candidate.angles.iter().zip(&reference.angles).any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(Error::InvalidInput("far fields are sampled on different directions".into()));
    }
    let peak = reference.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(candidate
        .values
        .iter()
        .zip(&reference.values)
        .filter(|(_, r)| r.norm() >= 1e-14 * peak && r.norm() > 0.0)
        .map(|(c, r)| (c - r).norm() / r.norm())
        .fold(0.0, f64::max))
}

/// Distance below which a target counts as lying on the boundary.
const ON_BOUNDARY: f64 = 1e-12;

/// Nearest boundary parameter on each curve, rejecting targets that are not
/// strictly exterior.
fn exterior_anchors(layout: &Layout, r: Vec2) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(layout.sets.len());
    for set in &layout.sets {
        let tb = nearest_point(&set.curve, r, 256.max(set.len()));
        let dist = (set.curve.point(tb) - r).norm();
        if dist < ON_BOUNDARY || set.curve.contains(r) {
            return Err(Error::NotExterior { x: r.x, y: r.y });
        }
        out.push(tb);
    }
    Ok(out)
}

/// The combined potential `u = D[φ] − iη S[φ]` at an exterior point.
///
/// With `smoothed` set, each curve's contribution is written as
/// `D[R_D[φ|x̄]] − S[R_S[φ|x̄]]` with `x̄` the point of that curve nearest to
/// `r`, where `φ(x̄)` and `∂sφ(x̄)` come from interpolating the nodal density.
pub fn potential(layout: &Layout, phi: &[C64], r: Vec2, smoothed: bool) -> Result<C64> {
    let anchors = exterior_anchors(layout, r)?;
    Ok(potential_unchecked(layout, phi, r, smoothed.then_some(&anchors[..])))
}

fn potential_unchecked(layout: &Layout, phi: &[C64], r: Vec2, anchors: Option<&[f64]>) -> C64 {
    let (k, eta) = (layout.scene.k, layout.scene.eta);
    let ie = C64::new(0.0, eta);
    let mut total = ZERO;
    for (c, set) in layout.sets.iter().enumerate() {
        let dens = layout.block(phi, c);
        let smoothing = anchors.map(|a| {
            let jet = set.curve.jet(a[c]);
            let (wa, wb) = interpolation_weights(&layout.disc, a[c]);
            let v: C64 = wa.iter().zip(dens).map(|(w, p)| p * w).sum();
            let dv: C64 = wb.iter().zip(dens).map(|(w, p)| p * w).sum();
            (SmoothingAnchor::new(&jet, k, eta), v, dv / jet.speed)
        });
        for (nd, &p) in set.nodes.iter().zip(dens) {
            let w = set.h * nd.mesh.w1 * nd.jet.speed;
            let (g, gy) = green_pair(k, r, nd.jet.point, nd.jet.normal);
            total += w * match &smoothing {
                None => (gy - ie * g) * p,
                Some((anchor, v, ds)) => {
                    let sv = anchor.eval(nd.jet.point, nd.jet.normal);
                    let rho_d = p - v * sv.p0 - ds * sv.p1;
                    let rho_s = ie * p - v * sv.dn_p0 - ds * sv.dn_p1;
                    gy * rho_d - g * rho_s
                }
            };
        }
    }
    total
}

/// Axis-aligned sampling box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BBox {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

/// Field samples on a Cartesian grid, row-major with `x` fastest.
/// Samples inside an obstacle (or on its boundary) are masked and hold 0.
#[derive(Clone, Debug)]
pub struct FieldGrid {
    pub bbox: BBox,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<C64>,
    pub inside: Vec<bool>,
}

impl FieldGrid {
    pub fn point(&self, ix: usize, iy: usize) -> Vec2 {
        grid_point(&self.bbox, self.nx, self.ny, ix, iy)
    }

    pub fn masked_count(&self) -> usize {
        self.inside.iter().filter(|m| **m).count()
    }
}

fn grid_point(b: &BBox, nx: usize, ny: usize, ix: usize, iy: usize) -> Vec2 {
    Vec2::new(
        b.xmin + (b.xmax - b.xmin) * ix as f64 / (nx - 1) as f64,
        b.ymin + (b.ymax - b.ymin) * iy as f64 / (ny - 1) as f64,
    )
}

/// Scattered (or, with `total`, incident plus scattered) field on a grid.
pub fn near_grid(
    layout: &Layout,
    phi: &[C64],
    incident: &IncidentField,
    bbox: BBox,
    (nx, ny): (usize, usize),
    smoothed: bool,
    total: bool,
) -> Result<FieldGrid> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidInput(format!("grid resolution must be at least 2x2, got {nx}x{ny}")));
    }
    let k = layout.scene.k;
    let samples: Vec<(C64, bool)> = (0..nx * ny)
        .into_par_iter()
        .map(|q| {
            let r = grid_point(&bbox, nx, ny, q % nx, q / nx);
            match exterior_anchors(layout, r) {
                Err(_) => (ZERO, true),
                Ok(anchors) => {
                    let mut u = potential_unchecked(layout, phi, r, smoothed.then_some(&anchors[..]));
                    if total {
                        u += incident.value(k, r);
                    }
                    (u, false)
                }
            }
        })
        .collect();
    let (values, inside) = samples.into_iter().unzip();
    Ok(FieldGrid { bbox, nx, ny, values, inside })
}
