//! Closed parametric boundaries, the graded-mesh change of variable and
//! nearest-point projection.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

/// A point or vector in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Rotation by −90°.
    pub fn perp_cw(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x, self * v.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Base shapes. Drop and boomerang have a single corner at `t = 0 ≡ 2π`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Kite,
    Drop,
    Boomerang,
}

impl Shape {
    pub fn has_corner(&self) -> bool {
        matches!(self, Shape::Drop | Shape::Boomerang)
    }

    /// Position and first two parametric derivatives, `t ∈ [0, 2π)`.
    fn eval(&self, t: f64) -> (Vec2, Vec2, Vec2) {
        let (s, c) = t.sin_cos();
        match *self {
            Shape::Circle { radius: r } => (
                Vec2::new(r * c, r * s),
                Vec2::new(-r * s, r * c),
                Vec2::new(-r * c, -r * s),
            ),
            Shape::Ellipse { a, b } => (
                Vec2::new(a * c, b * s),
                Vec2::new(-a * s, b * c),
                Vec2::new(-a * c, -b * s),
            ),
            Shape::Kite => {
                let (s2, c2) = (2.0 * t).sin_cos();
                (
                    Vec2::new(c + 0.65 * (c2 - 1.0), 1.5 * s),
                    Vec2::new(-s - 1.3 * s2, 1.5 * c),
                    Vec2::new(-c - 2.6 * c2, -1.5 * s),
                )
            }
            Shape::Drop => {
                let (sh, ch) = (0.5 * t).sin_cos();
                (
                    Vec2::new(2.0 * sh, -s),
                    Vec2::new(ch, -c),
                    Vec2::new(-0.5 * sh, s),
                )
            }
            Shape::Boomerang => {
                let (s3, c3) = (1.5 * t).sin_cos();
                (
                    Vec2::new(-2.0 / 3.0 * s3, -s),
                    Vec2::new(-c3, -c),
                    Vec2::new(1.5 * s3, s),
                )
            }
        }
    }
}

/// Position, derivatives and frame of a curve at one parameter value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveJet {
    pub t: f64,
    pub point: Vec2,
    pub d1: Vec2,
    pub d2: Vec2,
    /// Unit normal pointing into the exterior domain.
    pub normal: Vec2,
    /// Unit tangent in the direction of increasing parameter.
    pub tangent: Vec2,
    pub speed: f64,
}

impl CurveJet {
    /// `n · x''(t) / |x'(t)|²`, the coefficient entering the `p1` construction.
    pub fn curvature_coeff(&self) -> f64 {
        self.normal.dot(self.d2) / (self.speed * self.speed)
    }
}

/// A closed `2π`-periodic boundary: base shape, optional mirror `x ↦ −x`,
/// then a translation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParametricCurve {
    pub shape: Shape,
    pub offset: Vec2,
    pub mirror_x: bool,
    /// `+1` for counter-clockwise parametrizations, `−1` otherwise.
    orientation: f64,
}

impl ParametricCurve {
    pub fn new(shape: Shape) -> Self {
        Self::with_transform(shape, Vec2::default(), false)
    }

    pub fn with_transform(shape: Shape, offset: Vec2, mirror_x: bool) -> Self {
        let mut curve = Self { shape, offset, mirror_x, orientation: 1.0 };
        curve.orientation = curve.signed_area().signum();
        curve
    }

    pub fn has_corner(&self) -> bool {
        self.shape.has_corner()
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    fn raw(&self, t: f64) -> (Vec2, Vec2, Vec2) {
        let (mut p, mut d1, mut d2) = self.shape.eval(reduce(t));
        if self.mirror_x {
            p.x = -p.x;
            d1.x = -d1.x;
            d2.x = -d2.x;
        }
        (p + self.offset, d1, d2)
    }

    pub fn point(&self, t: f64) -> Vec2 {
        self.raw(t).0
    }

    pub fn jet(&self, t: f64) -> CurveJet {
        let t = reduce(t);
        let (point, d1, d2) = self.raw(t);
        let speed = d1.norm();
        let tangent = (1.0 / speed) * d1;
        CurveJet {
            t,
            point,
            d1,
            d2,
            normal: self.orientation * tangent.perp_cw(),
            tangent,
            speed,
        }
    }

    /// Signed enclosed area (positive for counter-clockwise curves).
    pub fn signed_area(&self) -> f64 {
        let n = 512;
        (0..n)
            .map(|j| {
                let t = TAU * j as f64 / n as f64;
                let (p, d1, _) = self.raw(t);
                0.5 * p.cross(d1)
            })
            .sum::<f64>()
            * TAU
            / n as f64
    }

    /// Winding number of the curve around `r`, from the closed polygon
    /// through `samples` curve points.
    pub fn winding_number(&self, r: Vec2, samples: usize) -> f64 {
        let mut total = 0.0;
        let mut prev = self.point(0.0) - r;
        for j in 1..=samples {
            let cur = self.point(TAU * j as f64 / samples as f64) - r;
            total += prev.cross(cur).atan2(prev.dot(cur));
            prev = cur;
        }
        total / TAU
    }

    /// Whether `r` lies inside the closed curve (boundary points count as
    /// inside). Far from the curve the 512-gon winding number decides; close
    /// to it the side of the nearest-point normal does.
    pub fn contains(&self, r: Vec2) -> bool {
        let tbar = nearest_point(self, r, 256);
        let jet = self.jet(tbar);
        let offset = r - jet.point;
        let dist = offset.norm();
        if dist < 1e-12 {
            return true;
        }
        let at_corner = self.has_corner() && (tbar < 1e-6 || TAU - tbar < 1e-6);
        if dist < 0.05 && !at_corner {
            return offset.dot(jet.normal) <= 0.0;
        }
        self.winding_number(r, 512).abs() > 0.5
    }

    fn distance_sq(&self, r: Vec2, t: f64) -> f64 {
        (self.point(t) - r).norm_sq()
    }
}

/// Reduce a parameter to `[0, 2π)`.
pub fn reduce(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Parameter of the point on `curve` closest to `r`.
///
/// Seeds from the best of `seeds` uniform samples, then runs Newton on
/// `g(t) = (x(t) − r)·x'(t)` safeguarded by bisection inside the bracket of
/// neighbouring samples. Ties between samples keep the smallest parameter.
pub fn nearest_point(curve: &ParametricCurve, r: Vec2, seeds: usize) -> f64 {
    let seeds = seeds.max(8);
    let step = TAU / seeds as f64;
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for j in 0..seeds {
        let d = curve.distance_sq(r, j as f64 * step);
        if d < best_d * (1.0 - 1e-12) {
            best_d = d;
            best = j;
        }
    }
    let t0 = best as f64 * step;
    // Corner curves are not differentiable at t = 0; keep the search inside
    // (0, 2π) there.
    let (mut lo, mut hi) = (t0 - step, t0 + step);
    if curve.has_corner() {
        lo = lo.max(0.0);
        hi = hi.min(TAU);
    }
    let t = refine(curve, r, t0, lo, hi);
    let candidate = reduce(t);
    if curve.distance_sq(r, candidate) < best_d * (1.0 - 1e-12) {
        candidate
    } else {
        reduce(t0)
    }
}

fn gradient(curve: &ParametricCurve, r: Vec2, t: f64) -> (f64, f64) {
    let (p, d1, d2) = curve.raw(t);
    let diff = p - r;
    (diff.dot(d1), d1.norm_sq() + diff.dot(d2))
}

fn refine(curve: &ParametricCurve, r: Vec2, t0: f64, mut lo: f64, mut hi: f64) -> f64 {
    let (glo, _) = gradient(curve, r, lo);
    let (ghi, _) = gradient(curve, r, hi);
    let bracketed = glo <= 0.0 && ghi >= 0.0;
    if !bracketed {
        return golden_section(curve, r, lo, hi);
    }
    let mut t = t0;
    for _ in 0..100 {
        let (g, gp) = gradient(curve, r, t);
        if g.abs() <= 1e-14 * (1.0 + (curve.point(t) - r).norm()) {
            return t;
        }
        if g < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = if gp > 0.0 { t - g / gp } else { f64::NAN };
        t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-15 * (1.0 + t.abs()) {
            return t;
        }
    }
    t
}

fn golden_section(curve: &ParametricCurve, r: Vec2, mut a: f64, mut b: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (curve.distance_sq(r, c), curve.distance_sq(r, d));
    while b - a > 1e-13 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = curve.distance_sq(r, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = curve.distance_sq(r, d);
        }
    }
    0.5 * (a + b)
}

/// Values of the change of variable `t = w(s)` and its first three
/// derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshPoint {
    pub w: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

/// Parametrization of the integration variable: the identity for smooth
/// curves, or Kress's polynomially graded map clustering nodes at `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradedMesh {
    Identity,
    Kress { p: u32 },
}

impl GradedMesh {
    pub fn is_identity(&self) -> bool {
        matches!(self, GradedMesh::Identity)
    }

    pub fn eval(&self, s: f64) -> MeshPoint {
        match *self {
            GradedMesh::Identity => MeshPoint { w: s, w1: 1.0, w2: 0.0, w3: 0.0 },
            GradedMesh::Kress { p } => kress_jet(p, s),
        }
    }

    /// Inverse map, `s` with `w(s) = t`, for `t ∈ [0, 2π]`.
    pub fn inverse(&self, t: f64) -> f64 {
        match *self {
            GradedMesh::Identity => t,
            GradedMesh::Kress { p } => {
                let (mut lo, mut hi) = (0.0, TAU);
                let mut s = t;
                for _ in 0..200 {
                    let m = kress_jet(p, s);
                    let f = m.w - t;
                    if f == 0.0 || f.abs() <= 1e-16 * t || hi - lo < 1e-15 {
                        break;
                    }
                    if f < 0.0 {
                        lo = s;
                    } else {
                        hi = s;
                    }
                    let newton = s - f / m.w1;
                    s = if m.w1 > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
                }
                s
            }
        }
    }
}

/// `(w(s), w'(s), w''(s))` of the graded change of variable with grading
/// exponent `p ≥ 2`.
pub fn kress_map(p: u32, s: f64) -> (f64, f64, f64) {
    let m = kress_jet(p, s);
    (m.w, m.w1, m.w2)
}

fn kress_jet(p: u32, s: f64) -> MeshPoint {
    let pf = p as f64;
    let c3 = 1.0 / pf - 0.5;
    // v(s) = c3 ((π − s)/π)^3 + (s − π)/(pπ) + 1/2, as a truncated Taylor
    // series in the offset from s.
    let v_at = |s: f64, sign: f64| -> Taylor3 {
        let u = (PI - s) / PI;
        let du = -sign / PI;
        Taylor3([
            c3 * u * u * u + (s - PI) / (pf * PI) + 0.5,
            3.0 * c3 * u * u * du + sign / (pf * PI),
            3.0 * c3 * u * du * du,
            c3 * du * du * du,
        ])
    };
    let a = v_at(s, 1.0).powi(p);
    // v(2π − s) as a function of s: the chain rule flips odd derivatives.
    let b = v_at(TAU - s, -1.0).powi(p);
    let w = a.scale(TAU).div(&a.add(&b));
    MeshPoint { w: w.0[0], w1: w.0[1], w2: 2.0 * w.0[2], w3: 6.0 * w.0[3] }
}

/// Taylor coefficients `f, f', f''/2, f'''/6` truncated after third order.
#[derive(Clone, Copy, Debug)]
struct Taylor3([f64; 4]);

impl Taylor3 {
    fn add(&self, o: &Taylor3) -> Taylor3 {
        Taylor3(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }

    fn scale(&self, c: f64) -> Taylor3 {
        Taylor3(self.0.map(|v| c * v))
    }

    fn mul(&self, o: &Taylor3) -> Taylor3 {
        Taylor3(std::array::from_fn(|n| (0..=n).map(|i| self.0[i] * o.0[n - i]).sum()))
    }

    fn div(&self, o: &Taylor3) -> Taylor3 {
        let mut q = [0.0; 4];
        for n in 0..4 {
            let acc: f64 = (0..n).map(|i| q[i] * o.0[n - i]).sum();
            q[n] = (self.0[n] - acc) / o.0[0];
        }
        Taylor3(q)
    }

    fn powi(&self, p: u32) -> Taylor3 {
        let mut out = Taylor3([1.0, 0.0, 0.0, 0.0]);
        for _ in 0..p {
            out = out.mul(self);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    const ALL: [Shape; 5] = [
        Shape::Circle { radius: 1.3 },
        Shape::Ellipse { a: 2.0, b: 0.7 },
        Shape::Kite,
        Shape::Drop,
        Shape::Boomerang,
    ];

    #[test]
    fn unit_circle_frame() {
        let c = ParametricCurve::new(Shape::Circle { radius: 1.0 });
        let j = c.jet(0.0);
        assert_eq!(j.point, Vec2::new(1.0, 0.0));
        assert!((j.normal - Vec2::new(1.0, 0.0)).norm() < 1e-15);
        assert!((j.tangent - Vec2::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(j.speed, 1.0);
        let outside = j.point + 1e-3 * j.normal;
        assert!(outside.norm() > 1.0);
    }

    #[test]
    fn printed_parametrizations() {
        let kite = ParametricCurve::new(Shape::Kite);
        let drop = ParametricCurve::new(Shape::Drop);
        for t in [0.3, 1.7, 4.1] {
            let p = kite.point(t);
            let want = Vec2::new(t.cos() + 0.65 * ((2.0 * t).cos() - 1.0), 1.5 * t.sin());
            assert!((p - want).norm() < 1e-15);
            let p = drop.point(t);
            let want = Vec2::new(2.0 * (0.5 * t).sin(), -t.sin());
            assert!((p - want).norm() < 1e-15);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let h = 1e-5;
        for shape in ALL {
            let c = ParametricCurve::with_transform(shape, Vec2::new(0.3, -1.0), true);
            for _ in 0..50 {
                let t: f64 = rng.gen_range(0.01..TAU - 0.01);
                let j = c.jet(t);
                let (pp, pm) = (c.point(t + h), c.point(t - h));
                let d1 = (1.0 / (2.0 * h)) * (pp - pm);
                let d2 = (1.0 / (h * h)) * (pp - 2.0 * j.point + pm);
                assert!((d1 - j.d1).norm() < 1e-7, "{shape:?} d1 at {t}");
                assert!((d2 - j.d2).norm() < 1e-4, "{shape:?} d2 at {t}");
                let jp = c.jet(t + h);
                let jm = c.jet(t - h);
                assert!(((1.0 / (2.0 * h)) * (jp.d1 - jm.d1) - j.d2).norm() < 1e-7);
                assert!(j.normal.dot(j.tangent).abs() < 1e-14);
                assert!((j.normal.norm() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn closed_and_outward() {
        for shape in ALL {
            for mirror in [false, true] {
                let c = ParametricCurve::with_transform(shape, Vec2::new(1.0, 2.0), mirror);
                assert!((c.point(0.0) - c.point(TAU)).norm() < 1e-14);
                // Outward normals: a small step along n leaves the domain.
                for t in [0.5, 2.0, 3.5, 5.5] {
                    let j = c.jet(t);
                    assert!(!c.contains(j.point + 1e-3 * j.normal), "{shape:?} mirror={mirror} t={t}");
                    assert!(c.contains(j.point - 1e-3 * j.normal), "{shape:?} mirror={mirror} t={t}");
                }
            }
        }
    }

    #[test]
    fn speed_positive_on_smooth_shapes() {
        for shape in [Shape::Circle { radius: 1.0 }, Shape::Ellipse { a: 1.0, b: 3.0 }, Shape::Kite] {
            let c = ParametricCurve::new(shape);
            assert!((0..1000).all(|j| c.jet(TAU * j as f64 / 1000.0).speed > 0.1));
        }
    }

    #[test]
    fn kress_map_fixed_points() {
        for p in 2..8 {
            let (w, _, _) = kress_map(p, PI);
            assert!((w - PI).abs() < 1e-14);
        }
        let (w, w1, w2) = kress_map(4, 0.0);
        assert_eq!((w, w1, w2), (0.0, 0.0, 0.0));
        let (w, w1, w2) = kress_map(4, TAU);
        assert!((w - TAU).abs() < 1e-14 && w1.abs() < 1e-14 && w2.abs() < 1e-14);
    }

    #[test]
    fn kress_map_matches_symbolic_oracle() {
        // Symbolic differentiation of the printed v and w formulas (p = 4).
        let cases = [
            (PI / 2.0, [0.43989688355321929595, 1.0101933218022474505, 1.3990793229871094880, -0.081098674233999939303]),
            (1.0 / 3.0, [0.00087373891969686565, 0.010690992878215087843, 0.099123175045423524459, 0.62591297848706900467]),
            (5.0, [6.0767608688872375616, 0.61986157647407177116, -1.2643659082652235305, 0.96884200931947516757]),
        ];
        for (s, want) in cases {
            let m = GradedMesh::Kress { p: 4 }.eval(s);
            let got = [m.w, m.w1, m.w2, m.w3];
            for q in 0..4 {
                assert!((got[q] - want[q]).abs() < 1e-13 * want[q].abs().max(1.0), "s={s} q={q}");
            }
        }
    }

    #[test]
    fn kress_map_symmetry_and_monotonicity() {
        let mut prev = -1.0;
        for j in 0..=2000 {
            let s = TAU * j as f64 / 2000.0;
            let (w, w1, _) = kress_map(4, s);
            let (wr, _, _) = kress_map(4, TAU - s);
            assert!((wr - (TAU - w)).abs() < 1e-13);
            assert!(w > prev || j == 0);
            assert!(w1 >= 0.0);
            prev = w;
        }
        // Derivatives of order 1..p-1 vanish at the endpoints.
        let m = GradedMesh::Kress { p: 4 }.eval(0.0);
        assert_eq!((m.w1, m.w2, m.w3), (0.0, 0.0, 0.0));
    }

    #[test]
    fn inverse_map() {
        let mesh = GradedMesh::Kress { p: 4 };
        for s in [0.01, 0.5, PI, 4.0, 6.2] {
            let t = mesh.eval(s).w;
            assert!((mesh.inverse(t) - s).abs() < 1e-10);
        }
    }

    #[test]
    fn nearest_point_radial_projection() {
        let c = ParametricCurve::new(Shape::Circle { radius: 1.0 });
        assert!(nearest_point(&c, Vec2::new(2.0, 0.0), 256).abs() < 1e-12);
        assert!((nearest_point(&c, Vec2::new(0.0, 3.0), 256) - PI / 2.0).abs() < 1e-12);
        // Ties at the center resolve to the smallest sample parameter.
        assert_eq!(nearest_point(&c, Vec2::new(0.0, 0.0), 256), 0.0);
    }

    #[test]
    fn nearest_point_on_kite_matches_brute_force() {
        let kite = ParametricCurve::new(Shape::Kite);
        let j = kite.jet(1.3);
        let r = j.point + 1e-4 * j.normal;
        // Brute force over 10^6 uniform samples.
        let n = 1_000_000;
        let brute = (0..n)
            .map(|i| TAU * i as f64 / n as f64)
            .min_by(|a, b| kite.distance_sq(r, *a).total_cmp(&kite.distance_sq(r, *b)))
            .unwrap();
        let t = nearest_point(&kite, r, 256);
        assert!((t - 1.3).abs() < 1e-6 && (t - brute).abs() < 1e-5);
    }

    #[test]
    fn nearest_point_recovers_offset_parameter() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for shape in [Shape::Circle { radius: 1.0 }, Shape::Ellipse { a: 1.5, b: 0.8 }, Shape::Kite] {
            let c = ParametricCurve::new(shape);
            for _ in 0..20 {
                let t0: f64 = rng.gen_range(0.0..TAU);
                for eps in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
                    let j = c.jet(t0);
                    let t = nearest_point(&c, j.point + eps * j.normal, 256);
                    let diff = (t - t0).abs().min(TAU - (t - t0).abs());
                    assert!(diff < 1e-8, "{shape:?} t0={t0} eps={eps} got {t}");
                }
            }
        }
    }

    #[test]
    fn mask_matches_circle_test() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let c = ParametricCurve::with_transform(Shape::Circle { radius: 1.0 }, Vec2::new(0.2, -0.1), false);
        for _ in 0..1000 {
            let r = Vec2::new(rng.gen_range(-1.5..1.9), rng.gen_range(-1.6..1.4));
            let inside = (r - Vec2::new(0.2, -0.1)).norm() < 1.0;
            assert_eq!(c.contains(r), inside, "{r:?}");
        }
    }
}
