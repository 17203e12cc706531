//! Cylinder functions of orders zero and one for real positive arguments.
//!
//! Three regimes are used:
//!
//! - `x < 2`: ascending power series (no cancellation to speak of);
//! - `2 <= x < 25`: Steed's method, i.e. the continued fractions CF1 and CF2
//!   combined through the Wronskian;
//! - `x >= 25`: the Hankel asymptotic expansion truncated at its smallest term.
//!
//! For the kernel splittings the module also exposes the "regular parts" of
//! `Y0` and `Y1`, i.e. what remains after removing the logarithmic and pole
//! terms, evaluated without cancellation for small arguments.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::{Error, Result, C64};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest supported argument.
pub const MAX_ARG: f64 = 700.0;

const SERIES_LIMIT: f64 = 2.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// Values of `J_n`, `Y_n` and `H_n^(1) = J_n + i Y_n` at one argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CylinderValue {
    pub j: f64,
    pub y: f64,
    pub h: C64,
}

/// `J0, J1, Y0, Y1` at one argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cylinder01 {
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Cylinder01 {
    pub fn h0(&self) -> C64 {
        C64::new(self.j0, self.y0)
    }

    pub fn h1(&self) -> C64 {
        C64::new(self.j1, self.y1)
    }
}

/// Small-argument decomposition
///
/// ```text
/// Y0(x) = (2/π) J0(x) ln(x/2)              + y0_reg(x)
/// Y1(x) = (2/π) J1(x) ln(x/2) − 2/(π x)    + y1_reg(x)
/// ```
///
/// where `y0_reg`, `y1_reg` are entire power series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularParts {
    pub j0: f64,
    pub j1: f64,
    pub y0_reg: f64,
    pub y1_reg: f64,
}

fn check_order(order: u32) -> Result<()> {
    if order > 1 {
        return Err(Error::InvalidInput(format!(
            "cylinder functions are implemented for orders 0 and 1, got {order}"
        )));
    }
    Ok(())
}

/// Bessel function of the first kind `J_order(x)`, `order ∈ {0, 1}`, `x ≥ 0`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    check_order(order)?;
    if !x.is_finite() || x < 0.0 || x > MAX_ARG {
        return Err(Error::Domain { function: "bessel_j", value: x });
    }
    if x < SERIES_LIMIT {
        let r = regular_parts(x);
        return Ok(if order == 0 { r.j0 } else { r.j1 });
    }
    let c = cylinder01(x);
    Ok(if order == 0 { c.j0 } else { c.j1 })
}

/// Bessel function of the second kind `Y_order(x)`, `x > 0`.
pub fn bessel_y(order: u32, x: f64) -> Result<f64> {
    check_order(order)?;
    if !x.is_finite() || x <= 0.0 || x > MAX_ARG {
        return Err(Error::Domain { function: "bessel_y", value: x });
    }
    let c = cylinder01(x);
    Ok(if order == 0 { c.y0 } else { c.y1 })
}

/// Hankel function of the first kind `H_order^(1)(x) = J + iY`, `x > 0`.
pub fn hankel1(order: u32, x: f64) -> Result<C64> {
    Ok(cylinder(order, x)?.h)
}

/// `J`, `Y` and `H^(1)` of the requested order.
pub fn cylinder(order: u32, x: f64) -> Result<CylinderValue> {
    check_order(order)?;
    if !x.is_finite() || x <= 0.0 || x > MAX_ARG {
        return Err(Error::Domain { function: "hankel1", value: x });
    }
    let c = cylinder01(x);
    let (j, y) = if order == 0 { (c.j0, c.y0) } else { (c.j1, c.y1) };
    Ok(CylinderValue { j, y, h: C64::new(j, y) })
}

/// All four functions at once, without argument checks. Requires `x > 0`.
pub fn cylinder01(x: f64) -> Cylinder01 {
    debug_assert!(x > 0.0);
    if x < SERIES_LIMIT {
        let r = regular_parts(x);
        let lg = (0.5 * x).ln();
        Cylinder01 {
            j0: r.j0,
            j1: r.j1,
            y0: 2.0 / PI * r.j0 * lg + r.y0_reg,
            y1: 2.0 / PI * r.j1 * lg - 2.0 / (PI * x) + r.y1_reg,
        }
    } else if x < ASYMPTOTIC_LIMIT {
        steed(x)
    } else {
        asymptotic(x)
    }
}

/// Power series of `J0`, `J1` and of the regular parts of `Y0`, `Y1`.
///
/// Accurate to a few ulps for `0 ≤ x ≤ 2`; usable (with growing cancellation)
/// up to roughly `x = 6`.
pub fn regular_parts(x: f64) -> RegularParts {
    let q = 0.25 * x * x;
    let half = 0.5 * x;

    // term_m = (-q)^m / (m!)^2
    let mut term = 1.0;
    let mut j0 = 1.0;
    let mut harmonic = 0.0;
    let mut y0_sum = 0.0;
    // term1_m = (-q)^m / (m! (m+1)!)
    let mut term1 = 1.0;
    let mut j1 = 1.0;
    // ψ(m+1) + ψ(m+2) = 2 H_m + 1/(m+1) − 2γ
    let mut y1_sum = 1.0 - 2.0 * EULER_GAMMA;
    for m in 1..40 {
        let mf = m as f64;
        term *= -q / (mf * mf);
        term1 *= -q / (mf * (mf + 1.0));
        harmonic += 1.0 / mf;
        j0 += term;
        j1 += term1;
        y0_sum -= harmonic * term;
        y1_sum += (2.0 * harmonic + 1.0 / (mf + 1.0) - 2.0 * EULER_GAMMA) * term1;
        if term.abs() < 1e-18 * j0.abs().max(1e-300) && term1.abs() < 1e-18 {
            break;
        }
    }
    RegularParts {
        j0,
        j1: half * j1,
        y0_reg: 2.0 / PI * (EULER_GAMMA * j0 + y0_sum),
        y1_reg: -half / PI * y1_sum,
    }
}

/// Steed's method for order zero; order one follows from `J0' = −J1`,
/// `Y0' = −Y1`.
fn steed(x: f64) -> Cylinder01 {
    const EPS: f64 = 1e-16;
    const FPMIN: f64 = 1e-300;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1: f = J0'/J0.
    let mut isign = 1.0;
    let mut h = FPMIN;
    let mut b = 0.0;
    let mut d = 0.0;
    let mut c = h;
    for _ in 0..100_000 {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    let f = h;

    // CF2: p + iq = (J0' + i Y0') / (J0 + i Y0).
    let a0 = 0.25;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * x;
    let mut bi = 2.0;
    let mut fact = a0 * xi / (p * p + q * q);
    let mut cr = br + q * fact;
    let mut ci = bi + p * fact;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let mut temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    let mut a = a0;
    for i in 2..100_000 {
        a += 2.0 * (i as f64 - 1.0);
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        fact = a / (cr * cr + ci * ci);
        cr = br + cr * fact;
        ci = bi - ci * fact;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (dlr - 1.0).abs() + dli.abs() < EPS {
            break;
        }
    }

    let gam = (p - f) / q;
    let j0 = (w / ((p - f) * gam + q)).sqrt().copysign(isign);
    let y0 = j0 * gam;
    let y0p = y0 * (p + q / gam);
    Cylinder01 { j0, j1: -f * j0, y0, y1: -y0p }
}

/// Hankel asymptotic expansion for large arguments.
fn asymptotic(x: f64) -> Cylinder01 {
    let (p0, q0) = asymptotic_pq(0.0, x);
    let (p1, q1) = asymptotic_pq(4.0, x);
    let (s, c) = x.sin_cos();
    // cos/sin of x − π/4 and x − 3π/4 without rounding the shifted argument.
    let c0 = (c + s) * FRAC_1_SQRT_2;
    let s0 = (s - c) * FRAC_1_SQRT_2;
    let c1 = (s - c) * FRAC_1_SQRT_2;
    let s1 = -(s + c) * FRAC_1_SQRT_2;
    let amp = (2.0 / (PI * x)).sqrt();
    Cylinder01 {
        j0: amp * (p0 * c0 - q0 * s0),
        y0: amp * (p0 * s0 + q0 * c0),
        j1: amp * (p1 * c1 - q1 * s1),
        y1: amp * (p1 * s1 + q1 * c1),
    }
}

/// `P`, `Q` of the Hankel expansion with `mu = 4ν²`.
fn asymptotic_pq(mu: f64, x: f64) -> (f64, f64) {
    let z = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * z);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // a_k / x^k enters with sign (−1)^{k/2} in P (k even), (−1)^{(k−1)/2} in Q (k odd).
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}
