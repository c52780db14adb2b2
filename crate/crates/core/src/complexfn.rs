//! Faddeeva function `w(z) = exp(-z²) erfc(-iz)` and the complementary
//! error function of complex argument.
//!
//! Evaluation regions for `Im z >= 0`:
//!
//! * `|z| <= 0.5`: Maclaurin series `Σ (iz)^n / Γ(n/2 + 1)`.
//! * `0.5 < |z| <= 10`: Weideman's rational expansion with 40 terms.
//! * `|z| > 10`: Laplace continued fraction, 40 levels deep.
//!
//! The lower half-plane is reached through `w(z) = 2 exp(-z²) - w(-z)`.
//! On the real axis the real part is replaced by `exp(-x²)` exactly.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{DecayError, Result};

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

const MACLAURIN_RADIUS: f64 = 0.5;
const RATIONAL_RADIUS: f64 = 10.0;
const WEIDEMAN_N: usize = 40;
const CF_DEPTH: usize = 40;

/// Largest argument to `exp` that stays finite.
const EXP_LIMIT: f64 = 709.0;

/// Computes `w(z)`.
///
/// Returns a range error when `exp(-z²)` overflows, which can only happen
/// deep in the lower half-plane.
pub fn faddeeva(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(DecayError::Domain(format!("faddeeva: non-finite argument {z}")));
    }
    if z.im >= 0.0 {
        let mut w = faddeeva_upper(z);
        if z.im == 0.0 {
            w.re = (-z.re * z.re).exp();
        }
        return Ok(w);
    }
    let e = exp_neg_square(z)?;
    let w = 2.0 * e - faddeeva_upper(-z);
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(DecayError::Range(format!("faddeeva: w({z}) overflows")));
    }
    Ok(w)
}

/// Computes `erfc(z) = exp(-z²) w(iz)`.
pub fn erfc_complex(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(DecayError::Domain(format!("erfc: non-finite argument {z}")));
    }
    // Keep the Faddeeva argument in the upper half-plane and apply
    // erfc(-z) = 2 - erfc(z) otherwise.
    let (u, flip) = if z.re >= 0.0 { (z, false) } else { (-z, true) };
    let iu = Complex64::new(-u.im, u.re);
    let w = faddeeva_upper(iu);
    let val = scaled_by_exp_neg_square(u, w)?;
    let val = if flip { 2.0 - val } else { val };
    if !(val.re.is_finite() && val.im.is_finite()) {
        return Err(DecayError::Range(format!("erfc({z}) overflows")));
    }
    Ok(val)
}

/// `exp(-z²)` with the real part of the exponent formed as `(y-x)(y+x)` to
/// avoid cancellation near the diagonals.
pub(crate) fn exp_neg_square(z: Complex64) -> Result<Complex64> {
    let re = (z.im - z.re) * (z.im + z.re);
    if re > EXP_LIMIT {
        return Err(DecayError::Range(format!("exp(-z²) overflows at z = {z}")));
    }
    let im = -2.0 * z.re * z.im;
    Ok(Complex64::from_polar(re.exp(), im))
}

/// `exp(-z²)·w` evaluated in log space when the exponential alone would
/// overflow.
fn scaled_by_exp_neg_square(z: Complex64, w: Complex64) -> Result<Complex64> {
    let re = (z.im - z.re) * (z.im + z.re);
    let im = -2.0 * z.re * z.im;
    if re <= EXP_LIMIT {
        return Ok(Complex64::from_polar(re.exp(), im) * w);
    }
    if w == Complex64::new(0.0, 0.0) {
        return Ok(w);
    }
    let l = Complex64::new(re, im) + w.ln();
    if l.re > EXP_LIMIT {
        return Err(DecayError::Range(format!("exp(-z²)·w overflows at z = {z}")));
    }
    Ok(l.exp())
}

/// `w(z)` for `Im z >= 0`. Never fails there.
pub(crate) fn faddeeva_upper(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r <= MACLAURIN_RADIUS {
        maclaurin(z)
    } else if r <= RATIONAL_RADIUS {
        weideman(z)
    } else {
        continued_fraction(z)
    }
}

fn maclaurin(z: Complex64) -> Complex64 {
    // 1/Γ(n/2 + 1) by the two-step recurrence.
    let iz = Complex64::new(-z.im, z.re);
    let mut even = 1.0;
    let mut odd = 2.0 * FRAC_1_SQRT_PI;
    let mut pow = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..40 {
        let c = if n % 2 == 0 { even } else { odd };
        sum += pow * c;
        pow *= iz;
        if n % 2 == 0 {
            even /= n as f64 / 2.0 + 1.0;
        } else {
            odd /= n as f64 / 2.0 + 1.0;
        }
    }
    sum
}

struct Weideman {
    l: f64,
    /// Polynomial coefficients, constant term first.
    coef: [f64; WEIDEMAN_N],
}

fn weideman_table() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = WEIDEMAN_N;
        let m = 2 * n;
        let l = (n as f64 / 2f64.sqrt()).sqrt();
        let samples: Vec<(f64, f64)> = (-(m as i64) + 1..m as i64)
            .map(|k| {
                let theta = k as f64 * PI / m as f64;
                let t = l * (theta / 2.0).tan();
                (theta, (-t * t).exp() * (l * l + t * t))
            })
            .collect();
        let mut coef = [0.0; WEIDEMAN_N];
        for (j, c) in coef.iter_mut().enumerate() {
            let order = (j + 1) as f64;
            let s: f64 = samples.iter().map(|&(th, f)| f * (order * th).cos()).sum();
            *c = s / (2 * m) as f64;
        }
        Weideman { l, coef }
    })
}

fn weideman(z: Complex64) -> Complex64 {
    let tab = weideman_table();
    let l = tab.l;
    let iz = Complex64::new(-z.im, z.re);
    let denom = l - iz;
    let zz = (l + iz) / denom;
    let mut p = Complex64::new(0.0, 0.0);
    for &c in tab.coef.iter().rev() {
        p = p * zz + c;
    }
    2.0 * p / (denom * denom) + FRAC_1_SQRT_PI / denom
}

fn continued_fraction(z: Complex64) -> Complex64 {
    let mut r = Complex64::new(0.0, 0.0);
    for k in (1..=CF_DEPTH).rev() {
        r = (k as f64 / 2.0) / (z - r);
    }
    Complex64::new(0.0, FRAC_1_SQRT_PI) / (z - r)
}
