//! Outgoing-wave poles of the delta-shell model: zeros of
//! `G(k) = cos k + (η - ik) sinc k` in the fourth quadrant.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{DecayError, Result};

pub(crate) const ROOT_RESIDUAL: f64 = 1e-12;
const MAX_NEWTON: usize = 100;

pub(crate) fn csinc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

pub(crate) fn csinc_prime(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        z * (-1.0 / 3.0 + z2 / 30.0 - z2 * z2 / 840.0)
    } else {
        (z.cos() - z.sin() / z) / z
    }
}

/// `G(k)` and `G'(k)`. The factor `k` of the raw matching determinant
/// `k cos k + (η - ik) sin k` is divided out so the trivial root at the
/// origin is absent.
pub(crate) fn pole_function(eta: f64, k: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    let s = csinc(k);
    let g = k.cos() + (eta - i * k) * s;
    let dg = -k.sin() - i * s + (eta - i * k) * csinc_prime(k);
    (g, dg)
}

/// Damped Newton iteration on `f` from `seed`.
pub(crate) fn newton<F>(f: F, seed: Complex64, residual: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> (Complex64, Complex64),
{
    let fail = |reason: String| DecayError::SearchFailure { seed, reason };
    let mut k = seed;
    let (mut g, mut dg) = f(k);
    for _ in 0..MAX_NEWTON {
        if dg.norm() == 0.0 || !dg.norm().is_finite() {
            return Err(fail(format!("vanishing derivative at {k}")));
        }
        let step = g / dg;
        let mut lambda = 1.0;
        let mut trial = k - step;
        let (mut tg, mut tdg) = f(trial);
        while tg.norm() > g.norm() && lambda > 1e-6 {
            lambda *= 0.5;
            trial = k - step * lambda;
            (tg, tdg) = f(trial);
        }
        let moved = (trial - k).norm();
        k = trial;
        g = tg;
        dg = tdg;
        if !(k.re.is_finite() && k.im.is_finite()) {
            return Err(fail("iterate left the finite plane".into()));
        }
        if moved <= 4.0 * f64::EPSILON * k.norm().max(1.0) || g.norm() == 0.0 {
            break;
        }
    }
    if g.norm() > residual {
        return Err(fail(format!("residual {:e} at {k} exceeds {residual:e}", g.norm())));
    }
    Ok(k)
}

/// The `n`-th pole, the one with `Re k` in `((n-1)π, nπ]`.
pub(crate) fn pole_n(eta: f64, n: u32) -> Result<Complex64> {
    let np = n as f64 * PI;
    let far = -0.5 * (2.0 * np / eta).ln().max(0.0);
    let mut re_seeds = vec![np - PI / 4.0, np - 0.05];
    if eta > 1.0 {
        re_seeds.insert(0, np * (1.0 - 1.0 / eta));
    }
    let im_seeds = [-0.05, -0.2, -0.5, -1.0, -2.0, far - 0.1];
    let primary = Complex64::new(re_seeds[0], im_seeds[0]);
    let mut last_reason = String::from("no seed converged inside the strip");
    for &re in &re_seeds {
        for &im in &im_seeds {
            let seed = Complex64::new(re, im);
            match newton(|k| pole_function(eta, k), seed, ROOT_RESIDUAL) {
                Ok(k) if k.re > np - PI && k.re <= np && k.im < 0.0 => return Ok(k),
                Ok(k) => last_reason = format!("converged to {k}, outside the strip"),
                Err(e) => last_reason = e.to_string(),
            }
        }
    }
    Err(DecayError::SearchFailure { seed: primary, reason: last_reason })
}
