//! Closed-form propagation on the free half-line `x > 0` with a Dirichlet
//! wall, built by odd extension and the full-line kernel
//! `K(ξ, t) = exp(iξ²/4t) / √(4πit)`.
//!
//! Every quantity reduces to the chirp moments
//! `Φ(a, b; γ) = ∫_a^b exp(iγξ) K dξ` and `Ψ(a, b; γ) = ∫_a^b ξ exp(iγξ) K dξ`,
//! which are error-function differences along the ray `arg s = -π/4`.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use num_complex::Complex64;

use crate::complexfn::faddeeva_upper;
use crate::error::{domain, Result};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `erfc(exp(-iπ/4)·r)` for `r >= 0`.
fn erfc_ray(r: f64) -> Complex64 {
    let z = Complex64::from_polar(r, FRAC_PI_4);
    Complex64::from_polar(1.0, r * r) * faddeeva_upper(z)
}

/// `erf(exp(-iπ/4)·rb) - erf(exp(-iπ/4)·ra)` for `ra <= rb`, arranged so
/// that only `erfc` on the non-negative ray is ever evaluated.
fn erf_ray_difference(ra: f64, rb: f64) -> Complex64 {
    if ra >= 0.0 {
        erfc_ray(ra) - erfc_ray(rb)
    } else if rb <= 0.0 {
        erfc_ray(-rb) - erfc_ray(-ra)
    } else {
        c(2.0, 0.0) - erfc_ray(rb) - erfc_ray(-ra)
    }
}

/// Returns `(Φ, Ψ)` on `[a, b]` for `t > 0`.
fn chirp_moments(a: f64, b: f64, gamma: f64, t: f64) -> (Complex64, Complex64) {
    let st = t.sqrt();
    let ra = (a + 2.0 * gamma * t) / (2.0 * st);
    let rb = (b + 2.0 * gamma * t) / (2.0 * st);
    let phi = Complex64::from_polar(0.5, -gamma * gamma * t) * erf_ray_difference(ra, rb);
    let edge = |xi: f64| Complex64::from_polar(1.0, xi * xi / (4.0 * t) + gamma * xi);
    let psi = -Complex64::from_polar((t / PI).sqrt(), FRAC_PI_4) * (edge(b) - edge(a)) - 2.0 * gamma * t * phi;
    (phi, psi)
}

/// Free evolution of the box state `√2 sin(nπx)` (supported on `[0, 1]`),
/// evaluated at `(x, t)`.
pub fn free_wavefunction(n: u32, x: f64, t: f64) -> Result<Complex64> {
    if n == 0 || x < 0.0 || t < 0.0 || !x.is_finite() || !t.is_finite() {
        return domain(format!("free_wavefunction: invalid (n={n}, x={x}, t={t})"));
    }
    let g = n as f64 * PI;
    if t == 0.0 {
        let v = if x <= 1.0 { SQRT_2 * (g * x).sin() } else { 0.0 };
        return Ok(c(v, 0.0));
    }
    let (p_plus, _) = chirp_moments(-1.0 - x, 1.0 - x, g, t);
    let (p_minus, _) = chirp_moments(-1.0 - x, 1.0 - x, -g, t);
    let v = Complex64::from_polar(1.0, g * x) * p_plus - Complex64::from_polar(1.0, -g * x) * p_minus;
    Ok(v * c(0.0, -SQRT_2 / 2.0))
}

/// `⟨E_n| exp(-iH₀t) |E_l⟩` for the free half-line with box states
/// `E_n = √2 sin(nπx)` on `[0, 1]`.
pub fn free_matrix_element(n: u32, l: u32, t: f64) -> Result<Complex64> {
    if n == 0 || l == 0 || t < 0.0 || !t.is_finite() {
        return domain(format!("free_matrix_element: invalid (n={n}, l={l}, t={t})"));
    }
    if t == 0.0 {
        return Ok(c(if n == l { 1.0 } else { 0.0 }, 0.0));
    }
    // The odd-extended autocorrelation G(ξ) = 2∫ sin(nπx) sin(lπ(x-ξ)) dx is a
    // sum of (α + βξ)exp(iγξ) pieces on [-2, 0] and [0, 2].
    let (ni, li) = (n as i64, l as i64);
    let mut sum = c(0.0, 0.0);
    for sigma in [-1i64, 1] {
        for tau in [-1i64, 1] {
            let pref = -0.5 * (sigma * tau) as f64;
            let m = sigma * ni + tau * li;
            let g_l = -(tau * li) as f64 * PI;
            let g_m = (sigma * ni) as f64 * PI;
            let mut add = |seg: (f64, f64), alpha: Complex64, beta: f64, gamma: f64| {
                let (phi, psi) = chirp_moments(seg.0, seg.1, gamma, t);
                sum += alpha * phi + beta * psi;
            };
            if m != 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let k = pref * sign / c(0.0, m as f64 * PI);
                add((0.0, 2.0), k, 0.0, g_l);
                add((0.0, 2.0), -k, 0.0, g_m);
                add((-2.0, 0.0), k, 0.0, g_m);
                add((-2.0, 0.0), -k, 0.0, g_l);
            } else {
                add((0.0, 2.0), c(2.0 * pref, 0.0), -pref, g_l);
                add((-2.0, 0.0), c(2.0 * pref, 0.0), pref, g_l);
            }
        }
    }
    Ok(0.5 * sum)
}
