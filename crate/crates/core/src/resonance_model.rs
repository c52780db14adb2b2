//! Survival amplitude of a single isolated resonance, evaluated two
//! independent ways: a closed form in Faddeeva functions and a
//! steepest-descent contour integral.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::complexfn::faddeeva;
use crate::error::{domain, Result};
use crate::quadrature::integrate;

/// Half-length of the steepest-descent ray in the scaled variable `s`;
/// `exp(-S_MAX²) < 1e-16`.
const S_MAX: f64 = 6.07;
const CONTOUR_TOL: f64 = 1e-13;

/// A decaying resonance `k_r` in the open fourth quadrant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonancePole {
    k_r: Complex64,
}

/// Arrangement of the Faddeeva terms in the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClosedFormConvention {
    /// `D e^{y_r²} - ½ D w(-i y_r) + ½ D* w(i y_{-r})`: equals one at
    /// `T = 0` and agrees with the contour integral.
    #[default]
    Validated,
    /// `½ D e^{-y_r²} - ½ [D w(-y_r) + D* w(y_{-r})]`, the arrangement read
    /// literally. It evaluates to `-D*/2` at `T = 0`.
    Literal,
}

impl ResonancePole {
    pub fn new(k_r: Complex64) -> Result<Self> {
        if !(k_r.re > 0.0 && k_r.im < 0.0) || !k_r.re.is_finite() || !k_r.im.is_finite() {
            return domain(format!("resonance pole must satisfy Re k > 0 > Im k, got {k_r}"));
        }
        Ok(Self { k_r })
    }

    pub fn k_r(&self) -> Complex64 {
        self.k_r
    }

    /// `ε_r = Re(k_r²)`
    pub fn eps_r(&self) -> f64 {
        (self.k_r * self.k_r).re
    }

    /// `Γ_r = -2 Im(k_r²)`
    pub fn gamma_r(&self) -> f64 {
        -2.0 * (self.k_r * self.k_r).im
    }

    /// `D_r = k_r / Re k_r`
    pub fn d_r(&self) -> Complex64 {
        self.k_r / self.k_r.re
    }

    /// `y_r = -e^{-iπ/4} k_r √T`
    pub fn y_r(&self, t: f64) -> Complex64 {
        -Complex64::from_polar(t.sqrt(), -FRAC_PI_4) * self.k_r
    }

    /// `y_{-r} = e^{-iπ/4} k_r* √T`
    pub fn y_minus_r(&self, t: f64) -> Complex64 {
        Complex64::from_polar(t.sqrt(), -FRAC_PI_4) * self.k_r.conj()
    }

    /// `A(k) = 2k [D/(k - k_r) + D*/(k + k_r*)]`.
    pub fn form_factor(&self, k: Complex64) -> Result<Complex64> {
        let d = self.d_r();
        let p1 = k - self.k_r;
        let p2 = k + self.k_r.conj();
        let scale = 1e-14 * self.k_r.norm();
        if p1.norm() <= scale || p2.norm() <= scale {
            return domain(format!("form_factor: k = {k} coincides with a pole"));
        }
        Ok(2.0 * k * (d / p1 + d.conj() / p2))
    }

    /// Contour-integral survival amplitude. The real-line integral
    /// `(i/2π) ∫ e^{-ik²T} [D/(k - k_r) + D*/(k + k_r*)] dk` is rotated onto
    /// the ray `k = e^{-iπ/4} s/√T`, where the kernel becomes `e^{-s²}`; the
    /// residue at `k_r` is added when the rotation sweeps across it.
    pub fn survival_amplitude_contour(&self, t: f64) -> Result<Complex64> {
        if t == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        if !(t > 0.0) || !t.is_finite() {
            return domain(format!("contour survival amplitude needs T > 0, got {t}"));
        }
        let d = self.d_r();
        let rot = Complex64::from_polar(1.0 / t.sqrt(), -FRAC_PI_4);
        // Pole positions in the s variable.
        let s1 = self.k_r / rot;
        let s2 = -self.k_r.conj() / rot;
        let integrand = |s: f64| {
            let k = rot * s;
            (-s * s).exp() * rot * (d / (k - self.k_r) + d.conj() / (k + self.k_r.conj()))
        };
        // Geometrically graded edges around each pole keep the panels
        // resolving the near-singular factor even as T → 0.
        let mut breaks = Vec::new();
        for p in [s1, s2] {
            let mut w = 0.25 * p.im.abs().max(1e-300);
            breaks.push(p.re);
            while w < 2.0 * S_MAX {
                for b in [p.re - w, p.re + w] {
                    if b > -S_MAX && b < S_MAX {
                        breaks.push(b);
                    }
                }
                w *= 2.0;
            }
        }
        breaks.push(-S_MAX);
        breaks.push(S_MAX);
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        let panels: Vec<(f64, f64)> = breaks.windows(2).map(|w| (w[0], w[1])).collect();
        let (line, _) = integrate(&integrand, &panels, CONTOUR_TOL);
        let mut a = Complex64::new(0.0, 1.0 / (2.0 * PI)) * line;
        if self.k_r.arg() > -FRAC_PI_4 {
            a += d * (Complex64::new(0.0, -t) * self.k_r * self.k_r).exp();
        }
        Ok(a)
    }

    /// Closed-form survival amplitude under the chosen convention.
    pub fn survival_amplitude_closed_form(&self, t: f64, convention: ClosedFormConvention) -> Result<Complex64> {
        if !(t >= 0.0) || !t.is_finite() {
            return domain(format!("closed-form survival amplitude needs T >= 0, got {t}"));
        }
        let d = self.d_r();
        let yr = self.y_r(t);
        let ymr = self.y_minus_r(t);
        let i = Complex64::new(0.0, 1.0);
        match convention {
            ClosedFormConvention::Validated => {
                if t == 0.0 {
                    return Ok(Complex64::new(1.0, 0.0));
                }
                let decay = (yr * yr).exp();
                Ok(d * decay - 0.5 * d * faddeeva(-i * yr)? + 0.5 * d.conj() * faddeeva(i * ymr)?)
            }
            ClosedFormConvention::Literal => {
                let g = (-yr * yr).exp();
                Ok(0.5 * d * g - 0.5 * (d * faddeeva(-yr)? + d.conj() * faddeeva(ymr)?))
            }
        }
    }

    /// Closed form under the validated convention.
    pub fn survival_amplitude(&self, t: f64) -> Result<Complex64> {
        self.survival_amplitude_closed_form(t, ClosedFormConvention::Validated)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pole(re: f64, im: f64) -> ResonancePole {
        ResonancePole::new(Complex64::new(re, im)).unwrap()
    }

    #[test]
    fn derived_quantities() {
        let p = pole(3.0, -0.05);
        assert_eq!(p.d_r().re, 1.0);
        assert!((p.gamma_r() - 0.6).abs() < 1e-15);
        assert!((p.eps_r() - (9.0 - 0.0025)).abs() < 1e-15);
    }

    #[test]
    fn rejects_poles_outside_fourth_quadrant() {
        assert!(ResonancePole::new(Complex64::new(3.0, 0.05)).is_err());
        assert!(ResonancePole::new(Complex64::new(-3.0, -0.05)).is_err());
        assert!(ResonancePole::new(Complex64::new(3.0, 0.0)).is_err());
    }

    #[test]
    fn form_factor_values() {
        let p = pole(1.0, -0.1);
        assert_eq!(p.form_factor(Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
        let far = p.form_factor(Complex64::new(1e9, 0.0)).unwrap();
        assert!((far - 4.0).norm() < 1e-8);
        let v = p.form_factor(2.0 * p.k_r()).unwrap();
        let want = Complex64::new(5.345_172_031_076_581_577_3, -0.355_160_932_297_447_300_47);
        assert!((v - want).norm() < 1e-14, "{v}");
        assert!(p.form_factor(p.k_r()).is_err());
        assert!(p.form_factor(-p.k_r().conj()).is_err());
    }

    #[test]
    fn closed_form_is_one_at_origin() {
        let p = pole(3.0, -0.05);
        assert_eq!(p.survival_amplitude(0.0).unwrap(), Complex64::new(1.0, 0.0));
        let lit = p.survival_amplitude_closed_form(0.0, ClosedFormConvention::Literal).unwrap();
        assert!((lit + 0.5 * p.d_r().conj()).norm() < 1e-15);
    }

    #[test]
    fn contour_and_closed_form_agree() {
        for p in [pole(3.0, -0.05), pole(2.710_381_731_823_882, -0.177_999_234_346_025_4), pole(1.0, -0.8)] {
            for i in 0..30 {
                let t = 1e-3 * 1.5f64.powi(i);
                let a = p.survival_amplitude_contour(t).unwrap();
                let b = p.survival_amplitude(t).unwrap();
                assert!((a - b).norm() < 1e-10, "k={} T={t}: {a} vs {b}", p.k_r());
            }
        }
    }

    #[test]
    fn contour_near_zero_time() {
        let p = pole(3.0, -0.05);
        // 1 - |A| grows like √T for this form factor.
        let a = p.survival_amplitude_contour(1e-20).unwrap();
        assert!((a.norm() - 1.0).abs() < 1e-8);
        assert!(p.survival_amplitude_contour(-1.0).is_err());
    }

    #[test]
    fn exponential_window() {
        let p = pole(3.0, -0.05);
        assert!(p.k_r().arg() > -FRAC_PI_4);
        let t = 3.0 / p.gamma_r();
        let s = p.survival_amplitude(t).unwrap().norm_sqr();
        assert!((s / (-3.0f64).exp() - 1.0).abs() < 0.01);
    }
}
