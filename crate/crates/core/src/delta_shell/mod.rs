//! Half-line particle behind a delta barrier `η δ(x - 1)` with a Dirichlet
//! wall at the origin (units ħ = 2m = 1), propagated through its
//! delta-normalized continuum `φ_k`.
//!
//! Every spectral integral is split into the free half-line part, which has
//! a closed form (see [`free`]), and the remainder carried by `a(k)² - 1`.
//! The remainder decays like `k⁻⁵` (amplitudes) or `k⁻³` (wavefunctions)
//! and is integrated with chirp-resolving Gauss–Kronrod panels up to a
//! time-dependent cutoff.

pub mod free;
mod poles;

use std::f64::consts::{FRAC_2_SQRT_PI, PI};

use num_complex::Complex64;

use crate::curve::SurvivalCurve;
use crate::error::{domain, DecayError, Result};
use crate::quadrature::{chirp_panels, composite_gauss_legendre, integrate_panels, Integral};

pub(crate) use poles::{csinc, csinc_prime, newton};

/// `√(2/π)`
const NORM: f64 = 0.797_884_560_802_865_4;

const AMPLITUDE_TOL: f64 = 1e-11;
const WAVE_TOL: f64 = 1e-10;
/// Estimated quadrature error above which a result is reported as not
/// converged.
const MAX_REPORTED_ERROR: f64 = 1e-7;
const MAX_PANEL: f64 = 0.5;
/// Number of poles used as quadrature breakpoints.
const BREAK_POLES: u32 = 6;

/// Composite Gauss–Legendre layout over the inner region `[0, 1]`.
pub(crate) const INNER_PIECES: usize = 4;
pub(crate) const INNER_ORDER: usize = 16;

pub(crate) fn sinc(d: f64) -> f64 {
    if d.abs() < 1e-4 {
        let d2 = d * d;
        1.0 - d2 / 6.0 + d2 * d2 / 120.0
    } else {
        d.sin() / d
    }
}

/// Overlap of the free continuum state `√(2/π) sin kx` with the box state
/// `√2 sin(nπx)`.
pub(crate) fn free_box_overlap(n: u32, k: f64) -> f64 {
    let g = n as f64 * PI;
    FRAC_2_SQRT_PI * g * sinc(k - g) / (k + g)
}

/// Momentum cutoff for amplitude integrals. With `|a²-1| c̃_n c̃_l <~ 8πη/k⁵`
/// one integration by parts bounds the discarded tail by about
/// `4πη / (K⁶ t)`, below 1e-9 for `η <= 5` once `K >= 80 + 8/t`. At `t = 0`
/// the tail is oscillatory with envelope `2πη/K⁴`, and `K = 1000` is used.
fn amplitude_cutoff(t: f64, n_max: u32) -> f64 {
    let base = if t > 0.0 { (80.0 + 8.0 / t).min(1000.0) } else { 1000.0 };
    base.max(n_max as f64 * PI + 40.0)
}

/// Momentum cutoff for wavefunctions, whose remainder decays only as `k⁻³`:
/// the tail after one integration by parts is about `14η / (K⁴ t)`.
fn wave_cutoff(t: f64, n_max: u32) -> f64 {
    let base = if t > 0.0 { (80.0 + 8.0 / t).max(200.0 * t.powf(-0.25)).min(4000.0) } else { 4000.0 };
    base.max(n_max as f64 * PI + 40.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumState {
    pub k: f64,
    pub inside_amplitude: f64,
    pub phase_shift: f64,
}

impl ContinuumState {
    /// `φ_k(x)`: `√(2/π) a sin kx` inside, `√(2/π) sin(kx + δ)` outside.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 1.0 {
            NORM * self.inside_amplitude * (self.k * x).sin()
        } else {
            NORM * (self.k * x + self.phase_shift).sin()
        }
    }
}

/// Delta-shell model with barrier strength `η >= 0` at `x = 1`.
#[derive(Debug, Clone)]
pub struct DeltaShellSystem {
    eta: f64,
    breaks: Vec<f64>,
}

impl DeltaShellSystem {
    pub fn new(eta: f64) -> Result<Self> {
        if !eta.is_finite() || eta < 0.0 {
            return domain(format!("delta shell: barrier strength must be finite and >= 0, got {eta}"));
        }
        let mut breaks = Vec::new();
        if eta > 0.0 {
            for n in 1..=BREAK_POLES {
                if let Ok(k) = poles::pole_n(eta, n) {
                    let w = 0.5 * k.im.abs();
                    breaks.extend((-6..=6).map(|j| k.re + j as f64 * w).filter(|&b| b > 0.0));
                }
            }
        }
        Ok(Self { eta, breaks })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `1 + η sinc(k) e^{-ik}`, whose modulus and argument give `1/a` and `δ`.
    fn jost_factor(&self, k: f64) -> Complex64 {
        1.0 + self.eta * sinc(k) * Complex64::from_polar(1.0, -k)
    }

    /// `a(k)² - 1` without cancellation.
    fn a2_minus_one(&self, k: f64) -> f64 {
        let s = sinc(k);
        let num = 2.0 * self.eta * s * k.cos() + self.eta * self.eta * s * s;
        -num / (1.0 + num)
    }

    pub fn continuum_state(&self, k: f64) -> Result<ContinuumState> {
        if !(k > 0.0) || !k.is_finite() {
            return domain(format!("continuum_state: k must be positive, got {k}"));
        }
        let f = self.jost_factor(k);
        Ok(ContinuumState { k, inside_amplitude: 1.0 / f.norm(), phase_shift: f.arg() })
    }

    /// `⟨φ_k|ψ₀⟩` for `ψ₀ = √2 sin(πx)` on `[0, 1]`.
    pub fn initial_overlap(&self, k: f64) -> Result<f64> {
        self.box_overlap(1, k)
    }

    /// `⟨φ_k|E_n⟩` for the box state `E_n = √2 sin(nπx)`.
    pub fn box_overlap(&self, n: u32, k: f64) -> Result<f64> {
        if n == 0 {
            return domain("box_overlap: n must be >= 1");
        }
        let st = self.continuum_state(k)?;
        Ok(st.inside_amplitude * free_box_overlap(n, k))
    }

    /// `A(t) = ∫ c(k)² exp(-ik²t) dk`.
    pub fn survival_amplitude(&self, t: f64) -> Result<Complex64> {
        Ok(self.propagator_column(1, 1, t)?[0])
    }

    pub fn survival_curve(&self, times: &[f64]) -> Result<SurvivalCurve> {
        let amps = times.iter().map(|&t| self.survival_amplitude(t)).collect::<Result<Vec<_>>>()?;
        SurvivalCurve::new(times.iter().copied().zip(amps))
    }

    /// `⟨E_n| exp(-iHt) |E_l⟩`.
    pub fn propagator_matrix_element(&self, n: u32, l: u32, t: f64) -> Result<Complex64> {
        if n == 0 {
            return domain("propagator_matrix_element: n must be >= 1");
        }
        let col = self.propagator_column(l, n, t)?;
        Ok(col[n as usize - 1])
    }

    /// `⟨E_n| exp(-iHt) |E_l⟩` for `n = 1..=n_max`.
    pub fn propagator_column(&self, l: u32, n_max: u32, t: f64) -> Result<Vec<Complex64>> {
        if l == 0 || n_max == 0 {
            return domain("propagator_column: indices must be >= 1");
        }
        if !(t >= 0.0) || !t.is_finite() {
            return domain(format!("propagation time must be finite and >= 0, got {t}"));
        }
        let dim = n_max as usize;
        let hi = amplitude_cutoff(t, n_max.max(l));
        let panels = chirp_panels(0.0, hi, t, 4.0, MAX_PANEL, &self.breaks);
        let f = |k: f64, out: &mut [Complex64]| {
            let w = self.a2_minus_one(k) * free_box_overlap(l, k);
            let chirp = Complex64::from_polar(w, -k * k * t);
            for (n, o) in out.iter_mut().enumerate() {
                *o = chirp * free_box_overlap(n as u32 + 1, k);
            }
        };
        let r = integrate_panels(&f, &panels, dim, AMPLITUDE_TOL);
        check_error(&r, "propagator matrix elements")?;
        (1..=n_max)
            .zip(r.values)
            .map(|(n, v)| Ok(free::free_matrix_element(n, l, t)? + v))
            .collect()
    }

    /// `ψ(x, t)` evolved from `ψ₀`.
    pub fn wavefunction(&self, x: f64, t: f64) -> Result<Complex64> {
        Ok(self.evolve_box_states(1, &[x], t)?[0][0])
    }

    /// Box states `E_1..E_{n_max}` evolved for time `t` and sampled at `xs`;
    /// entry `[j][i]` is `(e^{-iHt} E_{j+1})(xs[i])`.
    pub fn evolve_box_states(&self, n_max: u32, xs: &[f64], t: f64) -> Result<Vec<Vec<Complex64>>> {
        if n_max == 0 {
            return domain("evolve_box_states: n_max must be >= 1");
        }
        if !(t >= 0.0) || !t.is_finite() {
            return domain(format!("propagation time must be finite and >= 0, got {t}"));
        }
        if let Some(&x) = xs.iter().find(|&&x| !(x >= 0.0) || !x.is_finite()) {
            return domain(format!("position must be finite and >= 0, got {x}"));
        }
        let nj = n_max as usize;
        let nx = xs.len();
        if nx == 0 {
            return Ok(vec![Vec::new(); nj]);
        }
        let x_max = xs.iter().copied().fold(0.0, f64::max);
        let hi = wave_cutoff(t, n_max);
        let panels = chirp_panels(0.0, hi, t, 4.0 + x_max, MAX_PANEL, &self.breaks);
        let f = |k: f64, out: &mut [Complex64]| {
            let a2m1 = self.a2_minus_one(k);
            let outside = 1.0 / self.jost_factor(k).conj();
            let g: Vec<f64> = xs
                .iter()
                .map(|&x| {
                    if x <= 1.0 {
                        NORM * a2m1 * (k * x).sin()
                    } else {
                        NORM * ((outside * Complex64::from_polar(1.0, k * x)).im - (k * x).sin())
                    }
                })
                .collect();
            let chirp = Complex64::from_polar(1.0, -k * k * t);
            for j in 0..nj {
                let cj = chirp * free_box_overlap(j as u32 + 1, k);
                for (i, &gi) in g.iter().enumerate() {
                    out[j * nx + i] = cj * gi;
                }
            }
        };
        let r = integrate_panels(&f, &panels, nj * nx, WAVE_TOL);
        check_error(&r, "evolved wavefunction")?;
        let mut out = Vec::with_capacity(nj);
        for j in 0..nj {
            let row = xs
                .iter()
                .enumerate()
                .map(|(i, &x)| Ok(free::free_wavefunction(j as u32 + 1, x, t)? + r.values[j * nx + i]))
                .collect::<Result<Vec<_>>>()?;
            out.push(row);
        }
        Ok(out)
    }

    /// `N(t) = ∫₀¹ |ψ(x, t)|² dx`, the probability of remaining inside the
    /// barrier.
    pub fn nonescape_probability(&self, t: f64) -> Result<f64> {
        let rule = composite_gauss_legendre(0.0, 1.0, INNER_PIECES, INNER_ORDER);
        let xs: Vec<f64> = rule.iter().map(|p| p.0).collect();
        let psi = self.evolve_box_states(1, &xs, t)?;
        Ok(rule.iter().zip(&psi[0]).map(|(&(_, w), v)| w * v.norm_sqr()).sum())
    }

    /// The first `count` outgoing-wave poles, ordered by real part.
    pub fn find_resonance_poles(&self, count: usize) -> Result<Vec<Complex64>> {
        if !(self.eta > 0.0) {
            return domain("find_resonance_poles: requires eta > 0");
        }
        (1..=count as u32).map(|n| poles::pole_n(self.eta, n)).collect()
    }
}

fn check_error(r: &Integral, what: &str) -> Result<()> {
    if r.error > MAX_REPORTED_ERROR || r.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(DecayError::Convergence(format!("{what}: quadrature error estimate {:e}", r.error)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    #[test]
    fn free_limit_has_no_phase_shift() {
        let sys = DeltaShellSystem::new(0.0).unwrap();
        for &k in &[0.1, 1.0, PI, 17.3] {
            let st = sys.continuum_state(k).unwrap();
            assert_eq!(st.inside_amplitude, 1.0);
            assert_eq!(st.phase_shift, 0.0);
        }
    }

    #[test]
    fn eta_five_at_pi_matches_linear_solve_oracle() {
        let st = DeltaShellSystem::new(5.0).unwrap().continuum_state(PI).unwrap();
        assert!((st.inside_amplitude - 1.0).abs() < 1e-15);
        assert!(st.phase_shift.abs() < 1e-15);
    }

    #[test]
    fn matching_conditions_hold() {
        let eta = 5.0;
        let sys = DeltaShellSystem::new(eta).unwrap();
        for i in 1..400 {
            let k = 0.037 * i as f64;
            let st = sys.continuum_state(k).unwrap();
            let a = st.inside_amplitude;
            let d = st.phase_shift;
            assert!((a * k.sin() - (k + d).sin()).abs() < 1e-12);
            assert!((k * a * k.cos() + eta * a * k.sin() - k * (k + d).cos()).abs() < 1e-12 * k.max(1.0));
            assert!(d <= 0.0 && d > -PI);
        }
    }

    #[test]
    fn overlap_at_two_matches_quadrature_oracle() {
        let c = DeltaShellSystem::new(5.0).unwrap().initial_overlap(2.0).unwrap();
        assert!((c - 0.265_584_056_927_229_631_68).abs() < 1e-14, "{c}");
    }

    #[test]
    fn overlap_removable_point_is_smooth() {
        let sys = DeltaShellSystem::new(5.0).unwrap();
        let at = sys.initial_overlap(PI).unwrap();
        let near = sys.initial_overlap(PI + 2e-4).unwrap();
        let below = sys.initial_overlap(PI + 0.5e-4).unwrap();
        assert!((at - near).abs() < 1e-3);
        assert!((at - below).abs() < 1e-4);
        assert!((at - 1.0 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn strong_barrier_concentrates_overlap_near_pi() {
        let sys = DeltaShellSystem::new(500.0).unwrap();
        let panels = chirp_panels(0.0, 2.0 * PI, 0.0, 1.0, 0.01, &[]);
        let near = |k: f64| Complex64::new(sys.initial_overlap(k).unwrap().powi(2), 0.0);
        let (inner, _) = integrate(&near, &[(PI - 0.1, PI + 0.1)], 1e-12);
        let (total, _) = integrate(&near, &panels, 1e-12);
        assert!(inner.re / total.re > 0.99);
    }

    #[test]
    fn parseval_and_initial_amplitude() {
        for &eta in &[0.0, 2.0, 5.0, 10.0] {
            let a0 = DeltaShellSystem::new(eta).unwrap().survival_amplitude(0.0).unwrap();
            assert!((a0 - 1.0).norm() < 1e-8, "eta={eta}: {a0}");
        }
    }

    #[test]
    fn orthonormality_at_time_zero() {
        let sys = DeltaShellSystem::new(5.0).unwrap();
        let col = sys.propagator_column(2, 4, 0.0).unwrap();
        for (n, v) in col.iter().enumerate() {
            let want = if n == 1 { 1.0 } else { 0.0 };
            assert!((v - want).norm() < 1e-6, "n={} {v}", n + 1);
        }
        assert!((sys.propagator_matrix_element(3, 3, 0.0).unwrap() - 1.0).norm() < 1e-6);
    }

    #[test]
    fn matrix_element_one_one_is_survival() {
        let sys = DeltaShellSystem::new(5.0).unwrap();
        let a = sys.survival_amplitude(1.3).unwrap();
        let m = sys.propagator_matrix_element(1, 1, 1.3).unwrap();
        assert_eq!(a, m);
    }

    #[test]
    fn wavefunction_reproduces_initial_state() {
        let sys = DeltaShellSystem::new(5.0).unwrap();
        let xs: Vec<f64> = (0..=40).map(|i| 0.05 * i as f64).collect();
        let psi = sys.evolve_box_states(1, &xs, 0.0).unwrap();
        for (&x, v) in xs.iter().zip(&psi[0]) {
            let want = if x <= 1.0 { 2f64.sqrt() * (PI * x).sin() } else { 0.0 };
            assert!((v - want).norm() < 1e-6, "x={x}: {v}");
        }
    }

    #[test]
    fn wall_is_dirichlet() {
        let sys = DeltaShellSystem::new(5.0).unwrap();
        for &t in &[0.1, 1.0, 4.0] {
            assert!(sys.wavefunction(0.0, t).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn nonescape_bounds_survival() {
        let sys = DeltaShellSystem::new(5.0).unwrap();
        assert!((sys.nonescape_probability(0.0).unwrap() - 1.0).abs() < 1e-6);
        for &t in &[0.2, 1.0, 3.0] {
            let n = sys.nonescape_probability(t).unwrap();
            let s = sys.survival_amplitude(t).unwrap().norm_sqr();
            assert!(s <= n + 1e-12 && n <= 1.0 + 1e-9, "t={t}: S={s} N={n}");
        }
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(DeltaShellSystem::new(-1.0).is_err());
        let sys = DeltaShellSystem::new(5.0).unwrap();
        assert!(sys.continuum_state(0.0).is_err());
        assert!(sys.survival_amplitude(-1.0).is_err());
        assert!(sys.wavefunction(-0.1, 1.0).is_err());
        assert!(DeltaShellSystem::new(0.0).unwrap().find_resonance_poles(1).is_err());
    }
}
