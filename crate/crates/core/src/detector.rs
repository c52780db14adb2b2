//! Delta barrier plus absorbing potential `-iV₀` for `x >= 1`.
//!
//! Eigenfunctions with energy `E = q² - iV₀` have outside wavenumber `q`
//! and inside wavenumber `k = √(q² - iV₀)` (principal root). The
//! Hamiltonian is complex symmetric, so biorthogonal partners are the
//! unconjugated eigenfunctions and all overlaps are c-products
//! `∫ f g dx`.
//!
//! The survival amplitude combines localized states (roots with
//! `Im q > 0`) and the continuum `q > 0`. The continuum weight `c(q)²`
//! depends on `k` only through `k²`, so it is free of branch ambiguity.

use std::f64::consts::{FRAC_2_SQRT_PI, PI};

use num_complex::Complex64;

use crate::delta_shell::free::free_matrix_element;
use crate::delta_shell::{csinc, csinc_prime, free_box_overlap, newton, DeltaShellSystem};
use crate::error::{domain, DecayError, Result};
use crate::quadrature::{chirp_panels, integrate_panels};

const ROOT_RESIDUAL: f64 = 1e-12;
const NORM_RESIDUAL: f64 = 1e-10;
const COMPLETENESS_TOL: f64 = 1e-6;
const AMPLITUDE_TOL: f64 = 1e-11;
const MAX_REPORTED_ERROR: f64 = 1e-7;
/// Largest absorber increment per continuation step when tracking a pole.
const CONTINUATION_STEP: f64 = 0.05;
/// Resonances tracked from the Hermitian model into the absorber.
const TRACKED_POLES: u32 = 4;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Rectangle of the upper-half `q` plane searched for localized states,
/// seeded by a uniform `re_seeds × im_seeds` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub re_seeds: usize,
    pub im_seeds: usize,
}

impl Default for SearchRegion {
    fn default() -> Self {
        Self { re_min: 0.0, re_max: 4.0 * PI, im_min: 1e-10, im_max: 3.0, re_seeds: 40, im_seeds: 20 }
    }
}

impl SearchRegion {
    fn contains(&self, q: Complex64) -> bool {
        q.re > self.re_min && q.re <= self.re_max && q.im > self.im_min && q.im <= self.im_max
    }
}

/// Right eigenfunction for real `q > 0`: `C₁(e^{ikx} - e^{-ikx})` inside,
/// `e^{-iqx} - 𝒮 e^{iqx}` outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorScatteringState {
    pub q: f64,
    pub k: Complex64,
    pub c1: Complex64,
    pub s_coef: Complex64,
    /// Inside amplitude of the c-normalized state, `√(2/π) α sin kx`,
    /// with the root chosen so that `Re α >= 0`.
    pub alpha: Complex64,
}

impl DetectorScatteringState {
    pub fn eval(&self, x: f64) -> Complex64 {
        if x <= 1.0 {
            c(0.0, 2.0) * self.c1 * (self.k * x).sin()
        } else {
            Complex64::from_polar(1.0, -self.q * x) - self.s_coef * Complex64::from_polar(1.0, self.q * x)
        }
    }

    /// Unconjugated overlap of the c-normalized state with `ψ₀ = √2 sin πx`.
    pub fn c_overlap(&self) -> Complex64 {
        self.c_overlap_box(1)
    }

    /// Unconjugated overlap with the box state `√2 sin(nπx)`.
    pub fn c_overlap_box(&self, n: u32) -> Complex64 {
        self.alpha * box_factor(n, self.k)
    }
}

/// `∫₀¹ √(2/π) sin(kx) √2 sin(nπx) dx`
fn box_factor(n: u32, k: Complex64) -> Complex64 {
    let g = n as f64 * PI;
    FRAC_2_SQRT_PI * g * csinc(k - g) / (k + g)
}

/// Square-integrable eigenfunction: `b sin kx` inside, `e^{iqx}` outside,
/// scaled by `1/√𝒩` so that `⟨û|u⟩ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizedState {
    pub q: Complex64,
    pub k: Complex64,
    pub energy: Complex64,
    pub inside: Complex64,
    pub outside: Complex64,
    /// `|⟨û|u⟩ - 1|` recomputed from the stored coefficients.
    pub norm_residual: f64,
    /// `|G(q)|` at the polished root.
    pub root_residual: f64,
}

impl LocalizedState {
    pub fn eval(&self, x: f64) -> Complex64 {
        if x <= 1.0 {
            self.inside * (self.k * x).sin()
        } else {
            self.outside * (c(0.0, 1.0) * self.q * x).exp()
        }
    }

    /// Unconjugated overlap with `ψ₀ = √2 sin πx`.
    pub fn c_overlap(&self) -> Complex64 {
        self.inside * 2f64.sqrt() * PI * csinc(self.k - PI) / (self.k + PI)
    }

    /// `-2 Im E`
    pub fn width(&self) -> f64 {
        -2.0 * self.energy.im
    }
}

fn c_norm(k: Complex64, q: Complex64, inside: Complex64, outside: Complex64) -> Complex64 {
    let inner = inside * inside * (0.5 - (2.0 * k).sin() / (4.0 * k));
    let outer = outside * outside * c(0.0, 1.0) * (c(0.0, 2.0) * q).exp() / (2.0 * q);
    inner + outer
}

/// Delta barrier `η` with absorber `V₀ >= 0` outside it.
#[derive(Debug, Clone)]
pub struct DetectorSystem {
    eta: f64,
    v0: f64,
    localized: Vec<LocalizedState>,
    tracked: Vec<Complex64>,
    breaks: Vec<f64>,
}

impl DetectorSystem {
    /// Builds the system with the default search region and verifies
    /// biorthogonal completeness at `t = 0`.
    pub fn new(eta: f64, v0: f64) -> Result<Self> {
        Self::with_region(eta, v0, SearchRegion::default())
    }

    pub fn with_region(eta: f64, v0: f64, region: SearchRegion) -> Result<Self> {
        if !eta.is_finite() || eta < 0.0 {
            return domain(format!("detector: barrier strength must be finite and >= 0, got {eta}"));
        }
        if !v0.is_finite() || v0 < 0.0 {
            return domain(format!("detector: absorber strength must be finite and >= 0, got {v0}"));
        }
        let mut sys = Self { eta, v0, localized: Vec::new(), tracked: Vec::new(), breaks: Vec::new() };
        if eta > 0.0 {
            let hermitian = DeltaShellSystem::new(eta)?;
            for n in 1..=TRACKED_POLES {
                if let Ok(k) = hermitian.find_resonance_poles(n as usize).map(|v| v[n as usize - 1]) {
                    if let Ok(q) = sys.continue_pole(k) {
                        sys.tracked.push(q);
                    }
                }
            }
        }
        sys.localized = sys.localized_states(&region)?;
        let mut centers: Vec<Complex64> = sys.tracked.clone();
        centers.extend(sys.localized.iter().map(|s| s.q));
        for p in centers {
            let w = 0.5 * p.im.abs().max(1e-6);
            sys.breaks.extend((-6..=6).map(|j| p.re + j as f64 * w).filter(|&b| b > 0.0));
        }
        let a0 = sys.survival_amplitude(0.0)?;
        if (a0 - 1.0).norm() > COMPLETENESS_TOL {
            return Err(DecayError::Configuration(format!(
                "biorthogonal completeness fails: A(0) = {a0} (|A(0) - 1| = {:e}); localized states may be missing or the q-quadrature is insufficient",
                (a0 - 1.0).norm()
            )));
        }
        Ok(sys)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    /// Localized states found at construction.
    pub fn localized(&self) -> &[LocalizedState] {
        &self.localized
    }

    /// Principal inside wavenumber for outside wavenumber `q`.
    pub fn inside_wavenumber(&self, q: Complex64) -> Complex64 {
        (q * q - c(0.0, self.v0)).sqrt()
    }

    /// Outgoing matching function `G(q) = cos k + (η - iq) sinc k` and its
    /// `q`-derivative. Both are entire in `q`.
    fn matching(&self, q: Complex64) -> (Complex64, Complex64) {
        let k = self.inside_wavenumber(q);
        let i = c(0.0, 1.0);
        let s = csinc(k);
        // (cos k - sinc k)/k², even in k
        let h = if k.norm() < 1e-3 {
            let k2 = k * k;
            -1.0 / 3.0 + k2 / 30.0 - k2 * k2 / 840.0
        } else {
            csinc_prime(k) / k
        };
        let g = k.cos() + (self.eta - i * q) * s;
        let dg = -q * s + (self.eta - i * q) * q * h - i * s;
        (g, dg)
    }

    /// Follows a Hermitian pole `k` (at `V₀ = 0`, where `q = k`) to the
    /// present absorber strength by small continuation steps.
    fn continue_pole(&self, k: Complex64) -> Result<Complex64> {
        let steps = (self.v0 / CONTINUATION_STEP).ceil().max(1.0) as usize;
        let mut q = k;
        for s in 1..=steps {
            let v = self.v0 * s as f64 / steps as f64;
            let stage = Self { eta: self.eta, v0: v, localized: Vec::new(), tracked: Vec::new(), breaks: Vec::new() };
            let k2 = q * q - c(0.0, self.v0 * (s - 1) as f64 / steps as f64);
            let seed = (k2 + c(0.0, v)).sqrt();
            q = newton(|z| stage.matching(z), seed, ROOT_RESIDUAL)?;
        }
        Ok(q)
    }

    /// The delta-shell resonance with real part nearest `π`, continued to
    /// this absorber strength.
    pub fn detector_pole(&self) -> Option<Complex64> {
        self.tracked.first().copied()
    }

    /// `Γ(V₀) = -2 Im(q_p² - iV₀)` for the continued first resonance.
    pub fn detector_width(&self) -> Option<f64> {
        self.detector_pole().map(|q| -2.0 * (q * q - c(0.0, self.v0)).im)
    }

    pub fn scattering_state(&self, q: f64) -> Result<DetectorScatteringState> {
        if !(q > 0.0) || !q.is_finite() {
            return domain(format!("scattering_state: q must be positive, got {q}"));
        }
        let i = c(0.0, 1.0);
        let k = self.inside_wavenumber(c(q, 0.0));
        let s = k.sin();
        let f = k * k.cos() + self.eta * s;
        let minus = f - i * q * s;
        if minus.norm() <= 1e-14 * (f.norm() + q * s.norm()) {
            return domain(format!("scattering_state: singular matching at q = {q}"));
        }
        let eiq = Complex64::from_polar(1.0, -q);
        let b = -2.0 * i * q * eiq / minus;
        let s_coef = eiq * eiq * (f + i * q * s) / minus;
        let alpha2 = q * q / (f * f + q * q * s * s);
        Ok(DetectorScatteringState { q, k, c1: b / (2.0 * i), s_coef, alpha: alpha2.sqrt() })
    }

    /// Squared c-overlap `c(q)²` of the continuum with `ψ₀`, written through
    /// `k²` only.
    fn continuum_weight(&self, q: f64) -> Complex64 {
        let k = self.inside_wavenumber(c(q, 0.0));
        let s = k.sin();
        let f = k * k.cos() + self.eta * s;
        let alpha2 = q * q / (f * f + q * q * s * s);
        let b = box_factor(1, k);
        alpha2 * b * b
    }

    /// All roots of the outgoing matching condition inside `region`,
    /// polished and c-normalized. The argument principle on the region
    /// boundary must agree with the number found.
    pub fn localized_states(&self, region: &SearchRegion) -> Result<Vec<LocalizedState>> {
        if !(region.im_min > 0.0) || region.im_max <= region.im_min || region.re_max <= region.re_min || region.re_min < 0.0 {
            return domain("localized_states: the search rectangle must lie in the upper half-plane");
        }
        let expected = self.count_roots(region)?;
        let mut roots: Vec<Complex64> = Vec::new();
        let mut last_failure = None;
        for i in 0..region.re_seeds {
            for j in 0..region.im_seeds {
                let re = region.re_min + (i as f64 + 0.5) * (region.re_max - region.re_min) / region.re_seeds as f64;
                let im = region.im_min + (j as f64 + 0.5) * (region.im_max - region.im_min) / region.im_seeds as f64;
                match newton(|z| self.matching(z), c(re, im), ROOT_RESIDUAL) {
                    Ok(q) if region.contains(q) => {
                        if !roots.iter().any(|r| (r - q).norm() < 1e-8 * q.norm().max(1.0)) {
                            roots.push(q);
                        }
                    }
                    Ok(_) => {}
                    Err(e) => last_failure = Some(e),
                }
            }
        }
        if roots.len() != expected {
            let seed = c(0.5 * (region.re_min + region.re_max), 0.5 * (region.im_min + region.im_max));
            let detail = last_failure.map(|e| format!("; last polish failure: {e}")).unwrap_or_default();
            return Err(DecayError::SearchFailure {
                seed,
                reason: format!("argument principle counts {expected} roots, seeds found {}{detail}", roots.len()),
            });
        }
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        roots.into_iter().map(|q| self.localized_state(q)).collect()
    }

    fn localized_state(&self, q: Complex64) -> Result<LocalizedState> {
        let k = self.inside_wavenumber(q);
        let b = (c(0.0, 1.0) * q).exp() / k.sin();
        let norm = c_norm(k, q, b, c(1.0, 0.0));
        let scale = norm.sqrt();
        if scale.norm() == 0.0 || !scale.re.is_finite() {
            return Err(DecayError::SearchFailure { seed: q, reason: "localized state has zero c-norm".into() });
        }
        let inside = b / scale;
        let outside = 1.0 / scale;
        let norm_residual = (c_norm(k, q, inside, outside) - 1.0).norm();
        let root_residual = self.matching(q).0.norm();
        if norm_residual > NORM_RESIDUAL {
            return Err(DecayError::SearchFailure { seed: q, reason: format!("c-normalization residual {norm_residual:e}") });
        }
        Ok(LocalizedState { q, k, energy: k * k, inside, outside, norm_residual, root_residual })
    }

    /// Number of zeros of `G` inside `region` from the winding of its phase
    /// along the boundary, traced with adaptive steps.
    fn count_roots(&self, region: &SearchRegion) -> Result<usize> {
        let corners = [
            c(region.re_min, region.im_min),
            c(region.re_max, region.im_min),
            c(region.re_max, region.im_max),
            c(region.re_min, region.im_max),
        ];
        let mut total = 0.0;
        for e in 0..4 {
            total += self.phase_change(corners[e], corners[(e + 1) % 4], 0)?;
        }
        let winding = total / (2.0 * PI);
        let n = winding.round();
        if (winding - n).abs() > 0.1 || n < 0.0 {
            return Err(DecayError::SearchFailure {
                seed: corners[0],
                reason: format!("argument principle did not settle (winding {winding})"),
            });
        }
        Ok(n as usize)
    }

    fn phase_change(&self, a: Complex64, b: Complex64, depth: u32) -> Result<f64> {
        let ga = self.matching(a).0;
        let gb = self.matching(b).0;
        if ga.norm() == 0.0 || gb.norm() == 0.0 {
            return Err(DecayError::SearchFailure { seed: a, reason: "root on the search boundary".into() });
        }
        let d = (gb / ga).arg();
        if d.abs() < PI / 8.0 && depth >= 6 {
            return Ok(d);
        }
        if depth >= 40 {
            return Err(DecayError::SearchFailure { seed: a, reason: "phase unwrapping did not resolve the boundary".into() });
        }
        let m = 0.5 * (a + b);
        Ok(self.phase_change(a, m, depth + 1)? + self.phase_change(m, b, depth + 1)?)
    }

    /// `A(t) = Σ_j ⟨ψ₀|u_j⟩² e^{-iE_j t} + e^{-V₀t} ∫ c(q)² e^{-iq²t} dq`.
    pub fn survival_amplitude(&self, t: f64) -> Result<Complex64> {
        if !(t >= 0.0) || !t.is_finite() {
            return domain(format!("detector survival needs finite t >= 0, got {t}"));
        }
        let discrete: Complex64 = self
            .localized
            .iter()
            .map(|s| {
                let o = s.c_overlap();
                o * o * (c(0.0, -t) * s.energy).exp()
            })
            .sum();
        let hi = if t > 0.0 { (80.0 + 8.0 / t).min(1000.0) } else { 1000.0 };
        let panels = chirp_panels(0.0, hi, t, 4.0, 0.5, &self.breaks);
        let f = |q: f64, out: &mut [Complex64]| {
            let free = free_box_overlap(1, q);
            out[0] = (self.continuum_weight(q) - free * free) * Complex64::from_polar(1.0, -q * q * t);
        };
        let r = integrate_panels(&f, &panels, 1, AMPLITUDE_TOL);
        if r.error > MAX_REPORTED_ERROR || !r.values[0].re.is_finite() {
            return Err(DecayError::Convergence(format!("detector continuum: quadrature error estimate {:e}", r.error)));
        }
        let continuum = (free_matrix_element(1, 1, t)? + r.values[0]) * (-self.v0 * t).exp();
        Ok(discrete + continuum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_limit_is_unitary_and_matches_delta_shell() {
        let sys = DetectorSystem::new(5.0, 0.0).unwrap();
        assert!(sys.localized().is_empty());
        let delta = DeltaShellSystem::new(5.0).unwrap();
        for i in 1..60 {
            let q = 0.21 * i as f64;
            let st = sys.scattering_state(q).unwrap();
            assert!((st.s_coef.norm() - 1.0).abs() < 1e-10);
            let c0 = delta.initial_overlap(q).unwrap();
            assert!((st.c_overlap() - c0).norm() < 1e-12, "q={q}");
        }
        for &t in &[0.0, 0.5, 2.0, 7.0] {
            let a = sys.survival_amplitude(t).unwrap();
            let b = delta.survival_amplitude(t).unwrap();
            assert!((a - b).norm() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn scattering_state_matches_linear_solve_oracle() {
        let sys = DetectorSystem::new(5.0, 1.0).unwrap();
        let st = sys.scattering_state(2.0).unwrap();
        assert!((st.k - c(2.015_329_455_153_382_676_1, -0.248_098_393_402_356_144_54)).norm() < 1e-14);
        assert!((st.c1 - c(0.117_655_813_231_849_563_9, 0.473_121_718_885_166_263_01)).norm() < 1e-14);
        assert!((st.s_coef - c(-1.137_106_997_225_338_226_8, -0.018_387_853_584_794_018_07)).norm() < 1e-14);
        assert!((st.alpha - c(0.442_746_966_893_368_216_94, -0.113_910_785_270_230_520_68)).norm() < 1e-14);
        assert!((st.c_overlap() - c(0.243_231_229_820_406_238_07, -0.076_647_751_987_975_051_429)).norm() < 1e-14);
    }

    #[test]
    fn matching_conditions_hold_with_absorber() {
        let eta = 5.0;
        let sys = DetectorSystem::new(eta, 1.0).unwrap();
        for &q in &[0.3, 2.0, 7.7] {
            let st = sys.scattering_state(q).unwrap();
            let inside = |x: f64| c(0.0, 2.0) * st.c1 * (st.k * x).sin();
            let outside = Complex64::from_polar(1.0, -q) - st.s_coef * Complex64::from_polar(1.0, q);
            let d_in = c(0.0, 2.0) * st.c1 * st.k * st.k.cos();
            let d_out = c(0.0, -q) * (Complex64::from_polar(1.0, -q) + st.s_coef * Complex64::from_polar(1.0, q));
            assert!((inside(1.0) - outside).norm() < 1e-12);
            assert_eq!(st.eval(1.0), inside(1.0));
            assert!((d_out - d_in - eta * inside(1.0)).norm() < 1e-12 * q.max(1.0) * 10.0);
        }
    }

    #[test]
    fn branch_is_continuous_and_tends_to_q() {
        let sys = DetectorSystem::new(5.0, 1.0).unwrap();
        let mut prev = sys.scattering_state(1e-3).unwrap();
        for i in 1..20000 {
            let q = 1e-3 + i as f64 * 1e-3;
            let st = sys.scattering_state(q).unwrap();
            assert!((st.k - prev.k).norm() < 5e-3, "k jumps at q={q}");
            let rel = (st.s_coef - prev.s_coef).norm() / st.s_coef.norm().max(1.0);
            assert!(rel < 0.2, "S jumps at q={q}");
            prev = st;
        }
        assert!((prev.k - prev.q).norm() < 0.03);
    }

    #[test]
    fn absorber_eigenfunctions_have_outgoing_gain() {
        // With complex energy the outside amplitude ratio is not a flux
        // ratio; |𝒮| exceeds one everywhere for V₀ > 0.
        for &v0 in &[0.1, 1.0] {
            let sys = DetectorSystem::new(5.0, v0).unwrap();
            for i in 1..400 {
                let q = 0.05 * i as f64;
                assert!(sys.scattering_state(q).unwrap().s_coef.norm() > 1.0, "v0={v0} q={q}");
            }
        }
    }

    #[test]
    fn localized_state_for_unit_absorber() {
        let sys = DetectorSystem::new(5.0, 1.0).unwrap();
        let locs = sys.localized();
        assert_eq!(locs.len(), 1);
        let s = locs[0];
        assert!((s.q - c(2.714_453_877_442_701_603_6, 0.014_084_537_495_763_639_681)).norm() < 1e-12);
        assert!((s.width() - 1.847_072_690_330_549_079_4).abs() < 1e-12);
        assert!(s.root_residual <= 1e-12 && s.norm_residual <= 1e-10);
        assert_eq!(sys.detector_pole().map(|q| (q - s.q).norm() < 1e-10), Some(true));
    }

    #[test]
    fn weak_absorber_keeps_pole_below_axis() {
        let sys = DetectorSystem::new(5.0, 0.3).unwrap();
        assert!(sys.localized().is_empty());
        let q = sys.detector_pole().unwrap();
        assert!(q.im < 0.0);
        let tiny = DetectorSystem::new(5.0, 1e-6).unwrap().detector_pole().unwrap();
        let k1 = DeltaShellSystem::new(5.0).unwrap().find_resonance_poles(1).unwrap()[0];
        assert!((tiny - k1).norm() < 1e-6);
    }

    #[test]
    fn completeness_with_absorber() {
        for &v0 in &[0.1, 0.3, 1.0, 1.93] {
            let sys = DetectorSystem::new(5.0, v0).unwrap();
            assert!((sys.survival_amplitude(0.0).unwrap() - 1.0).norm() < 1e-6);
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(DetectorSystem::new(5.0, -1.0).is_err());
        assert!(DetectorSystem::new(f64::NAN, 1.0).is_err());
        let sys = DetectorSystem::new(5.0, 1.0).unwrap();
        assert!(sys.scattering_state(0.0).is_err());
        assert!(sys.survival_amplitude(-1.0).is_err());
    }
}
