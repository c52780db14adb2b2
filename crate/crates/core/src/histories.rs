//! Splits a survival (or nonescape) probability at final time `T` over an
//! intermediate time `t` into the path that passes through the initial
//! state (`[PP]`), the path that does not (`[QQ]`), and their interference
//! (`[PQ] + [QP]`).
//!
//! For survival with `P = |ψ₀⟩⟨ψ₀|` every term is a product of survival
//! amplitudes: the `P` path contributes `A(T - t) A(t)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::curve::{least_squares_slope, SurvivalCurve};
use crate::delta_shell::{DeltaShellSystem, INNER_ORDER, INNER_PIECES};
use crate::detector::DetectorSystem;
use crate::error::{domain, DecayError, Result};
use crate::quadrature::composite_gauss_legendre;
use crate::resonance_model::ResonancePole;

/// Default share of the total above which a term "dominates".
pub const DOMINANCE_THRESHOLD: f64 = 0.9;
/// Default share for dominance in the exponential regime.
pub const STRONG_DOMINANCE_THRESHOLD: f64 = 0.99;
/// Default ratio below which `[QQ]` is indistinguishable from the
/// interference term.
pub const INTERFERENCE_RATIO: f64 = 1e-3;
/// Default denominator floor of [`consistency_metric`].
pub const METRIC_FLOOR: f64 = 1e-300;
/// Default relative departure of the local slope from `-Γ` that marks the
/// end of exponential decay.
pub const CROSSOVER_DEPARTURE: f64 = 0.25;
/// Samples per sliding slope window in [`crossover_time`].
pub const CROSSOVER_WINDOW: usize = 9;
/// Consecutive departing windows required in [`crossover_time`].
pub const CROSSOVER_PERSISTENCE: usize = 3;

/// Anything that yields a survival amplitude `A(t)` for `t >= 0`.
pub trait AmplitudeSource: Sync {
    fn amplitude(&self, t: f64) -> Result<Complex64>;
}

impl AmplitudeSource for ResonancePole {
    fn amplitude(&self, t: f64) -> Result<Complex64> {
        self.survival_amplitude(t)
    }
}

impl AmplitudeSource for DeltaShellSystem {
    fn amplitude(&self, t: f64) -> Result<Complex64> {
        self.survival_amplitude(t)
    }
}

impl AmplitudeSource for DetectorSystem {
    fn amplitude(&self, t: f64) -> Result<Complex64> {
        self.survival_amplitude(t)
    }
}

/// Adapts a closure into an [`AmplitudeSource`].
pub struct FnSource<F>(pub F);

impl<F> AmplitudeSource for FnSource<F>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    fn amplitude(&self, t: f64) -> Result<Complex64> {
        (self.0)(t)
    }
}

/// Samples `src` on `times` (evaluated in parallel).
pub fn sample_curve<S: AmplitudeSource + ?Sized>(src: &S, times: &[f64]) -> Result<SurvivalCurve> {
    let amps: Vec<Complex64> = times.par_iter().map(|&t| src.amplitude(t)).collect::<Result<_>>()?;
    SurvivalCurve::new(times.iter().copied().zip(amps))
}

/// One `(T, t)` record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryDecomposition {
    pub final_time: f64,
    pub t: f64,
    pub pp: f64,
    pub pq_plus_qp: f64,
    pub qq: f64,
    pub total: f64,
    /// `[PQ]_t` as a complex number.
    pub pq: Complex64,
    /// `[QP]_t`, computed independently of `pq`.
    pub qp: Complex64,
}

impl HistoryDecomposition {
    /// `|pp + pq_plus_qp + qq - total| / total`
    pub fn identity_residual(&self) -> f64 {
        (self.pp + self.pq_plus_qp + self.qq - self.total).abs() / self.total.abs().max(f64::MIN_POSITIVE)
    }

    /// `|[PQ] - conj([QP])|`
    pub fn hermiticity_residual(&self) -> f64 {
        (self.pq - self.qp.conj()).norm()
    }
}

/// Decomposition from the three amplitudes `A(t)`, `A(T - t)` and `A(T)`.
pub fn decompose_from_amplitudes(final_time: f64, t: f64, a_t: Complex64, a_rest: Complex64, a_final: Complex64) -> HistoryDecomposition {
    let p = a_rest * a_t;
    let pp = p.norm_sqr();
    let cross = (p * a_final.conj()).re;
    let q = a_final - p;
    HistoryDecomposition {
        final_time,
        t,
        pp,
        pq_plus_qp: 2.0 * cross - 2.0 * pp,
        qq: a_final.norm_sqr() - 2.0 * cross + pp,
        total: a_final.norm_sqr(),
        pq: p * q.conj(),
        qp: p.conj() * q,
    }
}

fn amplitude_or_one<S: AmplitudeSource + ?Sized>(src: &S, t: f64) -> Result<Complex64> {
    if t == 0.0 {
        Ok(Complex64::new(1.0, 0.0))
    } else {
        src.amplitude(t)
    }
}

/// Survival decomposition at `(T, t)`, `0 <= t <= T`.
pub fn decompose_survival<S: AmplitudeSource + ?Sized>(src: &S, final_time: f64, t: f64) -> Result<HistoryDecomposition> {
    if !(final_time >= 0.0) || !final_time.is_finite() {
        return domain(format!("decompose_survival: T must be finite and >= 0, got {final_time}"));
    }
    if !(t >= 0.0 && t <= final_time) {
        return domain(format!("decompose_survival: t = {t} outside [0, {final_time}]"));
    }
    let a_final = amplitude_or_one(src, final_time)?;
    let a_t = amplitude_or_one(src, t)?;
    let a_rest = amplitude_or_one(src, final_time - t)?;
    Ok(decompose_from_amplitudes(final_time, t, a_t, a_rest, a_final))
}

/// Decompositions on the uniform grid `t_i = T i / (points - 1)`. Since
/// `T - t_i = t_{points-1-i}`, only `points` amplitudes are computed.
pub fn decompose_survival_grid<S: AmplitudeSource + ?Sized>(src: &S, final_time: f64, points: usize) -> Result<Vec<HistoryDecomposition>> {
    if points < 2 || !(final_time > 0.0) || !final_time.is_finite() {
        return domain(format!("decompose_survival_grid: need T > 0 and at least 2 points (T={final_time}, points={points})"));
    }
    let last = points - 1;
    let ts: Vec<f64> = (0..points).map(|i| final_time * i as f64 / last as f64).collect();
    let amps: Vec<Complex64> = ts.par_iter().map(|&t| amplitude_or_one(src, t)).collect::<Result<_>>()?;
    Ok((0..points).map(|i| decompose_from_amplitudes(final_time, ts[i], amps[i], amps[last - i], amps[last])).collect())
}

/// `|[PQ] + [QP]| / max(total, floor)`.
pub fn consistency_metric(d: &HistoryDecomposition) -> f64 {
    consistency_metric_with_floor(d, METRIC_FLOOR)
}

pub fn consistency_metric_with_floor(d: &HistoryDecomposition, floor: f64) -> f64 {
    d.pq_plus_qp.abs() / d.total.max(floor)
}

/// Nonescape decomposition together with its basis-truncation estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonescapeDecomposition {
    pub decomposition: HistoryDecomposition,
    pub basis_size: u32,
    /// Largest absolute change of `pp`, `pq_plus_qp` or `qq` between
    /// `basis_size - 1` and `basis_size` box states.
    pub convergence_estimate: f64,
}

/// Nonescape decomposition with projector `P = ∫₀¹ |x⟩⟨x| = Σ_j |E_j⟩⟨E_j|`
/// truncated to `basis_size` box states. Fails with a convergence error if
/// the truncation estimate exceeds `tolerance`.
pub fn decompose_nonescape(system: &DeltaShellSystem, final_time: f64, t: f64, basis_size: u32, tolerance: f64) -> Result<NonescapeDecomposition> {
    let d = decompose_nonescape_unchecked(system, final_time, t, basis_size)?;
    if !(d.convergence_estimate <= tolerance) {
        return Err(DecayError::Convergence(format!(
            "nonescape decomposition at T={final_time}, t={t}: truncation estimate {:e} with {basis_size} box states exceeds {tolerance:e}",
            d.convergence_estimate
        )));
    }
    Ok(d)
}

/// As [`decompose_nonescape`] but never rejects on the truncation estimate.
pub fn decompose_nonescape_unchecked(system: &DeltaShellSystem, final_time: f64, t: f64, basis_size: u32) -> Result<NonescapeDecomposition> {
    check_nonescape_args(final_time, basis_size)?;
    if !(t >= 0.0 && t <= final_time) {
        return domain(format!("decompose_nonescape: need 0 <= t <= T, got t={t}, T={final_time}"));
    }
    let rule = inner_rule();
    let psi = system.evolve_box_states(1, &rule.nodes, final_time)?.remove(0);
    let head = BoxEvolution::at(system, &rule, basis_size, t)?;
    let tail = BoxEvolution::at(system, &rule, basis_size, final_time - t)?;
    Ok(nonescape_terms(final_time, t, &rule, &psi, &head.column, &tail.states))
}

/// Nonescape decompositions on the uniform grid `t_i = T i / (points - 1)`,
/// sharing the propagated box states between `t_i` and `T - t_i`.
pub fn decompose_nonescape_grid(system: &DeltaShellSystem, final_time: f64, points: usize, basis_size: u32) -> Result<Vec<NonescapeDecomposition>> {
    check_nonescape_args(final_time, basis_size)?;
    if points < 2 || !(final_time > 0.0) {
        return domain(format!("decompose_nonescape_grid: need T > 0 and at least 2 points (T={final_time}, points={points})"));
    }
    let last = points - 1;
    let rule = inner_rule();
    let ts: Vec<f64> = (0..points).map(|i| final_time * i as f64 / last as f64).collect();
    let evolutions: Vec<BoxEvolution> = ts.par_iter().map(|&t| BoxEvolution::at(system, &rule, basis_size, t)).collect::<Result<_>>()?;
    // ψ₀ is the first box state, so ψ(T) is already among the evolved states.
    let psi = &evolutions[last].states[0];
    Ok((0..points)
        .map(|i| nonescape_terms(final_time, ts[i], &rule, psi, &evolutions[i].column, &evolutions[last - i].states))
        .collect())
}

fn check_nonescape_args(final_time: f64, basis_size: u32) -> Result<()> {
    if basis_size == 0 {
        return domain("decompose_nonescape: basis_size must be >= 1");
    }
    if !(final_time >= 0.0) || !final_time.is_finite() {
        return domain(format!("decompose_nonescape: T must be finite and >= 0, got {final_time}"));
    }
    Ok(())
}

struct InnerRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn inner_rule() -> InnerRule {
    let (nodes, weights) = composite_gauss_legendre(0.0, 1.0, INNER_PIECES, INNER_ORDER).into_iter().unzip();
    InnerRule { nodes, weights }
}

/// `⟨E_j|U(t)|E_1⟩` and `⟨x|U(t)|E_j⟩` on the inner nodes, `j = 1..=N`.
struct BoxEvolution {
    column: Vec<Complex64>,
    states: Vec<Vec<Complex64>>,
}

impl BoxEvolution {
    fn at(system: &DeltaShellSystem, rule: &InnerRule, basis_size: u32, t: f64) -> Result<Self> {
        let n = basis_size as usize;
        if t == 0.0 {
            let column = (0..n).map(|j| Complex64::new(if j == 0 { 1.0 } else { 0.0 }, 0.0)).collect();
            let states = (1..=n)
                .map(|j| rule.nodes.iter().map(|&x| Complex64::new(2f64.sqrt() * (j as f64 * std::f64::consts::PI * x).sin(), 0.0)).collect())
                .collect();
            return Ok(Self { column, states });
        }
        Ok(Self { column: system.propagator_column(1, basis_size, t)?, states: system.evolve_box_states(basis_size, &rule.nodes, t)? })
    }
}

fn nonescape_terms(final_time: f64, t: f64, rule: &InnerRule, psi: &[Complex64], coeffs: &[Complex64], evolved: &[Vec<Complex64>]) -> NonescapeDecomposition {
    let n = coeffs.len();
    let build = |m: usize| -> HistoryDecomposition {
        let mut pp = 0.0;
        let mut qq = 0.0;
        let mut total = 0.0;
        let mut pq = Complex64::new(0.0, 0.0);
        let mut qp = Complex64::new(0.0, 0.0);
        for (i, &w) in rule.weights.iter().enumerate() {
            let p: Complex64 = (0..m).map(|j| coeffs[j] * evolved[j][i]).sum();
            let q = psi[i] - p;
            pp += w * p.norm_sqr();
            qq += w * q.norm_sqr();
            total += w * psi[i].norm_sqr();
            pq += w * p.conj() * q;
            qp += w * q.conj() * p;
        }
        HistoryDecomposition { final_time, t, pp, pq_plus_qp: (pq + qp).re, qq, total, pq, qp }
    };
    let full = build(n);
    let prev = build(n - 1);
    let change = (full.pp - prev.pp).abs().max((full.qq - prev.qq).abs()).max((full.pq_plus_qp - prev.pq_plus_qp).abs());
    NonescapeDecomposition { decomposition: full, basis_size: n as u32, convergence_estimate: change }
}

/// Earliest time at which the local slope of `ln S` leaves `-Γ` by more
/// than [`CROSSOVER_DEPARTURE`]·Γ for [`CROSSOVER_PERSISTENCE`] consecutive
/// windows, after first having entered the exponential regime. Returns
/// `None` if no persistent departure occurs before the curve ends.
pub fn crossover_time(curve: &SurvivalCurve, gamma: f64) -> Result<Option<f64>> {
    crossover_time_with(curve, gamma, CROSSOVER_WINDOW, CROSSOVER_DEPARTURE, CROSSOVER_PERSISTENCE)
}

pub fn crossover_time_with(curve: &SurvivalCurve, gamma: f64, window: usize, departure: f64, persistence: usize) -> Result<Option<f64>> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return domain(format!("crossover_time: decay width must be positive, got {gamma}"));
    }
    if window < 2 || persistence == 0 {
        return domain("crossover_time: window must hold at least two samples");
    }
    let samples = curve.samples();
    if samples.len() < window + persistence {
        return domain(format!(
            "crossover_time: curve of {} samples is too short for windows of {window} with persistence {persistence}",
            samples.len()
        ));
    }
    let mut fits = Vec::with_capacity(samples.len() + 1 - window);
    for w in samples.windows(window) {
        let pts: Vec<(f64, f64)> = w.iter().filter(|s| s.probability > 0.0).map(|s| (s.t, s.probability.ln())).collect();
        let center = w.iter().map(|s| s.t).sum::<f64>() / window as f64;
        let departs = match least_squares_slope(&pts) {
            Ok(slope) => (slope + gamma).abs() > departure * gamma,
            Err(_) => true,
        };
        fits.push((center, departs));
    }
    let Some(entry) = fits.iter().position(|f| !f.1) else {
        return Ok(None);
    };
    let mut run = 0;
    for i in entry..fits.len() {
        if fits[i].1 {
            run += 1;
            if run == persistence {
                return Ok(Some(fits[i + 1 - persistence].0));
            }
        } else {
            run = 0;
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::time_grid;

    fn synthetic(t: f64) -> Result<Complex64> {
        Ok(Complex64::from_polar((-0.4 * t).exp(), -2.0 * t) + 1e-4 / (1.0 + t * t))
    }

    #[test]
    fn endpoints_collapse_exactly() {
        let src = FnSource(synthetic);
        let d0 = decompose_survival(&src, 5.0, 0.0).unwrap();
        assert_eq!(d0.pq_plus_qp, 0.0);
        assert_eq!(d0.qq, 0.0);
        assert_eq!(d0.pp, d0.total);
        let d1 = decompose_survival(&src, 5.0, 5.0).unwrap();
        assert_eq!(d1.pq_plus_qp, 0.0);
        assert_eq!(d1.qq, 0.0);
        assert_eq!(consistency_metric(&d0), 0.0);
    }

    #[test]
    fn grid_matches_pointwise() {
        let src = FnSource(synthetic);
        let grid = decompose_survival_grid(&src, 4.0, 9).unwrap();
        for d in &grid {
            let p = decompose_survival(&src, 4.0, d.t).unwrap();
            assert!((p.pp - d.pp).abs() < 1e-15 && (p.qq - d.qq).abs() < 1e-15);
            assert!(d.identity_residual() < 1e-12);
            assert!(d.hermiticity_residual() < 1e-15);
        }
    }

    #[test]
    fn rejects_t_outside_range() {
        let src = FnSource(synthetic);
        assert!(decompose_survival(&src, 1.0, 1.5).is_err());
        assert!(decompose_survival(&src, 1.0, -0.1).is_err());
    }

    #[test]
    fn pure_exponential_has_no_crossover() {
        let ts = time_grid(0.0, 20.0, 401, false).unwrap();
        let curve = SurvivalCurve::new(ts.iter().map(|&t| (t, Complex64::from_polar((-0.9 * t).exp(), -3.0 * t)))).unwrap();
        assert_eq!(crossover_time(&curve, 1.8).unwrap(), None);
    }

    #[test]
    fn exponential_with_power_tail_crosses_over() {
        let ts = time_grid(0.0, 20.0, 401, false).unwrap();
        let curve = SurvivalCurve::new(ts.iter().map(|&t| (t, Complex64::new(0.99 * (-0.9 * t).exp() + 1e-3 / (1.0 + t).powf(1.5), 0.0)))).unwrap();
        let tc = crossover_time(&curve, 1.8).unwrap().unwrap();
        assert!(tc > 9.5 && tc < 11.5, "{tc}");
    }

    #[test]
    fn short_curve_is_domain_error() {
        let curve = SurvivalCurve::new((0..5).map(|i| (i as f64, Complex64::new(0.5, 0.0)))).unwrap();
        assert!(crossover_time(&curve, 1.0).is_err());
    }

    #[test]
    fn nonescape_at_zero_intermediate_time() {
        let sys = DeltaShellSystem::new(5.0).unwrap();
        let d = decompose_nonescape_unchecked(&sys, 1.0, 0.0, 4).unwrap();
        let n = sys.nonescape_probability(1.0).unwrap();
        assert!((d.decomposition.pp - n).abs() < 1e-10);
        assert!(d.decomposition.qq.abs() < 1e-20 && d.decomposition.pq_plus_qp.abs() < 1e-20);
    }

    #[test]
    fn nonescape_truncation_converges() {
        let sys = DeltaShellSystem::new(5.0).unwrap();
        let mut last = f64::INFINITY;
        for n in [4, 8, 16] {
            let d = decompose_nonescape_unchecked(&sys, 3.0, 1.5, n).unwrap();
            assert!(d.convergence_estimate < last);
            assert!(d.decomposition.identity_residual() < 1e-10);
            assert!(d.decomposition.hermiticity_residual() < 1e-12);
            last = d.convergence_estimate;
        }
        assert!(last <= 1e-4, "{last}");
        assert!(decompose_nonescape(&sys, 3.0, 1.5, 16, 1e-4).is_ok());
        assert!(matches!(decompose_nonescape(&sys, 3.0, 1.5, 2, 1e-6), Err(DecayError::Convergence(_))));
        assert!(decompose_nonescape(&sys, 3.0, 1.5, 0, 1e-4).is_err());
    }

    #[test]
    fn nonescape_grid_matches_pointwise() {
        let sys = DeltaShellSystem::new(5.0).unwrap();
        let grid = decompose_nonescape_grid(&sys, 2.0, 5, 6).unwrap();
        for g in &grid {
            let p = decompose_nonescape_unchecked(&sys, 2.0, g.decomposition.t, 6).unwrap();
            assert!((g.decomposition.pp - p.decomposition.pp).abs() < 1e-13);
            assert!((g.decomposition.qq - p.decomposition.qq).abs() < 1e-13);
            assert!((g.decomposition.total - p.decomposition.total).abs() < 1e-13);
        }
        assert_eq!(grid[0].decomposition.qq, 0.0);
    }
}
