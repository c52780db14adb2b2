//! Experiment runners behind the `decay` command-line tool. Each runner
//! takes a validated [`ExperimentConfig`] and writes one CSV table.

pub mod config;

use std::io::Write;

use num_complex::Complex64;

pub use config::{ExperimentConfig, ModelKind};

use crate::complexfn::faddeeva;
use crate::curve::{fmt_float, SurvivalCurve};
use crate::delta_shell::DeltaShellSystem;
use crate::detector::DetectorSystem;
use crate::error::{DecayError, Result};
use crate::histories::{
    consistency_metric, crossover_time, decompose_nonescape_grid, decompose_survival_grid, decompose_nonescape_unchecked, sample_curve,
    AmplitudeSource, HistoryDecomposition,
};
use crate::oracle_propagator::{survival_series, GridPotential};
use crate::resonance_model::{ClosedFormConvention, ResonancePole};

/// Fewest intermediate times accepted by [`run_decomposition`].
pub const MIN_DECOMPOSITION_POINTS: usize = 100;
/// Window of the exponential fit, in units of the pole lifetime `1/Γ`.
pub const EXPONENTIAL_FIT_WINDOW: (f64, f64) = (2.0, 8.0);

fn config_error<T>(msg: impl Into<String>) -> Result<T> {
    Err(DecayError::Configuration(msg.into()))
}

fn amplitude_source(cfg: &ExperimentConfig) -> Result<Box<dyn AmplitudeSource>> {
    Ok(match cfg.model {
        ModelKind::Resonance => Box::new(ResonancePole::new(cfg.pole.expect("validated resonance pole"))?),
        ModelKind::Delta => Box::new(DeltaShellSystem::new(cfg.eta)?),
        ModelKind::Detector => Box::new(DetectorSystem::new(cfg.eta, cfg.v0.expect("validated detector v0"))?),
        ModelKind::Oracle => return config_error("the oracle model has no spectral amplitude; use it with the survival command"),
    })
}

/// Survival curve on the configured time grid.
pub fn run_survival(cfg: &ExperimentConfig) -> Result<SurvivalCurve> {
    let times = cfg.times()?;
    if cfg.model == ModelKind::Oracle {
        let potential = GridPotential { eta: cfg.eta, v0: cfg.v0.unwrap_or(0.0) };
        let series = survival_series(&cfg.grid, potential, &times, cfg.time_step)?;
        return SurvivalCurve::new(series.into_iter().map(|(t, a, _)| (t, a)));
    }
    let src = amplitude_source(cfg)?;
    sample_curve(src.as_ref(), &times)
}

pub fn write_survival<W: Write>(curve: &SurvivalCurve, out: W) -> Result<()> {
    Ok(curve.write_csv(out)?)
}

/// Survival decomposition at the configured `T` over `t_points` uniform
/// intermediate times in `[0, T]`.
pub fn run_decomposition(cfg: &ExperimentConfig) -> Result<Vec<HistoryDecomposition>> {
    let final_time = cfg.require_final_time()?;
    if cfg.t_points < MIN_DECOMPOSITION_POINTS {
        return config_error(format!("decompose needs at least {MIN_DECOMPOSITION_POINTS} intermediate times, got {}", cfg.t_points));
    }
    let src = amplitude_source(cfg)?;
    decompose_survival_grid(src.as_ref(), final_time, cfg.t_points)
}

pub fn write_decomposition<W: Write>(rows: &[HistoryDecomposition], mut out: W) -> Result<()> {
    writeln!(out, "t,pp,interference,qq,total,consistency_metric")?;
    for d in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_float(d.t),
            fmt_float(d.pp),
            fmt_float(d.pq_plus_qp),
            fmt_float(d.qq),
            fmt_float(d.total),
            fmt_float(consistency_metric(d))
        )?;
    }
    Ok(())
}

/// Nonescape decomposition at the configured `T`; fails if any truncation
/// estimate exceeds `nonescape_tolerance`.
pub fn run_nonescape(cfg: &ExperimentConfig) -> Result<Vec<(HistoryDecomposition, f64)>> {
    if cfg.model != ModelKind::Delta {
        return config_error(format!("nonescape supports only the delta model, not {}", cfg.model.name()));
    }
    let final_time = cfg.require_final_time()?;
    let sys = DeltaShellSystem::new(cfg.eta)?;
    let rows = decompose_nonescape_grid(&sys, final_time, cfg.t_points, cfg.basis_size)?;
    if let Some(worst) = rows.iter().find(|r| r.convergence_estimate > cfg.nonescape_tolerance) {
        return Err(DecayError::Convergence(format!(
            "nonescape truncation estimate {:e} at t = {} exceeds {:e} with {} box states; raise basis_size",
            worst.convergence_estimate, worst.decomposition.t, cfg.nonescape_tolerance, cfg.basis_size
        )));
    }
    Ok(rows.into_iter().map(|r| (r.decomposition, r.convergence_estimate)).collect())
}

pub fn write_nonescape<W: Write>(rows: &[(HistoryDecomposition, f64)], mut out: W) -> Result<()> {
    writeln!(out, "t,pp,interference,qq,total,consistency_metric,convergence_estimate")?;
    for (d, est) in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_float(d.t),
            fmt_float(d.pp),
            fmt_float(d.pq_plus_qp),
            fmt_float(d.qq),
            fmt_float(d.total),
            fmt_float(consistency_metric(d)),
            fmt_float(*est)
        )?;
    }
    Ok(())
}

/// One absorber strength of a detector sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub v0: f64,
    pub crossover: Option<f64>,
    pub fitted_gamma: f64,
}

/// Decay width of the narrowest delta-shell resonance.
pub fn delta_shell_width(eta: f64) -> Result<f64> {
    let sys = DeltaShellSystem::new(eta)?;
    let pole = sys.find_resonance_poles(1)?[0];
    Ok(-2.0 * (pole * pole).im)
}

/// Crossover time and fitted exponential rate for each absorber strength.
/// The default strengths are `0, 0.1, 0.3` and the delta-shell width `Γ`.
pub fn run_detector_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    if matches!(cfg.model, ModelKind::Resonance | ModelKind::Oracle) {
        return config_error("detector-sweep uses the delta and detector models only");
    }
    let gamma0 = delta_shell_width(cfg.eta)?;
    let v0s = cfg.v0_values.clone().unwrap_or_else(|| vec![0.0, 0.1, 0.3, gamma0]);
    let times = cfg.times()?;
    let mut rows = Vec::with_capacity(v0s.len());
    for v0 in v0s {
        let (curve, gamma) = if v0 == 0.0 {
            (sample_curve(&DeltaShellSystem::new(cfg.eta)?, &times)?, gamma0)
        } else {
            let sys = DetectorSystem::new(cfg.eta, v0)?;
            let gamma = sys.detector_width().unwrap_or(gamma0);
            (sample_curve(&sys, &times)?, gamma)
        };
        let (lo, hi) = EXPONENTIAL_FIT_WINDOW;
        let fitted_gamma = -curve.log_slope(lo / gamma, hi / gamma)?;
        rows.push(SweepRow { v0, crossover: crossover_time(&curve, gamma)?, fitted_gamma });
    }
    Ok(rows)
}

pub fn write_sweep<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "v0,t_c,fitted_gamma")?;
    for r in rows {
        let tc = r.crossover.map_or_else(|| "none".to_string(), fmt_float);
        writeln!(out, "{},{},{}", fmt_float(r.v0), tc, fmt_float(r.fitted_gamma))?;
    }
    Ok(())
}

/// A pole or localized eigenvalue listed by [`run_poles`].
#[derive(Debug, Clone, PartialEq)]
pub struct PoleRow {
    pub kind: &'static str,
    pub index: usize,
    pub wavenumber: Complex64,
    pub energy: Complex64,
}

/// Resonance poles (delta), the tracked detector pole and localized states
/// (detector), or the supplied pole (resonance).
pub fn run_poles(cfg: &ExperimentConfig) -> Result<Vec<PoleRow>> {
    let row = |kind, index, k: Complex64, energy| PoleRow { kind, index, wavenumber: k, energy };
    match cfg.model {
        ModelKind::Resonance => {
            let k = cfg.pole.expect("validated resonance pole");
            Ok(vec![row("resonance", 1, k, k * k)])
        }
        ModelKind::Delta => {
            let sys = DeltaShellSystem::new(cfg.eta)?;
            Ok(sys.find_resonance_poles(cfg.pole_count)?.into_iter().enumerate().map(|(i, k)| row("resonance", i + 1, k, k * k)).collect())
        }
        ModelKind::Detector | ModelKind::Oracle => {
            let v0 = cfg.v0.unwrap_or(0.0);
            let sys = DetectorSystem::new(cfg.eta, v0)?;
            let shift = Complex64::new(0.0, -v0);
            let mut rows = Vec::new();
            if let Some(q) = sys.detector_pole() {
                rows.push(row("detector_pole", 1, q, q * q + shift));
            }
            for (i, s) in sys.localized().iter().enumerate() {
                rows.push(row("localized", i + 1, s.q, s.energy));
            }
            Ok(rows)
        }
    }
}

pub fn write_poles<W: Write>(rows: &[PoleRow], mut out: W) -> Result<()> {
    writeln!(out, "kind,index,re_k,im_k,re_energy,im_energy,gamma")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.kind,
            r.index,
            fmt_float(r.wavenumber.re),
            fmt_float(r.wavenumber.im),
            fmt_float(r.energy.re),
            fmt_float(r.energy.im),
            fmt_float(-2.0 * r.energy.im)
        )?;
    }
    Ok(())
}

/// Outcome of one invariant check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    /// Checks that must exceed their threshold rather than stay below it.
    pub must_exceed: bool,
}

impl Check {
    pub fn passed(&self) -> bool {
        if self.must_exceed {
            self.residual > self.tolerance
        } else {
            self.residual <= self.tolerance
        }
    }
}

static FADDEEVA_TABLE: &str = include_str!("../../data/faddeeva_reference.csv");

fn faddeeva_table_error() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for line in FADDEEVA_TABLE.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let v: Vec<f64> = line.split(',').map(|s| s.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|e| DecayError::Domain(format!("reference table: {e}")))?;
        let want = Complex64::new(v[2], v[3]);
        let got = faddeeva(Complex64::new(v[0], v[1]))?;
        worst = worst.max((got - want).norm() / want.norm());
    }
    Ok(worst)
}

fn identity_residuals(src: &dyn AmplitudeSource, final_times: &[f64]) -> Result<(f64, f64, f64)> {
    let (mut ident, mut herm, mut ends) = (0.0f64, 0.0f64, 0.0f64);
    for &tt in final_times {
        let grid = decompose_survival_grid(src, tt, 11)?;
        for d in &grid {
            ident = ident.max(d.identity_residual());
            herm = herm.max(d.hermiticity_residual() / d.total);
        }
        for d in [grid[0], grid[grid.len() - 1]] {
            ends = ends.max(d.qq.abs()).max(d.pq_plus_qp.abs());
        }
    }
    Ok((ident, herm, ends))
}

/// Runs the invariant suite at the configured `eta` (and `v0`, default 1).
pub fn run_validate(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let tol = |name: &str, default: f64| cfg.check_tolerance(name, default);
    let mut checks = Vec::new();
    let mut push = |name: &'static str, residual: f64, default: f64| {
        checks.push(Check { name, residual, tolerance: tol(name, default), must_exceed: false });
    };

    push("faddeeva_reference_table", faddeeva_table_error()?, 1e-12);

    let delta = DeltaShellSystem::new(cfg.eta)?;
    let v0 = cfg.v0.unwrap_or(1.0);
    let detector = DetectorSystem::new(cfg.eta, v0)?;
    push("delta_normalization", (delta.survival_amplitude(0.0)? - 1.0).norm(), 1e-8);
    push("detector_completeness", (detector.survival_amplitude(0.0)? - 1.0).norm(), 1e-6);

    let delta_pole = delta.find_resonance_poles(1)?[0];
    let mut contour: f64 = 0.0;
    for k in [Complex64::new(3.0, -0.05), delta_pole] {
        let p = ResonancePole::new(k)?;
        for i in 0..50 {
            let gt = 0.01 * (5000f64).powf(i as f64 / 49.0);
            let t = gt / p.gamma_r();
            contour = contour.max((p.survival_amplitude_contour(t)? - p.survival_amplitude(t)?).norm());
        }
    }
    push("closed_form_vs_contour", contour, 1e-8);
    let literal = ResonancePole::new(delta_pole)?.survival_amplitude_closed_form(0.0, ClosedFormConvention::Literal)?;
    let literal_name = "literal_convention_departs_from_one";
    checks.push(Check { name: literal_name, residual: (literal - 1.0).norm(), tolerance: tol(literal_name, 0.1), must_exceed: true });

    let resonance = ResonancePole::new(Complex64::new(3.0, -0.05))?;
    let (mut ident, mut herm, mut ends) = (0.0f64, 0.0f64, 0.0f64);
    for src in [&resonance as &dyn AmplitudeSource, &delta, &detector] {
        let (a, b, c) = identity_residuals(src, &[1e-4, 1.0, 3.0, 10.0])?;
        ident = ident.max(a);
        herm = herm.max(b);
        ends = ends.max(c);
    }
    let mut push = |name: &'static str, residual: f64, default: f64| {
        checks.push(Check { name, residual, tolerance: tol(name, default), must_exceed: false });
    };
    push("sum_identity", ident, 1e-10);
    push("bracket_hermiticity", herm, 1e-12);
    push("endpoint_collapse", ends, f64::MIN_POSITIVE);

    let ne = decompose_nonescape_unchecked(&delta, 3.0, 1.5, cfg.basis_size)?;
    push("nonescape_truncation", ne.convergence_estimate, cfg.nonescape_tolerance);

    let times: Vec<f64> = (0..=10).map(|i| 0.1 * i as f64).collect();
    let mut worst: f64 = 0.0;
    for (t, a, _) in survival_series(&cfg.grid, &delta, &times, cfg.time_step)? {
        worst = worst.max((a - delta.survival_amplitude(t)?).norm());
    }
    push("grid_oracle_delta", worst, 1e-3);
    let mut worst: f64 = 0.0;
    for (t, a, _) in survival_series(&cfg.grid, &detector, &times, cfg.time_step)? {
        worst = worst.max((a - detector.survival_amplitude(t)?).norm());
    }
    push("grid_oracle_detector", worst, 1e-3);
    Ok(checks)
}

pub fn write_report<W: Write>(checks: &[Check], mut out: W) -> Result<()> {
    writeln!(out, "check,status,residual,tolerance")?;
    for c in checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        let relation = if c.must_exceed { ">" } else { "<=" };
        writeln!(out, "{},{},{},{}{}", c.name, status, fmt_float(c.residual), relation, fmt_float(c.tolerance))?;
    }
    Ok(())
}
