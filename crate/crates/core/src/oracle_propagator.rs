//! Crank–Nicolson finite-difference propagator on `[0, L]` with Dirichlet
//! ends, used to cross-check the spectral survival amplitudes.
//!
//! The barrier `η δ(x - 1)` enters as `η/h` on the node at `x = 1`, the
//! finite-volume form of the derivative jump `ψ'(1⁺) - ψ'(1⁻) = η ψ(1)`.
//! An absorber `-iV₀` acts on `x > 1` with half weight on the barrier node.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::curve::fmt_float;
use crate::delta_shell::DeltaShellSystem;
use crate::detector::DetectorSystem;
use crate::error::{DecayError, Result};

/// Default grid spacing.
pub const DEFAULT_SPACING: f64 = 1.0 / 400.0;
/// Default extent of the grid.
pub const DEFAULT_LENGTH: f64 = 40.0;
/// Default time step.
pub const DEFAULT_TIME_STEP: f64 = 1e-4;
/// Largest accepted `dt / h`. Crank–Nicolson is unconditionally stable;
/// this bounds the phase error of the resolved momenta.
pub const MAX_STEP_RATIO: f64 = 2.0;
/// Wavenumber used in the reflection guard `L >= 2 + 2 k t`: twice the
/// dominant momentum of the initial state, since its kink at `x = 1` feeds a
/// slowly decaying high-momentum tail.
pub const TYPICAL_WAVENUMBER: f64 = 2.0 * PI;

/// Quadratic absorbing layer `-i W₀ ((x - start)/(L - start))²` on
/// `x > start`, removing flux before it reaches the outer wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorbingLayer {
    pub start: f64,
    pub strength: f64,
}

impl Default for AbsorbingLayer {
    fn default() -> Self {
        Self { start: 10.0, strength: 5.0 }
    }
}

/// Grid geometry and boundary treatment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub spacing: f64,
    pub length: f64,
    pub absorbing_layer: Option<AbsorbingLayer>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { spacing: DEFAULT_SPACING, length: DEFAULT_LENGTH, absorbing_layer: Some(AbsorbingLayer::default()) }
    }
}

impl GridConfig {
    fn validate(&self) -> Result<(usize, usize)> {
        let h = self.spacing;
        if !(h > 0.0) || !h.is_finite() {
            return config(format!("grid spacing must be positive, got {h}"));
        }
        let per_unit = 1.0 / h;
        let barrier = per_unit.round();
        if (per_unit - barrier).abs() > 1e-9 * per_unit || barrier < 2.0 {
            return config(format!("grid spacing {h} must divide 1 so that x = 1 is a node"));
        }
        let cells = (self.length / h).round();
        if (self.length / h - cells).abs() > 1e-9 * cells || !(self.length > 1.0 + h) {
            return config(format!("grid length {} must exceed 1 and be a multiple of the spacing {h}", self.length));
        }
        if let Some(layer) = self.absorbing_layer {
            if !(layer.start > 1.0 && layer.start < self.length) || !(layer.strength > 0.0) {
                return config(format!("absorbing layer must start in (1, {}) with positive strength", self.length));
            }
        }
        Ok((barrier as usize, cells as usize))
    }
}

/// Wavefunction samples at `x_i = i h`, `i = 0..=L/h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub spacing: f64,
    pub length: f64,
    pub values: Vec<Complex64>,
    pub t: f64,
}

impl GridState {
    /// `√2 sin(πx)` on `[0, 1]`, zero beyond.
    pub fn initial(config: &GridConfig) -> Result<Self> {
        let (barrier, cells) = config.validate()?;
        let h = config.spacing;
        let values = (0..=cells)
            .map(|i| {
                let v = if i < barrier { 2f64.sqrt() * (PI * i as f64 * h).sin() } else { 0.0 };
                Complex64::new(v, 0.0)
            })
            .collect();
        Ok(Self { spacing: h, length: config.length, values, t: 0.0 })
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.spacing
    }

    fn barrier_index(&self) -> usize {
        (1.0 / self.spacing).round() as usize
    }

    /// Trapezoidal `∫₀^L |ψ|²`.
    pub fn norm_sqr(&self) -> f64 {
        trapezoid(self.spacing, self.values.iter().map(|v| v.norm_sqr()))
    }

    /// Writes `x,re_psi,im_psi`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,re_psi,im_psi")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{},{}", fmt_float(self.x(i)), fmt_float(v.re), fmt_float(v.im))?;
        }
        Ok(())
    }
}

fn trapezoid(h: f64, f: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = f.len();
    let mut sum = 0.0;
    for (i, v) in f.enumerate() {
        sum += if i == 0 || i + 1 == n { 0.5 * v } else { v };
    }
    h * sum
}

/// Trapezoidal `⟨ψ₀|ψ(t)⟩` over `[0, 1]`.
pub fn survival_from_grid(state: &GridState) -> Complex64 {
    let m = state.barrier_index();
    let h = state.spacing;
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..=m {
        let w = if i == 0 || i == m { 0.5 } else { 1.0 };
        sum += w * 2f64.sqrt() * (PI * state.x(i)).sin() * state.values[i];
    }
    h * sum
}

/// Trapezoidal `∫₀¹ |ψ(x, t)|²`.
pub fn nonescape_from_grid(state: &GridState) -> f64 {
    let m = state.barrier_index();
    trapezoid(state.spacing, state.values[..=m].iter().map(|v| v.norm_sqr()))
}

/// Parameters the grid needs from a spectral model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPotential {
    pub eta: f64,
    pub v0: f64,
}

impl From<&DeltaShellSystem> for GridPotential {
    fn from(s: &DeltaShellSystem) -> Self {
        Self { eta: s.eta(), v0: 0.0 }
    }
}

impl From<&DetectorSystem> for GridPotential {
    fn from(s: &DetectorSystem) -> Self {
        Self { eta: s.eta(), v0: s.v0() }
    }
}

/// Pre-factored Crank–Nicolson stepper for a fixed grid, potential and `dt`.
pub struct Propagator {
    dt: f64,
    spacing: f64,
    length: f64,
    /// Diagonal of `H` on the interior nodes.
    diag: Vec<Complex64>,
    off: f64,
    /// Thomas factorization of `1 + i dt H / 2`.
    lower: Vec<Complex64>,
    pivot_inv: Vec<Complex64>,
}

impl Propagator {
    pub fn new(config: &GridConfig, potential: GridPotential, dt: f64) -> Result<Self> {
        let (barrier, cells) = config.validate()?;
        let h = config.spacing;
        if !(dt > 0.0) || !dt.is_finite() {
            return config_err(format!("time step must be positive, got {dt}"));
        }
        if dt > MAX_STEP_RATIO * h {
            return config_err(format!("time step {dt} exceeds {MAX_STEP_RATIO}·h = {}", MAX_STEP_RATIO * h));
        }
        if !(potential.eta >= 0.0) || !(potential.v0 >= 0.0) || !potential.eta.is_finite() || !potential.v0.is_finite() {
            return config_err(format!("grid potential needs finite η >= 0 and V₀ >= 0, got {potential:?}"));
        }
        let off = -1.0 / (h * h);
        let i = Complex64::new(0.0, 1.0);
        let diag: Vec<Complex64> = (1..cells)
            .map(|j| {
                let x = j as f64 * h;
                let mut v = Complex64::new(2.0 / (h * h), 0.0);
                if j == barrier {
                    v += potential.eta / h - 0.5 * i * potential.v0;
                } else if j > barrier {
                    v -= i * potential.v0;
                }
                if let Some(layer) = config.absorbing_layer {
                    if x > layer.start {
                        let s = (x - layer.start) / (config.length - layer.start);
                        v -= i * layer.strength * s * s;
                    }
                }
                v
            })
            .collect();
        Ok(Self::factor(dt, h, config.length, diag, off))
    }

    fn factor(dt: f64, spacing: f64, length: f64, diag: Vec<Complex64>, off: f64) -> Self {
        let n = diag.len();
        let half = Complex64::new(0.0, 0.5 * dt);
        let b = half * off;
        let mut lower = vec![Complex64::new(0.0, 0.0); n];
        let mut pivot_inv = vec![Complex64::new(0.0, 0.0); n];
        pivot_inv[0] = 1.0 / (1.0 + half * diag[0]);
        for j in 1..n {
            lower[j] = b * pivot_inv[j - 1];
            pivot_inv[j] = 1.0 / (1.0 + half * diag[j] - lower[j] * b);
        }
        Self { dt, spacing, length, diag, off, lower, pivot_inv }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `state` by one time step.
    pub fn step(&self, state: &mut GridState, scratch: &mut Vec<Complex64>) {
        let n = self.diag.len();
        let half = Complex64::new(0.0, 0.5 * self.dt);
        let b = half * self.off;
        let psi = &mut state.values;
        scratch.clear();
        scratch.extend((0..n).map(|j| {
            let hpsi = self.diag[j] * psi[j + 1] + self.off * (psi[j] + psi[j + 2]);
            psi[j + 1] - half * hpsi
        }));
        // Forward elimination, then back substitution.
        for j in 1..n {
            let prev = scratch[j - 1];
            scratch[j] -= self.lower[j] * prev;
        }
        scratch[n - 1] *= self.pivot_inv[n - 1];
        for j in (0..n - 1).rev() {
            let next = scratch[j + 1];
            scratch[j] = (scratch[j] - b * next) * self.pivot_inv[j];
        }
        psi[1..=n].copy_from_slice(scratch);
        state.t += self.dt;
    }

    /// Steps `state` forward to `t_final >= state.t`. A target off the `dt`
    /// grid ends with one shorter step.
    pub fn advance_to(&self, state: &mut GridState, t_final: f64) -> Result<()> {
        self.check_state(state)?;
        let span = t_final - state.t;
        if !(span >= 0.0) || !t_final.is_finite() {
            return config_err(format!("cannot propagate backwards from t = {} to t = {t_final}", state.t));
        }
        let slack = 1e-9 * self.dt;
        let steps = ((span + slack) / self.dt).floor();
        let rest = span - steps * self.dt;
        let start = state.t;
        let mut scratch = Vec::with_capacity(self.diag.len());
        for s in 1..=steps as usize {
            self.step(state, &mut scratch);
            state.t = start + s as f64 * self.dt;
        }
        if rest > slack {
            Self::factor(rest, self.spacing, self.length, self.diag.clone(), self.off).step(state, &mut scratch);
        }
        state.t = t_final;
        Ok(())
    }

    fn check_state(&self, state: &GridState) -> Result<()> {
        if state.spacing != self.spacing || state.length != self.length || state.values.len() != self.diag.len() + 2 {
            return config_err("grid state does not match the propagator's grid");
        }
        Ok(())
    }
}

fn check_reflection(config: &GridConfig, t_final: f64) -> Result<()> {
    let needed = 2.0 + 2.0 * TYPICAL_WAVENUMBER * t_final;
    if config.absorbing_layer.is_none() && config.length < needed {
        return config_err(format!(
            "grid length {} lets reflections from the outer wall reach x < 2 before t = {t_final}; need L >= {needed} or an absorbing layer",
            config.length
        ));
    }
    Ok(())
}

/// Propagates `initial` to `t_final` under `system`'s Hamiltonian.
pub fn propagate(initial: &GridState, config: &GridConfig, system: impl Into<GridPotential>, t_final: f64, dt: f64) -> Result<GridState> {
    check_reflection(config, t_final)?;
    let prop = Propagator::new(config, system.into(), dt)?;
    let mut state = initial.clone();
    prop.advance_to(&mut state, t_final)?;
    Ok(state)
}

/// Survival amplitude from one propagation of `ψ₀`, sampled at the
/// increasing `times` (each on the `dt` grid).
pub fn survival_series(config: &GridConfig, system: impl Into<GridPotential>, times: &[f64], dt: f64) -> Result<Vec<(f64, Complex64, f64)>> {
    let Some(&last) = times.last() else {
        return Ok(Vec::new());
    };
    check_reflection(config, last)?;
    let prop = Propagator::new(config, system.into(), dt)?;
    let mut state = GridState::initial(config)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        prop.advance_to(&mut state, t)?;
        out.push((t, survival_from_grid(&state), nonescape_from_grid(&state)));
    }
    Ok(out)
}

fn config<T>(msg: String) -> Result<T> {
    Err(DecayError::Configuration(msg))
}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(DecayError::Configuration(msg.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delta_shell::free::free_wavefunction;

    fn unabsorbed(h: f64, length: f64) -> GridConfig {
        GridConfig { spacing: h, length, absorbing_layer: None }
    }

    #[test]
    fn initial_state_is_normalized() {
        let s = GridState::initial(&GridConfig::default()).unwrap();
        assert!((survival_from_grid(&s) - 1.0).norm() < 1e-14);
        assert!((nonescape_from_grid(&s) - 1.0).abs() < 1e-14);
        assert_eq!(s.values[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn hermitian_evolution_is_unitary() {
        let cfg = unabsorbed(1.0 / 100.0, 16.0);
        let sys = DeltaShellSystem::new(5.0).unwrap();
        let s0 = GridState::initial(&cfg).unwrap();
        let s1 = propagate(&s0, &cfg, &sys, 1.0, 1e-3).unwrap();
        assert!((s1.norm_sqr() - s0.norm_sqr()).abs() < 1e-8);
        assert_eq!(s1.values[0], Complex64::new(0.0, 0.0));
        let a = survival_from_grid(&s1);
        assert!(a.norm_sqr() <= nonescape_from_grid(&s1));
    }

    #[test]
    fn absorber_norm_decreases() {
        let cfg = GridConfig { spacing: 1.0 / 100.0, length: 10.0, absorbing_layer: None };
        let det = DetectorSystem::new(5.0, 1.0).unwrap();
        let prop = Propagator::new(&cfg, (&det).into(), 1e-3).unwrap();
        let mut s = GridState::initial(&cfg).unwrap();
        let mut last = s.norm_sqr();
        for k in 1..=10 {
            prop.advance_to(&mut s, 0.1 * k as f64).unwrap();
            let n = s.norm_sqr();
            assert!(n < last);
            last = n;
        }
    }

    #[test]
    fn free_evolution_matches_image_method() {
        // Long grid and short step: the kink of ψ₀ at x = 1 seeds momenta
        // far above the dominant one.
        let cfg = unabsorbed(1.0 / 400.0, 80.0);
        let sys = DeltaShellSystem::new(0.0).unwrap();
        let s = propagate(&GridState::initial(&cfg).unwrap(), &cfg, &sys, 0.3, 2e-5).unwrap();
        let mut worst: f64 = 0.0;
        for i in (0..s.values.len()).step_by(40).filter(|&i| s.x(i) <= 3.0) {
            let exact = free_wavefunction(1, s.x(i), 0.3).unwrap();
            worst = worst.max((s.values[i] - exact).norm());
        }
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn second_order_in_space() {
        let sys = DeltaShellSystem::new(5.0).unwrap();
        let run = |h: f64| {
            let cfg = unabsorbed(h, 40.0);
            survival_series(&cfg, &sys, &[0.25], 1e-4).unwrap()[0].1
        };
        let (a, b, c) = (run(1.0 / 50.0), run(1.0 / 100.0), run(1.0 / 200.0));
        let ratio = (a - b).norm() / (b - c).norm();
        assert!(ratio > 3.0 && ratio < 5.0, "{ratio}");
    }

    #[test]
    fn second_order_in_time() {
        let sys = DeltaShellSystem::new(5.0).unwrap();
        let cfg = unabsorbed(1.0 / 100.0, 40.0);
        let run = |dt: f64| survival_series(&cfg, &sys, &[0.4], dt).unwrap()[0].1;
        let (a, b, c) = (run(4e-3), run(2e-3), run(1e-3));
        let ratio = (a - b).norm() / (b - c).norm();
        assert!(ratio > 3.5 && ratio < 4.5, "{ratio}");
    }

    #[test]
    fn off_grid_targets_take_a_partial_step() {
        let cfg = unabsorbed(1.0 / 100.0, 20.0);
        let sys = DeltaShellSystem::new(5.0).unwrap();
        let coarse = survival_series(&cfg, &sys, &[0.2037], 1e-3).unwrap()[0].1;
        let fine = survival_series(&cfg, &sys, &[0.2037], 1e-5).unwrap()[0].1;
        assert!((coarse - fine).norm() < 1e-5, "{}", (coarse - fine).norm());
    }

    #[test]
    fn configuration_errors() {
        let sys = DeltaShellSystem::new(5.0).unwrap();
        let bad_h = GridConfig { spacing: 0.3, ..GridConfig::default() };
        assert!(matches!(GridState::initial(&bad_h), Err(DecayError::Configuration(_))));
        let short = unabsorbed(0.01, 20.0);
        let s = GridState::initial(&short).unwrap();
        assert!(matches!(propagate(&s, &short, &sys, 10.0, 1e-3), Err(DecayError::Configuration(_))));
        let cfg = unabsorbed(0.01, 10.0);
        let s = GridState::initial(&cfg).unwrap();
        assert!(matches!(propagate(&s, &cfg, &sys, 0.5, 0.1), Err(DecayError::Configuration(_))));
        let mut later = propagate(&s, &cfg, &sys, 0.5, 1e-3).unwrap();
        let prop = Propagator::new(&cfg, (&sys).into(), 1e-3).unwrap();
        assert!(matches!(prop.advance_to(&mut later, 0.25), Err(DecayError::Configuration(_))));
    }

    #[test]
    fn snapshot_csv_has_header_and_rows() {
        let cfg = unabsorbed(0.25, 2.0);
        let s = GridState::initial(&cfg).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,re_psi,im_psi\n"));
        assert_eq!(text.lines().count(), 1 + 9);
    }
}
