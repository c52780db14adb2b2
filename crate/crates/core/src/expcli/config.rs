//! Experiment configuration: built-in defaults, then a flat `key = value`
//! file, then command-line flags, each layer overriding the previous one.
//!
//! Recognized keys:
//!
//! | key | meaning |
//! |---|---|
//! | `model` | `resonance`, `delta`, `detector` or `oracle` |
//! | `eta` | barrier strength η ≥ 0 |
//! | `v0` | absorber strength V₀ ≥ 0 (detector and oracle only) |
//! | `pole_re`, `pole_im` | resonance pole `k_r` (resonance only) |
//! | `T` | final time for `decompose` and `nonescape` |
//! | `t_min`, `t_max`, `t_points`, `t_log` | sampling grid |
//! | `basis_size` | box states kept in the nonescape projector |
//! | `nonescape_tolerance` | largest accepted truncation estimate |
//! | `grid_spacing`, `grid_length`, `time_step`, `absorbing_layer` | grid propagator |
//! | `v0_values` | comma-separated absorber strengths for `detector-sweep` |
//! | `pole_count` | poles listed by `poles` |
//! | `out` | output path (standard output when absent) |
//! | `tol.<check>` | tolerance override for one `validate` check |
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64;

use crate::error::{DecayError, Result};
use crate::oracle_propagator::{AbsorbingLayer, GridConfig, DEFAULT_LENGTH, DEFAULT_SPACING, DEFAULT_TIME_STEP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Resonance,
    Delta,
    Detector,
    Oracle,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Resonance => "resonance",
            Self::Delta => "delta",
            Self::Detector => "detector",
            Self::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub eta: f64,
    pub v0: Option<f64>,
    pub pole: Option<Complex64>,
    pub final_time: Option<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub t_log: bool,
    pub basis_size: u32,
    pub nonescape_tolerance: f64,
    pub grid: GridConfig,
    pub time_step: f64,
    pub v0_values: Option<Vec<f64>>,
    pub pole_count: usize,
    pub out: Option<PathBuf>,
    pub check_tolerances: BTreeMap<String, f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Delta,
            eta: 5.0,
            v0: None,
            pole: None,
            final_time: None,
            t_min: 0.0,
            t_max: 20.0,
            t_points: 401,
            t_log: false,
            basis_size: 16,
            nonescape_tolerance: 1e-4,
            grid: GridConfig { spacing: DEFAULT_SPACING, length: DEFAULT_LENGTH, absorbing_layer: Some(AbsorbingLayer::default()) },
            time_step: DEFAULT_TIME_STEP,
            v0_values: None,
            pole_count: 4,
            out: None,
            check_tolerances: BTreeMap::new(),
        }
    }
}

fn bad<T>(msg: impl Into<String>) -> Result<T> {
    Err(DecayError::Configuration(msg.into()))
}

fn number(key: &str, value: &str) -> Result<f64> {
    match value.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => bad(format!("{key}: expected a finite number, got '{value}'")),
    }
}

fn count(key: &str, value: &str) -> Result<usize> {
    value.trim().parse::<usize>().or_else(|_| bad(format!("{key}: expected a non-negative integer, got '{value}'")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => bad(format!("{key}: expected true or false, got '{other}'")),
    }
}

/// Splits a config file into `(key, value)` pairs.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return bad(format!("config line {}: expected 'key = value', got '{line}'", i + 1));
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

impl ExperimentConfig {
    /// Applies one setting. Hyphens in keys are read as underscores.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        if let Some(check) = key.strip_prefix("tol.") {
            self.check_tolerances.insert(check.to_string(), number(&key, value)?);
            return Ok(());
        }
        match key.as_str() {
            "model" => {
                self.model = match value.trim() {
                    "resonance" => ModelKind::Resonance,
                    "delta" => ModelKind::Delta,
                    "detector" => ModelKind::Detector,
                    "oracle" => ModelKind::Oracle,
                    other => return bad(format!("model: expected resonance, delta, detector or oracle, got '{other}'")),
                }
            }
            "eta" => self.eta = number(&key, value)?,
            "v0" => self.v0 = Some(number(&key, value)?),
            "pole_re" => {
                let im = self.pole.map_or(f64::NAN, |p| p.im);
                self.pole = Some(Complex64::new(number(&key, value)?, im));
            }
            "pole_im" => {
                let re = self.pole.map_or(f64::NAN, |p| p.re);
                self.pole = Some(Complex64::new(re, number(&key, value)?));
            }
            "T" | "t" => self.final_time = Some(number(&key, value)?),
            "t_min" => self.t_min = number(&key, value)?,
            "t_max" => self.t_max = number(&key, value)?,
            "t_points" => self.t_points = count(&key, value)?,
            "t_log" => self.t_log = flag(&key, value)?,
            "basis_size" => {
                self.basis_size = u32::try_from(count(&key, value)?).or_else(|_| bad("basis_size: value too large"))?;
            }
            "nonescape_tolerance" => self.nonescape_tolerance = number(&key, value)?,
            "grid_spacing" => self.grid.spacing = number(&key, value)?,
            "grid_length" => self.grid.length = number(&key, value)?,
            "time_step" => self.time_step = number(&key, value)?,
            "absorbing_layer" => {
                self.grid.absorbing_layer = if flag(&key, value)? { Some(AbsorbingLayer::default()) } else { None };
            }
            "v0_values" => {
                let vals = value.split(',').map(|v| number(&key, v)).collect::<Result<Vec<_>>>()?;
                self.v0_values = Some(vals);
            }
            "pole_count" => self.pole_count = count(&key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            _ => return bad(format!("unknown setting '{key}'")),
        }
        Ok(())
    }

    /// Defaults overridden by `layers` in order.
    pub fn from_layers<'a>(layers: impl IntoIterator<Item = &'a [(String, String)]>) -> Result<Self> {
        let mut cfg = Self::default();
        for layer in layers {
            for (k, v) in layer {
                cfg.set(k, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks parameter ranges and model compatibility.
    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0) {
            return bad(format!("eta must be >= 0, got {}", self.eta));
        }
        if let Some(v0) = self.v0 {
            if !matches!(self.model, ModelKind::Detector | ModelKind::Oracle) {
                return bad(format!("v0 applies only to the detector and oracle models, not {}", self.model.name()));
            }
            if !(v0 >= 0.0) {
                return bad(format!("v0 must be >= 0, got {v0}"));
            }
        }
        if self.model == ModelKind::Detector && self.v0.is_none() {
            return bad("the detector model needs v0");
        }
        match (self.model, self.pole) {
            (ModelKind::Resonance, None) => return bad("the resonance model needs pole_re and pole_im"),
            (ModelKind::Resonance, Some(p)) if !(p.re > 0.0 && p.im < 0.0) => {
                return bad(format!("resonance pole must satisfy pole_re > 0 > pole_im, got {p}"));
            }
            (m, Some(_)) if m != ModelKind::Resonance => {
                return bad(format!("pole applies only to the resonance model, not {}", m.name()));
            }
            _ => {}
        }
        if let Some(t) = self.final_time {
            if !(t > 0.0) {
                return bad(format!("T must be > 0, got {t}"));
            }
        }
        if !(self.t_min >= 0.0) || !(self.t_max > self.t_min) {
            return bad(format!("need 0 <= t_min < t_max, got t_min={} t_max={}", self.t_min, self.t_max));
        }
        if self.t_points < 2 {
            return bad("t_points must be at least 2");
        }
        if self.basis_size == 0 {
            return bad("basis_size must be >= 1");
        }
        let positive = [
            ("nonescape_tolerance", self.nonescape_tolerance),
            ("grid_spacing", self.grid.spacing),
            ("grid_length", self.grid.length),
            ("time_step", self.time_step),
        ];
        for (name, v) in positive.into_iter().chain(self.check_tolerances.iter().map(|(k, v)| (k.as_str(), *v))) {
            if !(v > 0.0) {
                return bad(format!("{name} must be > 0, got {v}"));
            }
        }
        if let Some(vs) = &self.v0_values {
            if vs.is_empty() || vs.iter().any(|v| !(*v >= 0.0)) {
                return bad("v0_values must be a non-empty list of values >= 0");
            }
        }
        Ok(())
    }

    /// Sampling times. A logarithmic grid with `t_min = 0` starts at zero
    /// and continues with `t_points - 1` log-spaced times from
    /// `1e-4 · t_max`.
    pub fn times(&self) -> Result<Vec<f64>> {
        if self.t_log && self.t_min == 0.0 {
            let mut ts = vec![0.0];
            ts.extend(crate::curve::time_grid(1e-4 * self.t_max, self.t_max, self.t_points - 1, true)?);
            return Ok(ts);
        }
        crate::curve::time_grid(self.t_min, self.t_max, self.t_points, self.t_log)
    }

    pub fn require_final_time(&self) -> Result<f64> {
        self.final_time.map_or_else(|| bad("this command needs the final time T"), Ok)
    }

    pub fn check_tolerance(&self, name: &str, default: f64) -> f64 {
        self.check_tolerances.get(name).copied().unwrap_or(default)
    }
}
