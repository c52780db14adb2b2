//! Sampled survival curves, time grids and slope fits.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{domain, DecayError, Result};

/// Tolerance above one allowed for a sampled survival probability.
pub const PROBABILITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalSample {
    pub t: f64,
    pub amplitude: Complex64,
    pub probability: f64,
}

/// Survival amplitude and probability on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    samples: Vec<SurvivalSample>,
}

impl SurvivalCurve {
    pub fn new(points: impl IntoIterator<Item = (f64, Complex64)>) -> Result<Self> {
        let mut samples: Vec<SurvivalSample> = Vec::new();
        for (t, amplitude) in points {
            if !t.is_finite() || !amplitude.re.is_finite() || !amplitude.im.is_finite() {
                return domain(format!("survival curve: non-finite sample at t = {t}"));
            }
            if let Some(prev) = samples.last() {
                if t <= prev.t {
                    return domain(format!("survival curve: times not increasing at t = {t}"));
                }
            }
            let probability = amplitude.norm_sqr();
            if probability > 1.0 + PROBABILITY_SLACK {
                return Err(DecayError::Range(format!("survival probability {probability} exceeds one at t = {t}")));
            }
            samples.push(SurvivalSample { t, amplitude, probability });
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[SurvivalSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.probability).collect()
    }

    /// Least-squares slope of `ln S` against `t` over samples in `[t_lo, t_hi]`.
    pub fn log_slope(&self, t_lo: f64, t_hi: f64) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter(|s| s.t >= t_lo && s.t <= t_hi && s.probability > 0.0)
            .map(|s| (s.t, s.probability.ln()))
            .collect();
        least_squares_slope(&pts)
    }

    /// Least-squares slope of `ln S` against `ln t` over `[t_lo, t_hi]`.
    pub fn loglog_slope(&self, t_lo: f64, t_hi: f64) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter(|s| s.t >= t_lo && s.t <= t_hi && s.t > 0.0 && s.probability > 0.0)
            .map(|s| (s.t.ln(), s.probability.ln()))
            .collect();
        least_squares_slope(&pts)
    }

    /// Writes `t,re_A,im_A,S,ln_S` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,re_A,im_A,S,ln_S")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_float(s.t),
                fmt_float(s.amplitude.re),
                fmt_float(s.amplitude.im),
                fmt_float(s.probability),
                fmt_float(s.probability.ln())
            )?;
        }
        Ok(())
    }

    /// Parses the format written by [`SurvivalCurve::write_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "t,re_A,im_A,S,ln_S" => {}
            _ => return domain("survival CSV: missing or unexpected header"),
        }
        let mut points = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 5 {
                return domain(format!("survival CSV: line {} has {} columns", i + 2, cols.len()));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| DecayError::Domain(format!("survival CSV line {}: {e}", i + 2)))
            };
            points.push((parse(cols[0])?, Complex64::new(parse(cols[1])?, parse(cols[2])?)));
        }
        Self::new(points)
    }
}

/// Formats a float with 17 significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> Result<f64> {
    if pts.len() < 2 {
        return domain(format!("slope fit needs at least two samples, got {}", pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return domain("slope fit over a degenerate abscissa");
    }
    Ok(sxy / sxx)
}

/// `points` times from `t_min` to `t_max` inclusive, uniformly or
/// logarithmically spaced. A logarithmic grid needs `t_min > 0`.
pub fn time_grid(t_min: f64, t_max: f64, points: usize, log: bool) -> Result<Vec<f64>> {
    if points < 2 || !(t_max > t_min) || t_min < 0.0 || !t_max.is_finite() {
        return domain(format!("time grid: need 0 <= t_min < t_max and at least 2 points (got {t_min}, {t_max}, {points})"));
    }
    if log && t_min <= 0.0 {
        return domain("time grid: logarithmic spacing needs t_min > 0");
    }
    let last = (points - 1) as f64;
    let mut ts: Vec<f64> = (0..points)
        .map(|i| {
            let f = i as f64 / last;
            if log {
                (t_min.ln() + f * (t_max.ln() - t_min.ln())).exp()
            } else {
                t_min + f * (t_max - t_min)
            }
        })
        .collect();
    ts[0] = t_min;
    ts[points - 1] = t_max;
    Ok(ts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_increasing_times() {
        let pts = vec![(0.0, Complex64::new(1.0, 0.0)), (0.0, Complex64::new(0.5, 0.0))];
        assert!(SurvivalCurve::new(pts).is_err());
    }

    #[test]
    fn rejects_probability_above_one() {
        assert!(SurvivalCurve::new(vec![(0.0, Complex64::new(1.0, 1e-3))]).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let pts: Vec<(f64, Complex64)> = (0..20)
            .map(|i| {
                let t = 0.37 * i as f64;
                (t, Complex64::from_polar((-0.1 * t).exp(), -1.3 * t))
            })
            .collect();
        let curve = SurvivalCurve::new(pts).unwrap();
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let back = SurvivalCurve::from_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(curve, back);
    }

    #[test]
    fn exponential_slope_recovered() {
        let ts = time_grid(0.0, 10.0, 101, false).unwrap();
        let curve = SurvivalCurve::new(ts.iter().map(|&t| (t, Complex64::from_polar((-0.35 * t).exp(), t)))).unwrap();
        assert!((curve.log_slope(1.0, 9.0).unwrap() + 0.7).abs() < 1e-12);
    }

    #[test]
    fn log_grid_endpoints_exact() {
        let ts = time_grid(1e-3, 20.0, 57, true).unwrap();
        assert_eq!(ts[0], 1e-3);
        assert_eq!(ts[56], 20.0);
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        assert!(time_grid(0.0, 1.0, 10, true).is_err());
    }
}
