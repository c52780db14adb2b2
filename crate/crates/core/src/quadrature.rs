//! Adaptive Gauss–Kronrod integration of vector-valued complex integrands,
//! panel layouts for chirped kernels, and Gauss–Legendre rules.

use num_complex::Complex64;
use rayon::prelude::*;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_983_559_653,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Ten-point Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const MAX_DEPTH: u32 = 30;

/// Result of an integration: component values and an error estimate
/// (maximum over components, summed over accepted panels).
#[derive(Debug, Clone)]
pub(crate) struct Integral {
    pub values: Vec<Complex64>,
    pub error: f64,
}

/// One Kronrod–Gauss pair on `[a, b]`. Returns the error estimate and the
/// roundoff floor `eps·∫|f|`, both maximized over components.
fn gk21<F>(f: &F, a: f64, b: f64, dim: usize, kron: &mut [Complex64], gauss: &mut [Complex64], buf: &mut [Complex64]) -> (f64, f64)
where
    F: Fn(f64, &mut [Complex64]),
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    kron.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    gauss.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    let mut mag = vec![0.0; dim];
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for &s in nodes {
            f(c + s * h * x, buf);
            for i in 0..dim {
                kron[i] += buf[i] * wk;
                mag[i] += buf[i].norm() * wk;
                if j % 2 == 1 {
                    gauss[i] += buf[i] * WG[j / 2];
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    let mut floor: f64 = 0.0;
    for i in 0..dim {
        kron[i] *= h;
        gauss[i] *= h;
        err = err.max((kron[i] - gauss[i]).norm());
        floor = floor.max(50.0 * f64::EPSILON * h * mag[i]);
    }
    (err, floor)
}

struct Estimate {
    value: Vec<Complex64>,
    error: f64,
    floor: f64,
}

fn estimate<F>(f: &F, a: f64, b: f64, dim: usize) -> Estimate
where
    F: Fn(f64, &mut [Complex64]),
{
    let mut value = vec![Complex64::new(0.0, 0.0); dim];
    let mut gauss = value.clone();
    let mut buf = value.clone();
    let (error, floor) = gk21(f, a, b, dim, &mut value, &mut gauss, &mut buf);
    Estimate { value, error, floor }
}

/// Bisects until the panel meets `tol`. Refinement also stops once halving
/// no longer reduces the estimate (the integrand is noise-limited, as
/// happens with chirp phases of many thousand radians).
fn adaptive_into<F>(f: &F, a: f64, b: f64, est: Estimate, tol: f64, depth: u32, acc: &mut [Complex64]) -> f64
where
    F: Fn(f64, &mut [Complex64]),
{
    if est.error <= tol.max(est.floor) || depth >= MAX_DEPTH {
        for (s, v) in acc.iter_mut().zip(est.value) {
            *s += v;
        }
        return est.error;
    }
    let dim = acc.len();
    let m = 0.5 * (a + b);
    let left = estimate(f, a, m, dim);
    let right = estimate(f, m, b, dim);
    if depth >= 3 && left.error + right.error > 0.5 * est.error {
        let err = left.error + right.error;
        for (s, (l, r)) in acc.iter_mut().zip(left.value.into_iter().zip(right.value)) {
            *s += l + r;
        }
        return err;
    }
    adaptive_into(f, a, m, left, 0.5 * tol, depth + 1, acc) + adaptive_into(f, m, b, right, 0.5 * tol, depth + 1, acc)
}

/// Integrates `f` over the union of `panels`, refining each panel adaptively
/// to an absolute tolerance proportional to its width. Panels are processed
/// in parallel and summed in order, so the result is deterministic.
pub(crate) fn integrate_panels<F>(f: &F, panels: &[(f64, f64)], dim: usize, tol: f64) -> Integral
where
    F: Fn(f64, &mut [Complex64]) + Sync,
{
    let total: f64 = panels.iter().map(|(a, b)| b - a).sum();
    let parts: Vec<(Vec<Complex64>, f64)> = panels
        .par_iter()
        .map(|&(a, b)| {
            let mut acc = vec![Complex64::new(0.0, 0.0); dim];
            let local = if total > 0.0 { tol * (b - a) / total } else { tol };
            let est = estimate(f, a, b, dim);
            let err = adaptive_into(f, a, b, est, local, 0, &mut acc);
            (acc, err)
        })
        .collect();
    let mut values = vec![Complex64::new(0.0, 0.0); dim];
    let mut error = 0.0;
    for (v, e) in parts {
        for (s, x) in values.iter_mut().zip(v) {
            *s += x;
        }
        error += e;
    }
    Integral { values, error }
}

/// Scalar convenience wrapper around [`integrate_panels`].
pub(crate) fn integrate<F>(f: &F, panels: &[(f64, f64)], tol: f64) -> (Complex64, f64)
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let g = |x: f64, out: &mut [Complex64]| out[0] = f(x);
    let r = integrate_panels(&g, panels, 1, tol);
    (r.values[0], r.error)
}

/// Splits `[lo, hi]` into panels for an integrand carrying the chirp
/// `exp(-i k² t)`. Each panel spans at most `PHASE_PER_PANEL` radians of the
/// combined phase rate `2kt + base_rate` and at most `max_width`. Every entry
/// of `breaks` inside the interval becomes a panel edge.
pub(crate) fn chirp_panels(lo: f64, hi: f64, t: f64, base_rate: f64, max_width: f64, breaks: &[f64]) -> Vec<(f64, f64)> {
    const PHASE_PER_PANEL: f64 = 4.0;
    let mut edges: Vec<f64> = breaks.iter().copied().filter(|&b| b > lo && b < hi).collect();
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup();
    edges.push(hi);
    let mut panels = Vec::new();
    let mut k = lo;
    for &stop in &edges {
        while k < stop {
            let rate = 2.0 * k.abs() * t + base_rate;
            let w = (PHASE_PER_PANEL / rate).min(max_width);
            let mut next = k + w;
            // Avoid a sliver before a forced edge.
            if next > stop - 0.25 * w {
                next = stop;
            }
            panels.push((k, next));
            k = next;
        }
    }
    panels
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, `n >= 1`.
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss–Legendre rule on `[a, b]` with `pieces` equal subintervals.
pub(crate) fn composite_gauss_legendre(a: f64, b: f64, pieces: usize, order: usize) -> Vec<(f64, f64)> {
    let base = gauss_legendre(order);
    let h = (b - a) / pieces as f64;
    let mut out = Vec::with_capacity(pieces * order);
    for p in 0..pieces {
        let c = a + (p as f64 + 0.5) * h;
        for &(x, w) in &base {
            out.push((c + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(12);
        let s: f64 = rule.iter().map(|&(x, w)| w * x.powi(22)).sum();
        assert!((s - 2.0 / 23.0).abs() < 1e-14);
        let total: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn fresnel_chirp_integral() {
        // ∫_0^∞ exp(-i k² t) dk = √(π/(4 i t))
        let t = 3.0;
        let hi = 40.0;
        let panels = chirp_panels(0.0, hi, t, 1.0, 0.5, &[]);
        let f = |k: f64| Complex64::from_polar(1.0, -k * k * t);
        let (v, _) = integrate(&f, &panels, 1e-10);
        // Truncated integral: subtract the tail by integration by parts.
        let tail = Complex64::from_polar(1.0, -hi * hi * t) / Complex64::new(0.0, 2.0 * hi * t);
        let exact = (std::f64::consts::PI / (4.0 * t)).sqrt() * Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
        assert!((v + tail - exact).norm() < 1e-6, "{v} {exact}");
    }

    #[test]
    fn panels_respect_breakpoints() {
        let p = chirp_panels(0.0, 10.0, 0.0, 1.0, 0.5, &[2.71, 3.3]);
        assert!(p.iter().any(|&(_, b)| (b - 2.71).abs() < 1e-15));
        assert!(p.iter().any(|&(a, _)| (a - 3.3).abs() < 1e-15));
        for w in p.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
        assert_eq!(p.last().unwrap().1, 10.0);
    }

    #[test]
    fn vector_integrand_components_are_independent() {
        let f = |x: f64, out: &mut [Complex64]| {
            out[0] = Complex64::new(x.sin(), 0.0);
            out[1] = Complex64::new(0.0, x * x);
        };
        let r = integrate_panels(&f, &[(0.0, 1.0), (1.0, std::f64::consts::PI)], 2, 1e-13);
        assert!((r.values[0].re - 2.0).abs() < 1e-13);
        assert!((r.values[1].im - std::f64::consts::PI.powi(3) / 3.0).abs() < 1e-12);
    }
}
