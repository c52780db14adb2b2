use decay_core::complexfn::{erfc_complex, faddeeva};
use decay_core::curve::time_grid;
use decay_core::histories::{crossover_time, decompose_survival, FnSource};
use decay_core::oracle_propagator::{propagate, GridConfig, GridState};
use decay_core::{Complex64, DeltaShellSystem, ResonancePole, SurvivalCurve};
use proptest::prelude::*;

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

fn disc(radius: f64) -> impl Strategy<Value = Complex64> {
    (-radius..radius, -radius..radius).prop_filter_map("inside disc", move |(re, im)| {
        let z = Complex64::new(re, im);
        (z.norm() <= radius).then_some(z)
    })
}

proptest! {
    #[test]
    fn faddeeva_reflection(z in disc(5.0)) {
        let (a, b) = (faddeeva(-z).unwrap(), faddeeva(z).unwrap());
        let rhs = 2.0 * (-z * z).exp();
        // The sum cancels strongly near the real axis, so errors are measured
        // against the largest term.
        let scale = a.norm().max(b.norm()).max(rhs.norm());
        prop_assert!((a + b - rhs).norm() <= 1e-12 * scale, "z={z}");
    }

    #[test]
    fn faddeeva_conjugation(z in disc(5.0)) {
        let a = faddeeva((-z).conj()).unwrap();
        let b = faddeeva(z).unwrap().conj();
        prop_assert!(rel(a, b) <= 1e-12, "z={z}");
    }

    #[test]
    fn faddeeva_real_axis(x in -20.0f64..20.0) {
        let w = faddeeva(Complex64::new(x, 0.0)).unwrap();
        let e = (-x * x).exp();
        prop_assert!((w.re - e).abs() <= 1e-12 * e.max(1e-300), "x={x}: {} vs {e}", w.re);
    }

    #[test]
    fn erfc_through_faddeeva(z in disc(4.0)) {
        let lhs = erfc_complex(z).unwrap();
        let rhs = (-z * z).exp() * faddeeva(Complex64::new(0.0, 1.0) * z).unwrap();
        prop_assert!(rel(lhs, rhs) <= 1e-12, "z={z}");
    }

    #[test]
    fn decomposition_identity_for_resonances(
        re in 0.5f64..6.0,
        im in -1.5f64..-0.01,
        final_time in 1e-4f64..30.0,
        frac in 0.0f64..=1.0,
    ) {
        let pole = ResonancePole::new(Complex64::new(re, im)).unwrap();
        let d = decompose_survival(&pole, final_time, frac * final_time).unwrap();
        prop_assert!(d.identity_residual() <= 1e-10);
        prop_assert!(d.hermiticity_residual() <= 1e-12 * d.total.max(d.pp));
        prop_assert!(d.pp >= 0.0);
    }

    #[test]
    fn form_factor_reflection_symmetry(re in 0.5f64..6.0, im in -1.5f64..-0.01, kr in -10.0f64..10.0, ki in -3.0f64..3.0) {
        let pole = ResonancePole::new(Complex64::new(re, im)).unwrap();
        let k = Complex64::new(kr, ki);
        if let (Ok(a), Ok(b)) = (pole.form_factor(k), pole.form_factor(-k.conj())) {
            prop_assert!(rel(b, a.conj()) <= 1e-12);
        }
    }

    #[test]
    fn survival_csv_round_trip(amps in prop::collection::vec((0.0f64..1.0, -3.2f64..3.2), 1..40)) {
        let pts: Vec<(f64, Complex64)> = amps.iter().enumerate().map(|(i, &(r, th))| (0.1 * i as f64, Complex64::from_polar(r, th))).collect();
        let curve = SurvivalCurve::new(pts).unwrap();
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        prop_assert_eq!(SurvivalCurve::from_csv(std::str::from_utf8(&buf).unwrap()).unwrap(), curve);
    }

    #[test]
    fn pure_exponentials_never_cross_over(rate in 0.2f64..3.0, freq in -5.0f64..5.0) {
        let ts = time_grid(0.0, 20.0, 201, false).unwrap();
        let curve = SurvivalCurve::new(ts.iter().map(|&t| (t, Complex64::from_polar((-0.5 * rate * t).exp(), freq * t)))).unwrap();
        prop_assert_eq!(crossover_time(&curve, rate).unwrap(), None);
    }

    #[test]
    fn decomposition_endpoints_for_any_source(a in 0.01f64..1.0, b in -4.0f64..4.0, final_time in 0.1f64..10.0) {
        let src = FnSource(move |t: f64| Ok(Complex64::from_polar((-a * t).exp(), b * t)));
        for t in [0.0, final_time] {
            let d = decompose_survival(&src, final_time, t).unwrap();
            prop_assert_eq!(d.qq, 0.0);
            prop_assert_eq!(d.pq_plus_qp, 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn survival_bounded_by_nonescape(eta in 0.0f64..10.0, t in 0.01f64..6.0) {
        let sys = DeltaShellSystem::new(eta).unwrap();
        let s = sys.survival_amplitude(t).unwrap().norm_sqr();
        let n = sys.nonescape_probability(t).unwrap();
        prop_assert!(s <= n + 1e-9, "eta={eta} t={t}: S={s} N={n}");
        prop_assert!(n <= 1.0 + 1e-9);
    }

    #[test]
    fn grid_propagation_is_unitary(eta in 0.0f64..10.0) {
        let cfg = GridConfig { spacing: 0.02, length: 16.0, absorbing_layer: None };
        let s0 = GridState::initial(&cfg).unwrap();
        let s1 = propagate(&s0, &cfg, &DeltaShellSystem::new(eta).unwrap(), 1.0, 5e-3).unwrap();
        prop_assert!((s1.norm_sqr() - s0.norm_sqr()).abs() <= 1e-8);
    }
}
