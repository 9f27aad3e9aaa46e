use proptest::prelude::*;
use shocksynth_core::filterbank::BasisMatrix;
use shocksynth_core::{
    apply_filter, build_basis, discretize, integrate, make_layout, residual_motion, spec_interpolate, srs,
    validate_order, NzdfParams, Signal, SrsSpec,
};

fn samples(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 2..max_len)
}

fn small_basis() -> BasisMatrix {
    let fs = 20_000.0;
    let x = (0..400).map(|i| ((i * 7919) % 200) as f64 - 100.0).collect();
    let reference = Signal::new(fs, x).unwrap();
    build_basis(&reference, &make_layout(200.0, 1000.0, 2).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn integration_is_linear(a in samples(200), c in -10.0f64..10.0) {
        let b: Vec<f64> = a.iter().rev().cloned().collect();
        let sa = Signal::new(1000.0, a.clone()).unwrap();
        let sb = Signal::new(1000.0, b.clone()).unwrap();
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| c * x + y).collect();
        let lhs = integrate(&Signal::new(1000.0, mix).unwrap(), 0.0);
        let ia = integrate(&sa, 0.0);
        let ib = integrate(&sb, 0.0);
        for ((l, x), y) in lhs.samples().iter().zip(ia.samples()).zip(ib.samples()) {
            prop_assert!((l - (c * x + y)).abs() <= 1e-9 * (1.0 + l.abs()));
        }
    }

    #[test]
    fn srs_scales_with_amplitude(x in samples(300), c in -20.0f64..20.0) {
        let sig = Signal::new(10_000.0, x).unwrap();
        let freqs = [100.0, 700.0, 3000.0];
        let base = srs(&sig, &freqs, 10.0).unwrap();
        let scaled = srs(&sig.scaled(c), &freqs, 10.0).unwrap();
        for (a, b) in scaled.values.iter().zip(&base.values) {
            prop_assert!((a - c.abs() * b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn filtered_random_input_comes_to_rest(x in samples(400), fc in 300.0f64..3000.0) {
        let filt = discretize(&NzdfParams::new(fc).unwrap(), 20_000.0).unwrap();
        let out = apply_filter(&filt, &Signal::new(20_000.0, x).unwrap()).unwrap();
        prop_assume!(out.peak_abs() > 1e-9);
        let r = residual_motion(&out, 1e-3).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn combinations_come_to_rest(x in prop::collection::vec(-5.0f64..5.0, 6)) {
        let basis = small_basis();
        prop_assume!(x.iter().any(|v| v.abs() > 1e-3));
        let sig = basis.combine(&x).unwrap();
        let r = residual_motion(&sig, 1e-3).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn interpolation_between_monotone_breakpoints(
        a in 1.0f64..1e4,
        b in 1.0f64..1e4,
        f in 100.0f64..1000.0,
        g in 100.0f64..1000.0,
    ) {
        let spec = SrsSpec::new(vec![(100.0, a), (1000.0, b)], 3.0).unwrap();
        let (lo, hi) = if f <= g { (f, g) } else { (g, f) };
        let v = spec_interpolate(&spec, &[lo, hi]).unwrap().values;
        if a <= b {
            prop_assert!(v[0] <= v[1] * (1.0 + 1e-12));
        } else {
            prop_assert!(v[0] >= v[1] * (1.0 - 1e-12));
        }
        prop_assert!(v[0] >= a.min(b) * (1.0 - 1e-12) && v[0] <= a.max(b) * (1.0 + 1e-12));
    }

    #[test]
    fn order_rule(m in 0u32..12, n in 0u32..8) {
        prop_assert_eq!(validate_order(m, n), m >= 2 && n >= 1 && m < 2 * n);
    }
}
