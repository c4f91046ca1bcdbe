use proptest::prelude::*;
use uavcov::analysis::NetworkConfig;
use uavcov::channel::{equivalent_distance_los, equivalent_distance_nlos, LinkState, Preset};
use uavcov::quadrature::{integrate_finite, integrate_piecewise, QuadratureSpec, Tail};
use uavcov::{Bound, CoverageModel};

fn preset() -> impl Strategy<Value = Preset> {
    prop_oneof![
        Just(Preset::HighAltitude),
        Just(Preset::LowAltitude),
        Just(Preset::UltraLowAltitude),
    ]
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

proptest! {
    #[test]
    fn integral_is_linear(a in -5.0..5.0f64, b in -5.0..5.0f64, k in 0.1..4.0f64, lo in -2.0..0.0f64, hi in 0.5..3.0f64) {
        let f = |x: f64| (k * x).sin() + x * x;
        let g = |x: f64| (-k * x * x).exp();
        let s = spec();
        let fg = integrate_finite(|x| a * f(x) + b * g(x), lo, hi, &s).unwrap().value;
        let sep = a * integrate_finite(f, lo, hi, &s).unwrap().value + b * integrate_finite(g, lo, hi, &s).unwrap().value;
        prop_assert!((fg - sep).abs() <= 10.0 * s.rel_tol * (fg.abs().max(sep.abs())) + 10.0 * s.abs_tol, "{fg} vs {sep}");
    }

    #[test]
    fn integral_is_additive(k in 0.1..4.0f64, lo in -2.0..0.0f64, t in 0.05..0.95f64, hi in 0.5..3.0f64) {
        let f = |x: f64| (k * x).cos() * (-0.3 * x).exp() + 1.5;
        let s = spec();
        let m = lo + t * (hi - lo);
        let whole = integrate_finite(f, lo, hi, &s).unwrap().value;
        let parts = integrate_finite(f, lo, m, &s).unwrap().value + integrate_finite(f, m, hi, &s).unwrap().value;
        prop_assert!((whole - parts).abs() <= 10.0 * s.rel_tol * whole.abs(), "{whole} vs {parts}");
    }

    #[test]
    fn power_law_tail(p in 1.05..4.0f64, lo in 0.01..50.0f64) {
        let s = QuadratureSpec::new(1e-9, 0.0, 2000).unwrap();
        let v = integrate_piecewise(|x| x.powf(-p), &[lo], Some(Tail::Logarithmic), &s).unwrap().value;
        let want = lo.powf(1.0 - p) / (p - 1.0);
        prop_assert!((v - want).abs() <= 1e-7 * want, "{v} vs {want}");
    }

    #[test]
    fn los_probability_is_a_probability(p in preset(), h in 0.01..0.2f64, k in 0.0..4.0f64) {
        let r = h * 10f64.powf(k);
        let v = p.los_model().probability(r, h);
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn los_probability_non_increasing(p in preset(), h in 0.01..0.2f64, k in -4.0..2.0f64, step in 1.0..1.5f64) {
        let r = 10f64.powf(k).max(h).max(1e-4);
        let m = p.los_model();
        prop_assert!(m.probability(r * step, h) <= m.probability(r, h) + 1e-15);
    }

    #[test]
    fn los_gain_dominates(p in preset(), t in 0.0..1.0f64) {
        // Gains cross at 3.1 m for the high/ultra-low set and 32.4 m for the
        // low-altitude set.
        let lo: f64 = if p == Preset::LowAltitude { 0.0325 } else { 0.0032 };
        let r = 10f64.powf(lo.log10() + t * (3.0 - lo.log10()));
        let params = p.params();
        prop_assert!(params.gain(r, LinkState::Los) >= params.gain(r, LinkState::Nlos));
    }

    #[test]
    fn equivalent_distance_round_trip(p in preset(), k in -4.0..2.0f64) {
        let r = 10f64.powf(k);
        let params = p.params();
        let back = equivalent_distance_los(&params, equivalent_distance_nlos(&params, r).unwrap()).unwrap();
        prop_assert!((back - r).abs() <= 1e-10 * r);
        let back = equivalent_distance_nlos(&params, equivalent_distance_los(&params, r).unwrap()).unwrap();
        prop_assert!((back - r).abs() <= 1e-10 * r);
        let r1 = equivalent_distance_nlos(&params, r).unwrap();
        let (a, b) = (params.gain(r1, LinkState::Nlos), params.gain(r, LinkState::Los));
        prop_assert!((a - b).abs() <= 1e-12 * b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn laplace_positive_bounded_and_non_increasing(
        p in preset(),
        lambda in 0.5..100.0f64,
        h in 0.02..0.15f64,
        t in 1.0..5.0f64,
        ks in -3.0..3.0f64,
        ratio in 1.0..10.0f64,
        los in any::<bool>(),
    ) {
        let m = CoverageModel::new(NetworkConfig::preset(p, lambda, h).unwrap()).unwrap();
        let cfg = m.config();
        let r = h * t;
        let state = if los { LinkState::Los } else { LinkState::Nlos };
        let s = 10f64.powf(ks) / (cfg.p_tx * cfg.params.gain(r, state));
        prop_assert_eq!(m.laplace_interference(0.0, r, state).unwrap(), 1.0);
        let a = m.laplace_interference(s, r, state).unwrap();
        let b = m.laplace_interference(s * ratio, r, state).unwrap();
        prop_assert!((0.0..=1.0).contains(&a), "{a}");
        prop_assert!(b <= a * (1.0 + 1e-7), "{b} > {a}");
        // L itself can underflow (exp(-thousands)); its log must not.
        let la = m.log_laplace_interference(s, r, state).unwrap();
        let lb = m.log_laplace_interference(s * ratio, r, state).unwrap();
        prop_assert!(la.is_finite() && la <= 0.0, "{la}");
        prop_assert!(lb.is_finite() && lb <= la + 1e-7 * la.abs(), "{lb} > {la}");
        prop_assert!((a - la.exp()).abs() <= 1e-12);
    }

    #[test]
    fn coverage_non_increasing_in_threshold(
        p in preset(),
        lambda in 0.5..100.0f64,
        h in 0.02..0.15f64,
        g_db in -10.0..15.0f64,
        step_db in 0.5..6.0f64,
    ) {
        let m = CoverageModel::new(NetworkConfig::preset(p, lambda, h).unwrap()).unwrap();
        let (g1, g2) = (10f64.powf(g_db / 10.0), 10f64.powf((g_db + step_db) / 10.0));
        for bound in [Bound::Lower, Bound::Upper] {
            let a = m.coverage(g1, bound).unwrap();
            let b = m.coverage(g2, bound).unwrap();
            prop_assert!((0.0..=1.0).contains(&a.value));
            prop_assert!(b.value <= a.value + a.quad_error + b.quad_error + 1e-9, "{bound}: {} > {}", b.value, a.value);
        }
    }

    #[test]
    fn noise_free_coverage_ignores_transmit_power(
        p in preset(),
        lambda in 0.5..100.0f64,
        h in 0.02..0.15f64,
        scale_db in -30.0..30.0f64,
    ) {
        let mut cfg = NetworkConfig::preset(p, lambda, h).unwrap();
        cfg.n0 = 0.0;
        let base = CoverageModel::new(cfg).unwrap();
        cfg.p_tx *= 10f64.powf(scale_db / 10.0);
        let scaled = CoverageModel::new(cfg).unwrap();
        for bound in [Bound::Lower, Bound::Upper] {
            let a = base.coverage(1.0, bound).unwrap().value;
            let b = scaled.coverage(1.0, bound).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-9, "{bound}: {a} vs {b}");
        }
    }
}
