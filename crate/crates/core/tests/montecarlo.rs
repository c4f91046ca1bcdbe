use uavcov::analysis::NetworkConfig;
use uavcov::channel::{LinkState, LosModel, Preset};
use uavcov::montecarlo::{
    coverage_of, estimate_ase, estimate_coverage, evaluate, sample_realization, SimMode, SimSpec, Simulator, Uav,
};
use uavcov::{Bound, CoverageModel};

fn cfg(preset: Preset, lambda: f64, h: f64) -> NetworkConfig {
    NetworkConfig::preset(preset, lambda, h).unwrap()
}

#[test]
fn poisson_count_in_disc() {
    let c = cfg(Preset::HighAltitude, 10.0, 0.05);
    let spec = SimSpec::new(10.0, 1, 11, SimMode::Hovering).with_disc_radius(3.0);
    let sim = Simulator::new(c, spec).unwrap();
    let n = 10_000;
    let counts: Vec<f64> = (0..n).map(|t| sim.realization(t).len() as f64).collect();
    let mean = counts.iter().sum::<f64>() / n as f64;
    let var = counts.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let want = 10.0 * std::f64::consts::PI * 9.0;
    assert!(
        (mean - want).abs() <= 3.0 * (want / n as f64).sqrt(),
        "mean {mean} vs {want}"
    );
    assert!((var / want - 1.0).abs() < 0.05, "variance {var}");
}

#[test]
fn realization_invariants() {
    let c = cfg(Preset::LowAltitude, 20.0, 0.1);
    for mode in [SimMode::Hovering, SimMode::Teleport] {
        let spec = SimSpec::new(20.0, 1, 5, mode);
        for t in 0..50 {
            let r = sample_realization(&c, &spec, t).unwrap();
            assert_eq!(r.uav_xy.len(), r.los_flags.len());
            assert_eq!(r.uav_xy.len(), r.fading.len());
            assert!(r.fading.iter().all(|&f| f > 0.0));
            let idx = r.serving_index.unwrap();
            if mode == SimMode::Teleport {
                assert_eq!((idx, r.uav_xy[0]), (0, (0.0, 0.0)));
            } else {
                let gain = |i: usize| {
                    let (x, y) = r.uav_xy[i];
                    c.params.gain((x * x + y * y + c.h * c.h).sqrt(), r.los_flags[i])
                };
                assert!((0..r.len()).all(|i| gain(i) <= gain(idx)));
            }
        }
    }
}

#[test]
fn deterministic_across_thread_counts() {
    let c = cfg(Preset::UltraLowAltitude, 6.0, 0.05);
    let spec = SimSpec::new(6.0, 3000, 42, SimMode::Hovering);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| Simulator::new(c, spec).unwrap().run())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
    let a = estimate_coverage(&c, &spec, 1.0).unwrap();
    let b = estimate_coverage(&c, &spec, 1.0).unwrap();
    assert_eq!(a, b);
    let other = estimate_coverage(&c, &SimSpec { seed: 43, ..spec }, 1.0).unwrap();
    assert_ne!(a, other);
}

#[test]
fn lone_overhead_uav_without_noise_always_covers() {
    let mut c = cfg(Preset::HighAltitude, 1.0, 0.05);
    c.n0 = 0.0;
    for state in [LinkState::Los, LinkState::Nlos] {
        let uav = Uav {
            xy: (0.0, 0.0),
            state,
            fading: 0.37,
        };
        let (idx, sinr) = evaluate(&c, &[uav]).unwrap();
        assert_eq!(idx, Some(0));
        assert!(sinr.is_infinite());
        assert_eq!(coverage_of([sinr].into_iter(), 1e300).value, 1.0);
    }
}

#[test]
fn association_ties_go_to_the_nearer_uav() {
    // Equal parameters make LoS and NLoS gains identical.
    let mut c = cfg(Preset::HighAltitude, 1.0, 0.05);
    c.params.a_nlos = c.params.a_los;
    c.params.alpha_nlos = c.params.alpha_los;
    let far = Uav {
        xy: (0.3, 0.0),
        state: LinkState::Los,
        fading: 1.0,
    };
    let near = Uav {
        xy: (0.0, 0.2),
        state: LinkState::Nlos,
        fading: 0.1,
    };
    assert_eq!(evaluate(&c, &[far, near]).unwrap().0, Some(1));
    let twin = Uav {
        xy: (0.0, -0.2),
        state: LinkState::Los,
        fading: 5.0,
    };
    assert_eq!(evaluate(&c, &[near, twin]).unwrap().0, Some(0));
}

#[test]
fn huge_threshold_is_never_met() {
    let c = cfg(Preset::LowAltitude, 10.0, 0.05);
    for mode in [SimMode::Hovering, SimMode::Teleport] {
        let spec = SimSpec::new(10.0, 2000, 9, mode);
        assert_eq!(estimate_coverage(&c, &spec, 1e30).unwrap().value, 0.0);
    }
}

#[test]
fn serving_los_fraction_matches_analysis() {
    for preset in Preset::ALL {
        let c = cfg(preset, 10.0, 0.05);
        let spec = SimSpec::new(10.0, 1, 21, SimMode::Hovering);
        let sim = Simulator::new(c, spec).unwrap();
        let n = 20_000;
        let los = (0..n)
            .filter(|&t| {
                let r = sim.realization(t);
                r.serving_index.is_some_and(|i| r.los_flags[i] == LinkState::Los)
            })
            .count() as f64
            / n as f64;
        let want = CoverageModel::new(c)
            .unwrap()
            .serving_probability(LinkState::Los)
            .unwrap();
        let se = (want * (1.0 - want) / n as f64).sqrt();
        assert!((los - want).abs() <= 3.0 * se, "{preset}: {los} vs {want} (se {se})");
    }
}

#[test]
fn laplace_transform_matches_simulated_interference() {
    // Serving LoS at r = h: every LoS point interferes, NLoS ones beyond r₁(h).
    let c = cfg(Preset::HighAltitude, 10.0, 0.05);
    let h = c.h;
    let s_unit = 1.0 / c.params.gain(h, LinkState::Los);
    let r1 = c.params.nlos_equivalent(h).max(h);
    let sim = Simulator::new(c, SimSpec::new(10.0, 1, 3, SimMode::Hovering)).unwrap();
    let n = 100_000;
    let samples: Vec<f64> = (0..n)
        .map(|t| {
            let r = sim.realization(t);
            let mut i = sim.far_interference();
            for k in 0..r.len() {
                let (x, y) = r.uav_xy[k];
                let d = (x * x + y * y + h * h).sqrt();
                if r.los_flags[k] == LinkState::Los || d >= r1 {
                    i += r.fading[k] * c.params.gain(d, r.los_flags[k]);
                }
            }
            (-s_unit * i).exp()
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let m = CoverageModel::new(c).unwrap();
    let want = m.laplace_interference(s_unit / c.p_tx, h, LinkState::Los).unwrap();
    let se = sd / (n as f64).sqrt();
    assert!((mean - want).abs() <= 2.0 * se, "{mean} vs {want} (se {se})");
}

#[test]
fn hovering_and_teleport_match_bounds_at_ten_per_km2() {
    for preset in Preset::ALL {
        let c = cfg(preset, 10.0, 0.05);
        let m = CoverageModel::new(c).unwrap();
        let sim = Simulator::new(c, SimSpec::new(10.0, 100_000, 2, SimMode::Hovering)).unwrap();
        let samples = sim.run();
        for (mode, bound) in [(SimMode::Hovering, Bound::Lower), (SimMode::Teleport, Bound::Upper)] {
            let est = coverage_of(samples.iter().map(|s| s.get(mode)), 1.0);
            let want = m.coverage(1.0, bound).unwrap().value;
            assert!(
                (est.value - want).abs() <= 0.01,
                "{preset} {bound}: {} vs {want}",
                est.value
            );
        }
        let hov = coverage_of(samples.iter().map(|s| s.hovering), 1.0);
        let tel = coverage_of(samples.iter().map(|s| s.teleport), 1.0);
        assert!(tel.value >= hov.value - 2.0 * (hov.halfwidth + tel.halfwidth));
    }
}

#[test]
fn ase_estimators_agree_and_match_analysis() {
    for preset in Preset::ALL {
        let c = cfg(preset, 10.0, 0.05);
        let spec = SimSpec::new(10.0, 100_000, 4, SimMode::Hovering);
        let a = estimate_ase(&c, &spec, 1.0).unwrap();
        assert!((a.grid - a.direct).abs() <= a.halfwidth, "{preset}: {a:?}");
        let want = CoverageModel::new(c).unwrap().ase(1.0, Bound::Lower).unwrap().value;
        assert!(
            (a.direct - want).abs() <= 0.05 * want,
            "{preset}: {} vs {want}",
            a.direct
        );
    }
}

#[test]
fn ase_scales_with_density_in_a_scale_free_network() {
    // Single propagation state, no noise: λ → 2λ with h → h/√2 leaves the
    // SINR distribution unchanged.
    let mut c = cfg(Preset::LowAltitude, 5.0, 0.08);
    c.los_model = LosModel::Constant { p: 1.0 };
    c.n0 = 0.0;
    let spec = SimSpec::new(5.0, 20_000, 8, SimMode::Hovering);
    let a = estimate_ase(&c, &spec, 1.0).unwrap();
    let mut c2 = c.with_density(10.0);
    c2.h /= 2f64.sqrt();
    let spec2 = spec.with_disc_radius(spec.disc_radius / 2f64.sqrt());
    let b = estimate_ase(&c2, &spec2, 1.0).unwrap();
    let ratio = b.direct / a.direct;
    assert!((ratio - 2.0).abs() < 1e-6, "{ratio}");
}

#[test]
fn overwhelming_noise_covers_nobody() {
    let mut c = cfg(Preset::HighAltitude, 10.0, 0.05);
    c.n0 = 1e30;
    let spec = SimSpec::new(10.0, 1000, 1, SimMode::Teleport);
    assert_eq!(estimate_ase(&c, &spec, 1.0).unwrap().direct, 0.0);
    assert_eq!(estimate_coverage(&c, &spec, 1.0).unwrap().value, 0.0);
}
