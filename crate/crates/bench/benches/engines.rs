use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use uavcov::analysis::ExclusionTable;
use uavcov::montecarlo::{SimMode, SimSpec, Simulator};
use uavcov::{Bound, CoverageModel, NetworkConfig, Preset};

fn analytical(c: &mut Criterion) {
    let mut g = c.benchmark_group("analytical");
    for preset in Preset::ALL {
        let cfg = NetworkConfig::preset(preset, 10.0, 0.05).unwrap();
        let model = CoverageModel::new(cfg).unwrap();
        g.bench_function(BenchmarkId::new("coverage_lower", preset), |b| {
            b.iter(|| model.coverage(black_box(1.0), Bound::Lower).unwrap())
        });
        g.bench_function(BenchmarkId::new("coverage_upper", preset), |b| {
            b.iter(|| model.coverage(black_box(1.0), Bound::Upper).unwrap())
        });
        g.bench_function(BenchmarkId::new("ase_lower", preset), |b| {
            b.iter(|| model.ase(black_box(1.0), Bound::Lower).unwrap())
        });
        g.bench_function(BenchmarkId::new("exclusion_table", preset), |b| {
            b.iter(|| ExclusionTable::new(cfg.los_model, black_box(cfg.h)))
        });
    }
    g.finish();
}

fn montecarlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("montecarlo");
    g.sample_size(10);
    for lambda in [1.0, 10.0, 100.0] {
        let cfg = NetworkConfig::preset(Preset::HighAltitude, lambda, 0.05).unwrap();
        let sim = Simulator::new(cfg, SimSpec::new(lambda, 2_000, 1, SimMode::Hovering)).unwrap();
        g.bench_with_input(BenchmarkId::new("run_2000_trials", lambda), &sim, |b, sim| {
            b.iter(|| sim.run())
        });
    }
    g.finish();
}

criterion_group!(benches, analytical, montecarlo);
criterion_main!(benches);
