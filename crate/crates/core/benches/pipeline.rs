use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sumrule_lab::jost1d::build_phase_table;
use sumrule_lab::par::Parallelism;
use sumrule_lab::sumrules::{PhaseCache, SumRuleOptions};
use sumrule_lab::wkb::figure1_data;
use sumrule_lab::{ChannelId, OdeOptions, PotentialSpec};

// Sequential and Parallel give byte-identical results; only the wall time differs.
const MODES: [(&str, Parallelism); 2] = [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Parallel)];

fn phase_tables(c: &mut Criterion) {
    let pot = PotentialSpec::gaussian(10.0, 1.0);
    let grid: Vec<f64> = (1..=256).map(|i| 0.2 * i as f64).collect();
    let mut g = c.benchmark_group("phase_table_256k_3born");
    for (name, mode) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| build_phase_table(&pot, ChannelId::Antisymmetric, &grid, 3, &OdeOptions::default(), mode).unwrap())
        });
    }
    g.finish();
}

fn cache_fill(c: &mut Criterion) {
    let pot = PotentialSpec::sech2(5.0);
    let ks: Vec<f64> = (1..=128).map(|i| 0.5 * i as f64).collect();
    let mut g = c.benchmark_group("phase_cache_128k");
    for (name, mode) in MODES {
        let opts = SumRuleOptions { parallelism: mode, ..SumRuleOptions::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let cache = PhaseCache::new(&pot, ChannelId::Symmetric, 2, opts);
                cache.samples(&ks).unwrap().len()
            })
        });
    }
    g.finish();
}

fn figure1(c: &mut Criterion) {
    let ls: Vec<u32> = (1..=8).collect();
    let mut g = c.benchmark_group("figure1_l1to8");
    for (name, mode) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| figure1_data(&[1, 2], &ls, mode).unwrap()));
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10).measurement_time(Duration::from_secs(5));
    targets = phase_tables, cache_fill, figure1
}
criterion_main!(benches);
