use criterion::{black_box, criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdmsop_bench::bundled;
use sdmsop_core::model::{DpScratch, RoutePricer};
use sdmsop_core::{brute_force_opt, cluster_path_dp, run_ga, run_vns, GaConfig, OracleLimits, ProfitRule, VnsConfig};

fn route_dp(c: &mut Criterion) {
    let mut group = c.benchmark_group("route_dp");
    for name in ["11eil51", "107att532"] {
        let inst = bundled(name, ProfitRule::G1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seq: Vec<usize> = (1..inst.cluster_count()).collect();
        seq.shuffle(&mut rng);
        seq.truncate(10);
        group.bench_with_input(BenchmarkId::new("plan", name), &seq, |b, seq| {
            b.iter(|| cluster_path_dp(&inst, black_box(seq)).unwrap())
        });
        let mut scratch = DpScratch::new();
        group.bench_with_input(BenchmarkId::new("cost_only", name), &seq, |b, seq| {
            b.iter(|| scratch.route_cost(&inst, black_box(seq)))
        });
        let mut pricer = RoutePricer::new(true);
        group.bench_with_input(BenchmarkId::new("cached", name), &seq, |b, seq| {
            b.iter(|| pricer.cost(&inst, black_box(seq)))
        });
    }
    group.finish();
}

fn heuristics(c: &mut Criterion) {
    let mut group = c.benchmark_group("heuristics");
    group.sample_size(10);
    for (name, m) in [("11eil51", 2), ("16eil76", 3)] {
        let inst = bundled(name, ProfitRule::G2, m);
        group.bench_function(BenchmarkId::new("ga", name), |b| {
            b.iter(|| run_ga(&inst, &GaConfig::default()).profit)
        });
        group.bench_function(BenchmarkId::new("vns", name), |b| {
            b.iter(|| run_vns(&inst, &VnsConfig::default()).profit)
        });
        let cached = VnsConfig {
            dp_cache: true,
            ..VnsConfig::default()
        };
        group.bench_function(BenchmarkId::new("vns_cached", name), |b| {
            b.iter(|| run_vns(&inst, &cached).profit)
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    let base = bundled("11eil51", ProfitRule::G1, 2);
    group.bench_function("eil51_first_8_sets", |b| {
        b.iter_batched(
            || {
                let clusters = base.clusters()[..=8].to_vec();
                let keep: Vec<usize> = clusters.iter().flatten().copied().collect();
                restrict(&base, &keep, clusters)
            },
            |inst| brute_force_opt(&inst, &OracleLimits { max_vertices_per_cluster: 16, ..OracleLimits::default() }).unwrap().1,
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

/// Sub-instance on the vertices `keep`, renumbered in order.
fn restrict(
    inst: &sdmsop_core::SdmsopInstance,
    keep: &[usize],
    clusters: Vec<Vec<usize>>,
) -> sdmsop_core::SdmsopInstance {
    let mut index = vec![usize::MAX; inst.node_count()];
    let mut order = keep.to_vec();
    order.sort_unstable();
    for (i, &v) in order.iter().enumerate() {
        index[v] = i;
    }
    let n = order.len();
    let dist = (0..n * n).map(|k| inst.dist(order[k / n], order[k % n])).collect();
    let profits = inst.profits()[..clusters.len()].to_vec();
    let clusters = clusters.into_iter().map(|c| c.into_iter().map(|v| index[v]).collect()).collect();
    sdmsop_core::SdmsopInstance::new(
        "sub",
        n,
        dist,
        clusters,
        profits,
        inst.budget(),
        inst.travelers(),
        sdmsop_core::DistanceSource::Explicit,
    )
    .unwrap()
}

criterion_group!(benches, route_dp, heuristics, oracle);
criterion_main!(benches);
