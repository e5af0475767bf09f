//! Sequential vs. parallel throughput of the data-parallel kernels.
//!
//! "sequential" runs inside a one-thread rayon pool, which is what the
//! `parallel` feature degrades to; "parallel" uses every core.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hclab::brute::brute_force_opt;
use hclab::graph::{random_instance, WeightDist};
use hclab::harness::random_acute_triple;
use hclab::peel::round_maxcut;
use hclab::random_hc::monte_carlo_mean;
use hclab::sdp::{build_maxcut_sdp, solve_low_rank, SolverConfig};
use hclab::sdp_round::mc_verify_triplet;
use hclab::{Objective, RngStream};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("sequential", one), ("parallel", all)]
}

fn kernels(c: &mut Criterion) {
    let g8 = random_instance(8, 0.7, WeightDist::Uniform01, RngStream::new(1)).unwrap();
    let g40 = random_instance(40, 0.5, WeightDist::Uniform01, RngStream::new(2)).unwrap();
    let cut = solve_low_rank(&build_maxcut_sdp(&g40).unwrap(), &SolverConfig::default()).unwrap();
    let [a, b, t] = random_acute_triple(RngStream::new(3));

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new("brute_force_n8", name), |bch| {
            bch.iter(|| pool.install(|| brute_force_opt(&g8, Objective::Similarity).unwrap()))
        });
        group.bench_function(BenchmarkId::new("gw_rounds_1000", name), |bch| {
            bch.iter(|| pool.install(|| round_maxcut(&g40, &cut, 1000, RngStream::new(4)).unwrap()))
        });
        group.bench_function(BenchmarkId::new("triplet_mc_1e6", name), |bch| {
            bch.iter(|| pool.install(|| mc_verify_triplet(&a, &b, &t, 1_000_000, RngStream::new(5)).unwrap()))
        });
        group.bench_function(BenchmarkId::new("random_trees_2e4", name), |bch| {
            bch.iter(|| pool.install(|| monte_carlo_mean(&g40, Objective::Dissimilarity, 20_000, RngStream::new(6)).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
