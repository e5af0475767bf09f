//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fail.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hclab::brute::brute_force_opt;
use hclab::graph::{
    embedded_clique_instance, random_instance, tight_dissimilarity_instance, tight_similarity_instance, WeightDist,
    WeightedGraph,
};
use hclab::harness::{bench_instances, random_acute_triple, BenchParams, Z95};
use hclab::linkage::{average_linkage, tight_dissimilarity_linkage_value, vertical_first_tree, LinkageMode, TieBreak};
use hclab::objectives::{dissimilarity_reward, similarity_reward};
use hclab::peel::{
    best_of_dissimilarity, best_of_dissimilarity_with, brute_force_maxcut, gw_maxcut, optimize_alpha_dissimilarity,
    peel_off_first_maxcut_next, peel_one_by_one_tree, recursive_maxcut_baseline, PeelConfig, PeelPlan,
};
use hclab::random_hc::{
    exact_expected_dissimilarity_reward_random, expected_dissimilarity_reward_random,
    expected_similarity_reward_random, monte_carlo_mean, random_tree, triplet_nonleaf_frequencies, McEstimate,
};
use hclab::sdp::{build_hc_sdp, evaluate, solve_low_rank, tree_to_vectors, SolverConfig, WarmStart};
use hclab::sdp_round::{
    best_of_similarity_with, factor_revealing_lower_bound, factor_revealing_numeric, mc_verify_triplet,
    optimize_alpha_similarity, triplet_separation_probability, TripletAngles,
};
use hclab::{Objective, RngStream};
use rand::Rng as _;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if took > limit {
        o.pass = false;
    }
    o.detail = format!("{} [{:.2}s of {}s]", o.detail, took.as_secs_f64(), limit.as_secs());
    o
}

fn instance(stream: RngStream, lo: usize, hi: usize) -> WeightedGraph {
    let n = stream.child("n").rng().random_range(lo..=hi);
    random_instance(n, 0.8, WeightDist::Uniform01, stream.child("g")).unwrap()
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn c1_tight_dissimilarity() -> Outcome {
    let mut ratios = Vec::new();
    let mut mismatches = Vec::new();
    for m in 2..=50 {
        let g = tight_dissimilarity_instance(m).unwrap();
        let (tree, _) = average_linkage(&g, LinkageMode::Dissimilarity, TieBreak::Lexicographic);
        let value = dissimilarity_reward(&g, &tree).unwrap();
        if value != tight_dissimilarity_linkage_value(m) {
            mismatches.push(m);
        }
        ratios.push(value / (g.n() as f64 * g.total_weight()));
    }
    let last = *ratios.last().unwrap();
    let pass = mismatches.is_empty() && ratios[0] == 1.0 && strictly_decreasing(&ratios) && last < 0.6803 + 1e-9;
    outcome(
        pass,
        format!(
            "closed form mismatches {:?}, ratio m=2 {}, m=50 {:.10}, strictly decreasing {}",
            mismatches,
            ratios[0],
            last,
            strictly_decreasing(&ratios)
        ),
    )
}

fn c2_tight_similarity() -> Outcome {
    let eps = hclab::graph::DEFAULT_TIGHT_EPS;
    let mut ratios = Vec::new();
    let mut horizontal = true;
    for k in 2..=6 {
        let g = tight_similarity_instance(k, eps).unwrap();
        let (tree, trace) = average_linkage(&g, LinkageMode::Similarity, TieBreak::Lexicographic);
        let al = similarity_reward(&g, &tree).unwrap();
        let lb = similarity_reward(&g, &vertical_first_tree(k)).unwrap();
        ratios.push(al / lb);
        let k2 = k * k;
        horizontal &= trace
            .merged_members(g.n())
            .iter()
            .take(k2 * (k - 1))
            .all(|(a, b)| a.iter().chain(b).all(|&v| v % k2 == a[0] % k2));
    }
    let last = *ratios.last().unwrap();
    let pass = strictly_decreasing(&ratios) && last < 0.40 && horizontal;
    outcome(
        pass,
        format!(
            "ratios k=2..6 {:?}, decreasing {}, k=6 ratio {:.4} (needs < 0.40), first merges horizontal {}",
            ratios.iter().map(|r| (r * 1e4).round() / 1e4).collect::<Vec<_>>(),
            strictly_decreasing(&ratios),
            last,
            horizontal
        ),
    )
}

fn c3_random_expectation() -> Outcome {
    let root = RngStream::new(3);
    let trials = 100_000;
    let (mut sim_z, mut dis_z, mut exact_z) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..10 {
        let g = instance(root.child("graph").trial(i), 4, 8);
        let sim = monte_carlo_mean(&g, Objective::Similarity, trials, root.child("sim").trial(i)).unwrap();
        sim_z = sim_z.max(sim.z_score(expected_similarity_reward_random(&g).unwrap()).abs());
        let dis = monte_carlo_mean(&g, Objective::Dissimilarity, trials, root.child("dis").trial(i)).unwrap();
        dis_z = dis_z.max(dis.z_score(expected_dissimilarity_reward_random(&g).unwrap()).abs());
        exact_z = exact_z.max(dis.z_score(exact_expected_dissimilarity_reward_random(&g).unwrap()).abs());
    }
    let n = 6;
    let freq = triplet_nonleaf_frequencies(n, trials, root.child("triplet")).unwrap();
    let mut gap = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i != j && j != k && i != k {
                    gap = gap.max((freq[(i * n + j) * n + k] - 1.0 / 3.0).abs());
                }
            }
        }
    }
    let pass = sim_z <= 4.0 && gap <= 0.01 && dis_z <= 4.0;
    outcome(
        pass,
        format!(
            "similarity max|z| {sim_z:.2}, triplet gap {gap:.4}, dissimilarity vs (2/3)nW max|z| {dis_z:.1} \
             (vs (2n+2)W/3 max|z| {exact_z:.2})"
        ),
    )
}

fn c4_triplet_closed_forms() -> Outcome {
    let root = RngStream::new(4);
    let (mut worst_z, mut worst_sum) = (0.0f64, 0.0f64);
    for t in 0..50 {
        let [a, b, c] = random_acute_triple(root.child("triple").trial(t));
        let angles = TripletAngles::from_vectors(&a, &b, &c).unwrap();
        let closed = triplet_separation_probability(angles).unwrap();
        worst_sum = worst_sum.max((closed.sum() - 1.0).abs());
        let freq = mc_verify_triplet(&a, &b, &c, 1_000_000, root.child("mc").trial(t)).unwrap();
        for (p, f) in closed.as_array().into_iter().zip(freq.probabilities.as_array()) {
            let se = freq.stderr(p);
            let z = if se > 0.0 { (f - p).abs() / se } else if f == p { 0.0 } else { f64::INFINITY };
            worst_z = worst_z.max(z);
        }
    }
    outcome(
        worst_z <= 4.0 && worst_sum <= f64::EPSILON,
        format!("max|z| {worst_z:.2} over 200 events, max|sum-1| {worst_sum:e}"),
    )
}

fn c5_factor_revealing() -> Outcome {
    let mut worst = f64::INFINITY;
    for n in 3..=30 {
        for i in 0..=15 {
            let tb = i as f64 / 10.0;
            let slack = factor_revealing_numeric(n, tb).unwrap() - factor_revealing_lower_bound(n, tb).unwrap();
            worst = worst.min(slack);
        }
    }
    outcome(worst >= -1e-6, format!("smallest slack {worst:e}"))
}

fn c6_constants() -> Outcome {
    let s = optimize_alpha_similarity();
    let d = optimize_alpha_dissimilarity();
    let pass = (s.alpha - 0.336379).abs() <= 5e-5
        && (0.13..=0.15).contains(&s.eps2)
        && (d.alpha - 0.667078).abs() <= 5e-5
        && (10.0..=12.0).contains(&d.gamma)
        && (4e-4..=8e-4).contains(&d.eps);
    outcome(
        pass,
        format!(
            "alpha_sim {:.7} at eps2 {:.5}; alpha_dissim {:.7} at gamma {:.4}, eps {:.6}",
            s.alpha, s.eps2, d.alpha, d.gamma, d.eps
        ),
    )
}

fn c7_relaxation() -> Outcome {
    let root = RngStream::new(7);
    let (mut worst_gap, mut worst_res) = (f64::INFINITY, 0.0f64);
    let results = hclab::par::map_indexed(20, |i| {
        let g = instance(root.child("graph").trial(i as u64), 3, 8);
        let (tree, opt) = brute_force_opt(&g, Objective::Similarity).unwrap();
        let cfg = SolverConfig { warm_start: WarmStart::Tree(tree), seed: i as u64, ..SolverConfig::default() };
        let sol = solve_low_rank(&build_hc_sdp(&g).unwrap(), &cfg).unwrap();
        let scale = g.n() as f64 * g.total_weight();
        ((sol.objective - opt) / scale, sol.residuals.max())
    });
    for (gap, res) in results {
        worst_gap = worst_gap.min(gap);
        worst_res = worst_res.max(res);
    }
    outcome(
        worst_gap >= -1e-3 && worst_res <= 1e-5,
        format!("min (sdp - opt)/nW {worst_gap:.3e}, max residual {worst_res:.3e}"),
    )
}

fn c8_embedding_exact() -> Outcome {
    let root = RngStream::new(8);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let st = root.trial(i);
        let g = instance(st, 2, 10);
        let t = random_tree(g.n(), st.child("tree")).unwrap();
        let sol = evaluate(&build_hc_sdp(&g).unwrap(), tree_to_vectors(&t, g.n()).unwrap());
        let r = similarity_reward(&g, &t).unwrap();
        worst = worst.max((sol.objective - r).abs() / r.abs().max(f64::MIN_POSITIVE));
    }
    outcome(worst <= 1e-9, format!("max relative gap {worst:e}"))
}

fn c9_gw_sandwich() -> Outcome {
    let root = RngStream::new(9);
    let rows = hclab::par::map_indexed(50, |i| {
        let st = root.trial(i as u64);
        let g = instance(st, 4, 12);
        let gw = gw_maxcut(&g, 100, st.child("rounds"), &SolverConfig::default()).unwrap();
        let exact = brute_force_maxcut(&g).unwrap();
        (exact.value <= gw.sdp_value + 1e-5 * g.total_weight(), gw.cut.value >= 0.878 * exact.value)
    });
    let sandwich = rows.iter().filter(|r| r.0).count();
    let good = rows.iter().filter(|r| r.1).count();
    outcome(sandwich == 50 && good * 100 >= 95 * 50, format!("sandwich {sandwich}/50, ratio >= 0.878 on {good}/50"))
}

fn c10_guarantees() -> Outcome {
    let root = RngStream::new(10);
    let solver = SolverConfig::default();
    let rows = hclab::par::map_indexed(20, |i| {
        let st = root.trial(i as u64);
        let g = instance(st, 3, 8);
        let sim_opt = brute_force_opt(&g, Objective::Similarity).unwrap().1;
        let dis_opt = brute_force_opt(&g, Objective::Dissimilarity).unwrap().1;
        let sol = solve_low_rank(&build_hc_sdp(&g).unwrap(), &solver).unwrap();
        let plan = PeelPlan::new(&g, PeelConfig::default(), &solver).unwrap();
        let (mut sim, mut dis) = (Vec::new(), Vec::new());
        for k in 0..50 {
            let ks = st.child("seed").trial(k);
            sim.push(best_of_similarity_with(&g, Some(&sol), 1, ks).unwrap().value);
            dis.push(best_of_dissimilarity_with(&g, &plan, 1, ks).unwrap().value);
        }
        let lower = |v: &[f64]| {
            let e = McEstimate::from_samples(v);
            e.mean - Z95 * e.stderr
        };
        (lower(&sim) / sim_opt, lower(&dis) / dis_opt)
    });
    let sim_min = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let dis_min = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    outcome(
        sim_min > 1.0 / 3.0 && dis_min > 2.0 / 3.0,
        format!("smallest 95% lower bound / OPT: similarity {sim_min:.4}, dissimilarity {dis_min:.4}"),
    )
}

fn c11_peel_bound() -> Outcome {
    let params = BenchParams::default();
    let mut runs = 0;
    let mut violations = Vec::new();
    for (name, g) in bench_instances(&params).unwrap() {
        for &gamma in &[0.5, 1.0, 1.5, 2.0, 4.0, 11.1] {
            let cfg = PeelConfig { gamma, gw_rounds: 10 };
            let out = peel_off_first_maxcut_next(&g, cfg, RngStream::new(11), &SolverConfig::default()).unwrap();
            runs += 1;
            if out.peeled.len() as f64 > g.n() as f64 / gamma {
                violations.push(format!("{name}@{gamma}"));
            }
        }
    }
    outcome(violations.is_empty(), format!("{runs} runs, violations {violations:?}"))
}

fn c12_embedded_clique() -> Outcome {
    let g = embedded_clique_instance(200, 0.2).unwrap();
    let reference = dissimilarity_reward(&g, &peel_one_by_one_tree(&g).unwrap()).unwrap();
    let solver = SolverConfig::default();
    let root = RngStream::new(12);
    let base = recursive_maxcut_baseline(&g, 100, root.child("recursive"), &solver).unwrap();
    let base = dissimilarity_reward(&g, &base).unwrap() / reference;
    let best = best_of_dissimilarity(&g, 1, root.child("best"), PeelConfig::default(), &solver).unwrap().value / reference;
    let tau = PeelConfig::default().threshold(&g);
    // same instance with a threshold low enough to reach the clique
    let low = PeelConfig { gamma: 2.0, ..PeelConfig::default() };
    let best_low = best_of_dissimilarity(&g, 1, root.child("best"), low, &solver).unwrap().value / reference;
    outcome(
        base < best,
        format!(
            "recursive max-cut {base:.4} vs best-of {best:.4} of the one-by-one tree; threshold {tau:.2} exceeds \
             clique degree 39 so nothing is peeled (with gamma=2 best-of reaches {best_low:.4})"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 12] = [
        ("1 tight dissimilarity family", Duration::from_secs(10), c1_tight_dissimilarity),
        ("2 tight similarity family", Duration::from_secs(30), c2_tight_similarity),
        ("3 random-always expectation", Duration::from_secs(60), c3_random_expectation),
        ("4 triplet closed forms", Duration::from_secs(60), c4_triplet_closed_forms),
        ("5 factor-revealing bound", Duration::from_secs(30), c5_factor_revealing),
        ("6 constants", Duration::from_secs(10), c6_constants),
        ("7 relaxation dominance", Duration::from_secs(600), c7_relaxation),
        ("8 integral embedding exactness", Duration::from_secs(600), c8_embedding_exact),
        ("9 GW sandwich", Duration::from_secs(300), c9_gw_sandwich),
        ("10 best-of expectation property", Duration::from_secs(3600), c10_guarantees),
        ("11 peel bound", Duration::from_secs(3600), c11_peel_bound),
        ("12 embedded-clique baseline gap", Duration::from_secs(120), c12_embedded_clique),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let o = timed(limit, f);
        println!("{} criterion {}: {}", if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of 12 criteria pass", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
