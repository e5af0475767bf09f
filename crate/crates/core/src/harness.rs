//! Verification scenarios, algorithm comparison and report output.
//!
//! A [`Scenario`] is a table of computed quantities plus named pass/fail
//! checks. Tables serialize to CSV with a fixed header and 12 significant
//! digits per float, so two runs with the same seed give identical bytes.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::brute::{brute_force_opt, MAX_BRUTE_FORCE_N};
use crate::dendrogram::Dendrogram;
use crate::error::{Error, Result};
use crate::graph::{
    clique, embedded_clique_instance, random_instance, tight_dissimilarity_instance, tight_similarity_instance,
    WeightDist, WeightedGraph,
};
use crate::linkage::{
    average_linkage, linkage_ratio_report, tight_dissimilarity_linkage_value, LinkageMode,
    TieBreak, TightFamily,
};
use crate::objectives::{dissimilarity_reward, similarity_reward, Objective};
use crate::par;
use crate::peel::{
    best_of_dissimilarity, brute_force_maxcut, gw_maxcut, optimize_alpha_dissimilarity, peel_off_first_maxcut_next,
    peel_one_by_one_tree, peel_vertices, recursive_maxcut_baseline, PeelConfig, DEFAULT_GAMMA, DEFAULT_GW_ROUNDS,
};
use crate::random_hc::{
    exact_expected_dissimilarity_reward_random, expected_dissimilarity_reward_random,
    expected_similarity_reward_random, monte_carlo_mean, random_tree, triplet_nonleaf_frequencies,
};
use crate::rng::RngStream;
use crate::sdp::{build_hc_sdp, evaluate, solve_low_rank, tree_to_vectors, SolverConfig, WarmStart};
use crate::sdp_round::{
    alpha_similarity, best_of_similarity, factor_revealing_lower_bound, factor_revealing_numeric,
    mc_verify_triplet, optimize_alpha_similarity, sdp_first_random_next, triplet_separation_probability,
    TripletAngles,
};

/// Formats `x` with 12 significant digits in the style of C's `%.12g`.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { format!("{x}") };
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt_cell(x: Option<f64>) -> String {
    x.map(sig12).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub checks: Vec<Check>,
}

impl Scenario {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), pass, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    /// One `PASS`/`FAIL` line per check.
    pub fn summary(&self) -> String {
        self.checks
            .iter()
            .map(|c| format!("{} {}/{}: {}\n", if c.pass { "PASS" } else { "FAIL" }, self.name, c.name, c.detail))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "name": self.name,
            "passed": self.passed(),
            "header": self.header,
            "rows": self.rows,
            "checks": self.checks,
        })
    }
}

/// Tree-building algorithms known to [`run_algorithm`] and [`compare`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Algorithm {
    AverageLinkage,
    RandomAlways,
    SdpRandom,
    PeelMaxcut,
    RecursiveMaxcut,
    BruteForce,
    BestOfSimilarity,
    BestOfDissimilarity,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::AverageLinkage,
        Algorithm::RandomAlways,
        Algorithm::SdpRandom,
        Algorithm::PeelMaxcut,
        Algorithm::RecursiveMaxcut,
        Algorithm::BruteForce,
        Algorithm::BestOfSimilarity,
        Algorithm::BestOfDissimilarity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::AverageLinkage => "average-linkage",
            Algorithm::RandomAlways => "random-always",
            Algorithm::SdpRandom => "sdp-random",
            Algorithm::PeelMaxcut => "peel-maxcut",
            Algorithm::RecursiveMaxcut => "recursive-maxcut",
            Algorithm::BruteForce => "brute-force",
            Algorithm::BestOfSimilarity => "best-of-sim",
            Algorithm::BestOfDissimilarity => "best-of-dissim",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let name = match s {
            "avg-linkage" => "average-linkage",
            "random" => "random-always",
            other => other,
        };
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == name)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

/// Knobs shared by the algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgParams {
    pub peel: PeelConfig,
    pub solver: SolverConfig,
    /// Runs per constituent for the best-of algorithms.
    pub best_of_runs: usize,
}

impl Default for AlgParams {
    fn default() -> Self {
        Self { peel: PeelConfig::default(), solver: SolverConfig::default(), best_of_runs: 1 }
    }
}

/// Runs one algorithm and scores its tree under `objective`.
pub fn run_algorithm(
    g: &WeightedGraph,
    alg: Algorithm,
    objective: Objective,
    stream: RngStream,
    params: &AlgParams,
) -> Result<(Dendrogram, f64)> {
    let tree = match alg {
        Algorithm::AverageLinkage => {
            let mode = match objective {
                Objective::Dissimilarity => LinkageMode::Dissimilarity,
                Objective::Similarity | Objective::Dasgupta => LinkageMode::Similarity,
            };
            average_linkage(g, mode, TieBreak::Lexicographic).0
        }
        Algorithm::RandomAlways => random_tree(g.n(), stream)?,
        Algorithm::SdpRandom => sdp_first_random_next(g, stream, &params.solver)?.tree,
        Algorithm::PeelMaxcut => peel_off_first_maxcut_next(g, params.peel, stream, &params.solver)?.tree,
        Algorithm::RecursiveMaxcut => recursive_maxcut_baseline(g, params.peel.gw_rounds, stream, &params.solver)?,
        Algorithm::BruteForce => brute_force_opt(g, objective)?.0,
        Algorithm::BestOfSimilarity => best_of_similarity(g, params.best_of_runs, stream, &params.solver)?.tree,
        Algorithm::BestOfDissimilarity => {
            best_of_dissimilarity(g, params.best_of_runs, stream, params.peel, &params.solver)?.tree
        }
    };
    let value = objective.evaluate(g, &tree)?;
    Ok((tree, value))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub instance: String,
    pub algorithm: String,
    pub seed: u64,
    pub trial: usize,
    pub objective: String,
    pub value: f64,
    /// Brute-force optimum, when `n` is small enough.
    pub reference: Option<f64>,
    pub ratio: Option<f64>,
    pub wall_seconds: f64,
}

const REPORT_HEADER: &str = "instance,algorithm,seed,trial,objective,value,reference,ratio";

/// Report rows as CSV. Wall time is appended only when `timing` is set,
/// since it is the one column that differs between identical runs.
pub fn reports_to_csv(reports: &[RunReport], timing: bool) -> String {
    let mut out = String::from(REPORT_HEADER);
    if timing {
        out.push_str(",wall_seconds");
    }
    out.push('\n');
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}",
            r.instance,
            r.algorithm,
            r.seed,
            r.trial,
            r.objective,
            sig12(r.value),
            opt_cell(r.reference),
            opt_cell(r.ratio)
        ));
        if timing {
            out.push_str(&format!(",{}", sig12(r.wall_seconds)));
        }
        out.push('\n');
    }
    out
}

/// Every algorithm in `algs` for `trials` seeded trials each; trial `t` of
/// algorithm `a` draws from `RngStream::new(seed).child(a.name()).trial(t)`.
pub fn compare(
    g: &WeightedGraph,
    instance: &str,
    algs: &[Algorithm],
    trials: usize,
    seed: u64,
    objective: Objective,
    params: &AlgParams,
) -> Result<Vec<RunReport>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if algs.contains(&Algorithm::BruteForce) && g.n() > MAX_BRUTE_FORCE_N {
        return Err(Error::TooLarge { n: g.n(), max: MAX_BRUTE_FORCE_N });
    }
    let reference = if g.n() <= MAX_BRUTE_FORCE_N { Some(brute_force_opt(g, objective)?.1) } else { None };
    let root = RngStream::new(seed);
    let mut out = Vec::new();
    for &alg in algs {
        for trial in 0..trials {
            let start = Instant::now();
            let (_, value) = run_algorithm(g, alg, objective, root.child(alg.name()).trial(trial as u64), params)?;
            let ratio = reference.filter(|&r| r > 0.0).map(|r| value / r);
            out.push(RunReport {
                instance: instance.to_string(),
                algorithm: alg.name().to_string(),
                seed,
                trial,
                objective: objective.name().to_string(),
                value,
                reference,
                ratio,
                wall_seconds: start.elapsed().as_secs_f64(),
            });
        }
    }
    Ok(out)
}

/// Random instance used by the scenarios: `n` uniform in `range`, density
/// 0.8, weights in `(0, 1]`.
pub fn scenario_instance(range: (usize, usize), stream: RngStream) -> Result<WeightedGraph> {
    let n = stream.child("size").rng().random_range(range.0..=range.1);
    random_instance(n, 0.8, WeightDist::Uniform01, stream.child("graph"))
}

fn decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

pub fn verify_tight_similarity(ks: &[usize], eps: f64) -> Result<Scenario> {
    let mut s = Scenario::new("sim-tight", &["k", "n", "al_value", "lower_bound", "ratio"]);
    let mut ratios = Vec::new();
    for &k in ks {
        let r = linkage_ratio_report(TightFamily::Similarity { k, eps })?;
        s.row(vec![k.to_string(), r.n.to_string(), sig12(r.alg_value), sig12(r.reference_value), sig12(r.ratio)]);
        ratios.push(r.ratio);
        s.check(format!("k={k} ratio above 1/3"), r.ratio > 1.0 / 3.0, format!("ratio {}", sig12(r.ratio)));
        if k == 3 {
            s.check(
                "k=3 lower bound",
                r.reference_value >= 1944.0,
                format!("vertical-first reward {} (needs >= 1944)", sig12(r.reference_value)),
            );
        }
        let g = tight_similarity_instance(k, eps)?;
        let (_, trace) = average_linkage(&g, LinkageMode::Similarity, TieBreak::Lexicographic);
        let k2 = k * k;
        let horizontal = trace
            .merged_members(g.n())
            .iter()
            .take(k2 * (k - 1))
            .all(|(a, b)| a.iter().chain(b).all(|&v| v % k2 == a[0] % k2));
        s.check(
            format!("k={k} first merges horizontal"),
            horizontal,
            format!("first {} merges stay inside horizontal cliques", k2 * (k - 1)),
        );
    }
    s.check("ratio decreases with k", decreasing(&ratios), format!("{:?}", ratios.iter().map(|r| sig12(*r)).collect::<Vec<_>>()));
    Ok(s)
}

pub fn verify_tight_dissimilarity(ms: &[usize]) -> Result<Scenario> {
    let mut s = Scenario::new("dissim-tight", &["m", "n", "al_value", "closed_form", "nW", "ratio"]);
    let mut ratios = Vec::new();
    let mut exact = true;
    for &m in ms {
        let r = linkage_ratio_report(TightFamily::Dissimilarity { m })?;
        let closed = tight_dissimilarity_linkage_value(m);
        let nw = r.n as f64 * r.total_weight;
        s.row(vec![m.to_string(), r.n.to_string(), sig12(r.alg_value), sig12(closed), sig12(nw), sig12(r.alg_value / nw)]);
        if r.alg_value != closed {
            exact = false;
            s.check(format!("m={m} closed form"), false, format!("simulated {} vs {}", sig12(r.alg_value), sig12(closed)));
        }
        ratios.push(r.alg_value / nw);
    }
    s.check("simulation equals closed form", exact, format!("{} sizes", ms.len()));
    s.check("ratio decreases with m", decreasing(&ratios), "ratio vs nW");
    if let Some(i) = ms.iter().position(|&m| m == 50) {
        s.check("m=50 ratio", ratios[i] < 0.6803 + 1e-9, format!("ratio {} (needs < 0.6803)", sig12(ratios[i])));
    }
    if let Some(i) = ms.iter().position(|&m| m == 2) {
        s.check("m=2 ratio", ratios[i] == 1.0, format!("ratio {}", sig12(ratios[i])));
    }
    Ok(s)
}

/// Uniform unit vector in `R^dim`.
pub fn random_unit_vector(dim: usize, rng: &mut crate::rng::Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Three random unit vectors in `R³` with pairwise nonnegative inner products.
pub fn random_acute_triple(stream: RngStream) -> [Vec<f64>; 3] {
    let mut rng = stream.rng();
    let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    loop {
        let t = [random_unit_vector(3, &mut rng), random_unit_vector(3, &mut rng), random_unit_vector(3, &mut rng)];
        if d(&t[0], &t[1]) >= 0.0 && d(&t[0], &t[2]) >= 0.0 && d(&t[1], &t[2]) >= 0.0 {
            return t;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripletParams {
    pub triples: usize,
    pub trials: u64,
    pub seed: u64,
}

impl Default for TripletParams {
    fn default() -> Self {
        Self { triples: 50, trials: 1_000_000, seed: 0 }
    }
}

pub fn verify_triplet(p: TripletParams) -> Result<Scenario> {
    let mut s = Scenario::new(
        "triplet",
        &["triple", "theta_ij", "theta_ik", "theta_jk", "event", "closed_form", "empirical", "z"],
    );
    let root = RngStream::new(p.seed);
    let names = ["ij|k", "ik|j", "jk|i", "together"];
    let mut worst_z: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    for t in 0..p.triples {
        let [vi, vj, vk] = random_acute_triple(root.child("triple").trial(t as u64));
        let angles = TripletAngles::from_vectors(&vi, &vj, &vk)?;
        let closed = triplet_separation_probability(angles)?;
        let freq = mc_verify_triplet(&vi, &vj, &vk, p.trials, root.child("hyperplanes").trial(t as u64))?;
        worst_sum = worst_sum.max((closed.sum() - 1.0).abs());
        for (e, (&c, &f)) in closed.as_array().iter().zip(&freq.probabilities.as_array()).enumerate() {
            let se = freq.stderr(c);
            let z = if se > 0.0 { (f - c) / se } else if f == c { 0.0 } else { f64::INFINITY };
            worst_z = worst_z.max(z.abs());
            s.row(vec![
                t.to_string(),
                sig12(angles.ij),
                sig12(angles.ik),
                sig12(angles.jk),
                names[e].into(),
                sig12(c),
                sig12(f),
                sig12(z),
            ]);
        }
        // Pr[ik|j] + Pr[jk|i] = θ_ij/π, and cyclically
        let fp = freq.probabilities;
        for (lhs, theta) in [(fp.ik_j + fp.jk_i, angles.ij), (fp.ij_k + fp.jk_i, angles.ik), (fp.ij_k + fp.ik_j, angles.jk)] {
            let target = theta / std::f64::consts::PI;
            let se = freq.stderr(target).max(f64::MIN_POSITIVE);
            worst_identity = worst_identity.max(((lhs - target) / se).abs());
        }
    }
    s.check("events within 4 stderr", worst_z <= 4.0, format!("largest |z| = {}", sig12(worst_z)));
    s.check("closed forms sum to 1", worst_sum <= 1e-12, format!("largest |sum - 1| = {}", sig12(worst_sum)));
    s.check("pairwise identities within 4 stderr", worst_identity <= 4.0, format!("largest |z| = {}", sig12(worst_identity)));
    Ok(s)
}

pub fn verify_factor(ns: &[usize], thetas: &[f64]) -> Result<Scenario> {
    let mut s = Scenario::new("factor", &["n", "theta_bar", "numeric", "lower_bound", "slack"]);
    let mut worst = f64::INFINITY;
    let mut worst_at = (0, 0.0);
    for &n in ns {
        for &t in thetas {
            let numeric = factor_revealing_numeric(n, t)?;
            let bound = factor_revealing_lower_bound(n, t)?;
            s.row(vec![n.to_string(), sig12(t), sig12(numeric), sig12(bound), sig12(numeric - bound)]);
            if numeric - bound < worst {
                worst = numeric - bound;
                worst_at = (n, t);
            }
        }
    }
    s.check(
        "numeric >= closed-form bound",
        worst >= -1e-6,
        format!("smallest slack {} at n={} theta_bar={}", sig12(worst), worst_at.0, sig12(worst_at.1)),
    );
    Ok(s)
}

/// The grid `0, 0.1, …, 1.5`.
pub fn default_theta_grid() -> Vec<f64> {
    (0..=15).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Similarity,
    Dissimilarity,
    Both,
}

impl FromStr for Which {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sim" => Ok(Which::Similarity),
            "dissim" => Ok(Which::Dissimilarity),
            "both" => Ok(Which::Both),
            _ => Err(Error::InvalidParameter(format!("unknown constant set '{s}' (sim, dissim, both)"))),
        }
    }
}

pub const ALPHA_SIM: f64 = 0.336379;
pub const ALPHA_DISSIM: f64 = 0.667078;

pub fn verify_constants(which: Which) -> Result<Scenario> {
    let mut s = Scenario::new("constants", &["constant", "parameter", "value"]);
    if which != Which::Dissimilarity {
        let opt = optimize_alpha_similarity();
        let at = alpha_similarity(0.139)?;
        s.row(vec!["alpha_sim".into(), format!("eps2={}", sig12(opt.eps2)), sig12(opt.alpha)]);
        s.row(vec!["eps1".into(), format!("eps2={}", sig12(opt.eps2)), sig12(opt.eps1)]);
        s.row(vec!["alpha_sim".into(), "eps2=0.139".into(), sig12(at.alpha)]);
        s.check(
            "alpha_sim",
            (opt.alpha - ALPHA_SIM).abs() <= 5e-5,
            format!("{} vs {}", sig12(opt.alpha), ALPHA_SIM),
        );
        s.check("eps2*", (0.13..=0.15).contains(&opt.eps2), sig12(opt.eps2).to_string());
        s.check("alpha_sim margin", opt.alpha - 1.0 / 3.0 >= 0.003, sig12(opt.alpha - 1.0 / 3.0).to_string());
    }
    if which != Which::Similarity {
        let opt = optimize_alpha_dissimilarity();
        let at = crate::peel::alpha_dissimilarity(DEFAULT_GAMMA, 0.000612)?;
        s.row(vec!["alpha_dissim".into(), format!("gamma={} eps={}", sig12(opt.gamma), sig12(opt.eps)), sig12(opt.alpha)]);
        s.row(vec!["delta".into(), format!("gamma={}", sig12(opt.gamma)), sig12(opt.delta)]);
        s.row(vec!["alpha_dissim".into(), "gamma=11.1 eps=0.000612".into(), sig12(at.alpha)]);
        s.row(vec!["rho_gw".into(), String::new(), sig12(crate::peel::rho_gw())]);
        s.check(
            "alpha_dissim",
            (opt.alpha - ALPHA_DISSIM).abs() <= 5e-5,
            format!("{} vs {}", sig12(opt.alpha), ALPHA_DISSIM),
        );
        s.check("gamma*", (10.0..=12.0).contains(&opt.gamma), sig12(opt.gamma).to_string());
        s.check("eps*", (4e-4..=8e-4).contains(&opt.eps), sig12(opt.eps).to_string());
        s.check("alpha_dissim margin", opt.alpha - 2.0 / 3.0 >= 4e-4, sig12(opt.alpha - 2.0 / 3.0).to_string());
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationParams {
    pub instances: usize,
    pub n_range: (usize, usize),
    pub embeddings: usize,
    pub embedding_n_range: (usize, usize),
    pub seed: u64,
    pub solver: SolverConfig,
}

impl Default for RelaxationParams {
    fn default() -> Self {
        Self {
            instances: 20,
            n_range: (3, 8),
            embeddings: 100,
            embedding_n_range: (2, 10),
            seed: 0,
            solver: SolverConfig::default(),
        }
    }
}

/// The relaxation bounds the brute-force optimum, and integral embeddings
/// reproduce the similarity reward.
pub fn verify_relaxation(p: &RelaxationParams) -> Result<Scenario> {
    let mut s = Scenario::new("relaxation", &["instance", "n", "W", "opt", "sdp", "max_residual", "converged"]);
    let root = RngStream::new(p.seed);
    let results = par::map_indexed(p.instances, |i| -> Result<_> {
        let g = scenario_instance(p.n_range, root.child("relaxation").trial(i as u64))?;
        let (tree, opt) = brute_force_opt(&g, Objective::Similarity)?;
        let cfg = SolverConfig { warm_start: WarmStart::Tree(tree), ..p.solver.clone() };
        let sol = solve_low_rank(&build_hc_sdp(&g)?, &cfg)?;
        Ok((g, opt, sol))
    });
    let mut dominated = true;
    let mut worst_res: f64 = 0.0;
    for (i, r) in results.into_iter().enumerate() {
        let (g, opt, sol) = r?;
        let n = g.n() as f64;
        let res = sol.residuals.max();
        worst_res = worst_res.max(res);
        s.row(vec![
            i.to_string(),
            g.n().to_string(),
            sig12(g.total_weight()),
            sig12(opt),
            sig12(sol.objective),
            sig12(res),
            sol.converged.to_string(),
        ]);
        if sol.objective < opt - 1e-3 * n * g.total_weight() {
            dominated = false;
            s.check(format!("instance {i}"), false, format!("sdp {} below opt {}", sig12(sol.objective), sig12(opt)));
        }
    }
    s.check("sdp >= opt - 1e-3 nW", dominated, format!("{} instances", p.instances));
    s.check("residuals <= 1e-5", worst_res <= 1e-5, format!("largest {}", sig12(worst_res)));

    let mut worst_rel: f64 = 0.0;
    let mut exact_feasible = true;
    for i in 0..p.embeddings {
        let st = root.child("embedding").trial(i as u64);
        let g = scenario_instance(p.embedding_n_range, st)?;
        let t = random_tree(g.n(), st.child("tree"))?;
        let sol = evaluate(&build_hc_sdp(&g)?, tree_to_vectors(&t, g.n())?);
        let reward = similarity_reward(&g, &t)?;
        worst_rel = worst_rel.max((sol.objective - reward).abs() / reward.abs().max(1e-300));
        exact_feasible &= sol.residuals.max() == 0.0;
    }
    s.check(
        "embedding objective equals similarity reward",
        worst_rel <= 1e-9,
        format!("largest relative gap {} over {} trees", sig12(worst_rel), p.embeddings),
    );
    s.check("embeddings are exactly feasible", exact_feasible, "all residuals 0");
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationParams {
    pub graphs: usize,
    pub n_range: (usize, usize),
    pub trials: u64,
    pub triplet_n: usize,
    pub triplet_trials: u64,
    pub seed: u64,
}

impl Default for ExpectationParams {
    fn default() -> Self {
        Self { graphs: 10, n_range: (4, 8), trials: 100_000, triplet_n: 6, triplet_trials: 100_000, seed: 0 }
    }
}

/// Monte-Carlo means of random trees against the closed forms.
pub fn verify_random_expectation(p: ExpectationParams) -> Result<Scenario> {
    let mut s = Scenario::new(
        "random-expectation",
        &["graph", "n", "W", "objective", "mean", "stderr", "target", "z", "exact_target", "z_exact"],
    );
    let root = RngStream::new(p.seed);
    let mut worst_sim: f64 = 0.0;
    let mut worst_dis_exact: f64 = 0.0;
    let mut worst_dis_quoted: f64 = 0.0;
    for i in 0..p.graphs {
        let g = scenario_instance(p.n_range, root.child("expectation-graph").trial(i as u64))?;
        let sim = monte_carlo_mean(&g, Objective::Similarity, p.trials, root.child("sim").trial(i as u64))?;
        let target = expected_similarity_reward_random(&g)?;
        let z = sim.z_score(target);
        worst_sim = worst_sim.max(z.abs());
        s.row(vec![
            i.to_string(),
            g.n().to_string(),
            sig12(g.total_weight()),
            "sim".into(),
            sig12(sim.mean),
            sig12(sim.stderr),
            sig12(target),
            sig12(z),
            sig12(target),
            sig12(z),
        ]);
        let dis = monte_carlo_mean(&g, Objective::Dissimilarity, p.trials, root.child("dissim").trial(i as u64))?;
        let quoted = expected_dissimilarity_reward_random(&g)?;
        let exact = exact_expected_dissimilarity_reward_random(&g)?;
        let (zp, ze) = (dis.z_score(quoted), dis.z_score(exact));
        worst_dis_quoted = worst_dis_quoted.max(zp.abs());
        worst_dis_exact = worst_dis_exact.max(ze.abs());
        s.row(vec![
            i.to_string(),
            g.n().to_string(),
            sig12(g.total_weight()),
            "dissim".into(),
            sig12(dis.mean),
            sig12(dis.stderr),
            sig12(quoted),
            sig12(zp),
            sig12(exact),
            sig12(ze),
        ]);
    }
    s.check("similarity mean within 4 stderr of (n-2)W/3", worst_sim <= 4.0, format!("largest |z| = {}", sig12(worst_sim)));
    s.check(
        "dissimilarity mean within 4 stderr of (2n+2)W/3",
        worst_dis_exact <= 4.0,
        format!("largest |z| = {}; against (2/3)nW the largest |z| is {}", sig12(worst_dis_exact), sig12(worst_dis_quoted)),
    );
    let freq = triplet_nonleaf_frequencies(p.triplet_n, p.triplet_trials, root.child("triplet"))?;
    let n = p.triplet_n;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i != j && j != k && i != k {
                    worst = worst.max((freq[(i * n + j) * n + k] - 1.0 / 3.0).abs());
                }
            }
        }
    }
    s.check("triplet non-leaf probability within 0.01 of 1/3", worst <= 0.01, format!("largest gap {}", sig12(worst)));
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GwParams {
    pub instances: usize,
    pub n_range: (usize, usize),
    pub rounds: usize,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl Default for GwParams {
    fn default() -> Self {
        Self { instances: 50, n_range: (4, 12), rounds: DEFAULT_GW_ROUNDS, seed: 0, solver: SolverConfig::default() }
    }
}

pub fn verify_gw_ratio(p: &GwParams) -> Result<Scenario> {
    let mut s = Scenario::new("gw-ratio", &["instance", "n", "W", "gw_cut", "brute_force", "sdp", "ratio"]);
    let root = RngStream::new(p.seed);
    let results = par::map_indexed(p.instances, |i| -> Result<_> {
        let st = root.child("gw").trial(i as u64);
        let g = scenario_instance(p.n_range, st)?;
        let gw = gw_maxcut(&g, p.rounds, st.child("rounding"), &p.solver)?;
        let exact = brute_force_maxcut(&g)?;
        Ok((g, gw, exact))
    });
    let mut sandwich = true;
    let mut good = 0;
    for (i, r) in results.into_iter().enumerate() {
        let (g, gw, exact) = r?;
        let w = g.total_weight();
        let ratio = gw.cut.value / exact.value;
        s.row(vec![
            i.to_string(),
            g.n().to_string(),
            sig12(w),
            sig12(gw.cut.value),
            sig12(exact.value),
            sig12(gw.sdp_value),
            sig12(ratio),
        ]);
        if exact.value > gw.sdp_value + 1e-5 * w || gw.cut.value > exact.value + 1e-9 * w {
            sandwich = false;
            s.check(
                format!("instance {i} sandwich"),
                false,
                format!("gw {} brute {} sdp {}", sig12(gw.cut.value), sig12(exact.value), sig12(gw.sdp_value)),
            );
        }
        if gw.cut.value >= 0.878 * exact.value {
            good += 1;
        }
    }
    s.check("gw <= brute force <= sdp", sandwich, format!("{} instances", p.instances));
    let frac = good as f64 / p.instances as f64;
    s.check("cut >= 0.878 brute force", frac >= 0.95, format!("{good}/{} instances", p.instances));
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedCliqueParams {
    pub n: usize,
    pub eps: f64,
    pub peel: PeelConfig,
    pub runs: usize,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl Default for EmbeddedCliqueParams {
    fn default() -> Self {
        Self { n: 200, eps: 0.2, peel: PeelConfig::default(), runs: 1, seed: 0, solver: SolverConfig::default() }
    }
}

/// Recursive max-cut against the best of random trees and peel-then-max-cut on the
/// embedded-clique instance, both as ratios to the one-by-one peel tree.
pub fn verify_embedded_clique(p: &EmbeddedCliqueParams) -> Result<Scenario> {
    let mut s = Scenario::new("embedded-clique", &["algorithm", "gamma", "threshold", "peeled", "value", "reference", "ratio"]);
    let g = embedded_clique_instance(p.n, p.eps)?;
    let reference = dissimilarity_reward(&g, &peel_one_by_one_tree(&g)?)?;
    let root = RngStream::new(p.seed);
    let baseline = recursive_maxcut_baseline(&g, p.peel.gw_rounds, root.child("recursive-maxcut"), &p.solver)?;
    let base = dissimilarity_reward(&g, &baseline)?;
    let tau = p.peel.threshold(&g);
    let peeled = peel_vertices(&g, tau).0.len();
    s.row(vec!["recursive-maxcut".into(), String::new(), String::new(), String::new(), sig12(base), sig12(reference), sig12(base / reference)]);
    let best = best_of_dissimilarity(&g, p.runs, root.child("best-of-dissim"), p.peel, &p.solver)?;
    s.row(vec![
        "best-of-dissim".into(),
        sig12(p.peel.gamma),
        sig12(tau),
        peeled.to_string(),
        sig12(best.value),
        sig12(reference),
        sig12(best.value / reference),
    ]);
    s.check(
        "recursive max-cut below best-of",
        base < best.value,
        format!(
            "recursive {} vs best-of {} ({} vertices peeled at threshold {})",
            sig12(base / reference),
            sig12(best.value / reference),
            peeled,
            sig12(tau)
        ),
    );
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuaranteeParams {
    pub instances: usize,
    pub n_range: (usize, usize),
    pub seeds: usize,
    pub seed: u64,
    pub peel: PeelConfig,
    pub solver: SolverConfig,
}

impl Default for GuaranteeParams {
    fn default() -> Self {
        Self {
            instances: 20,
            n_range: (3, 8),
            seeds: 50,
            seed: 0,
            peel: PeelConfig::default(),
            solver: SolverConfig::default(),
        }
    }
}

/// One-sided 95% normal quantile.
pub const Z95: f64 = 1.6448536269514722;

/// Mean best-of values over many seeds against a third (similarity) and two
/// thirds (dissimilarity) of the brute-force optimum. The relaxation is
/// solved once per instance; the seeds drive the rounding and random trees.
pub fn verify_guarantees(p: &GuaranteeParams) -> Result<Scenario> {
    use crate::peel::{best_of_dissimilarity_with, PeelPlan};
    use crate::sdp_round::best_of_similarity_with;
    let mut s = Scenario::new("guarantees", &["instance", "n", "objective", "opt", "mean", "stderr", "lower_95", "target"]);
    let root = RngStream::new(p.seed);
    let results = par::map_indexed(p.instances, |i| -> Result<_> {
        let st = root.child("guarantee").trial(i as u64);
        let g = scenario_instance(p.n_range, st)?;
        let sim_opt = brute_force_opt(&g, Objective::Similarity)?.1;
        let dis_opt = brute_force_opt(&g, Objective::Dissimilarity)?.1;
        let sol = if g.n() > 2 { Some(solve_low_rank(&build_hc_sdp(&g)?, &p.solver)?) } else { None };
        let plan = PeelPlan::new(&g, p.peel, &p.solver)?;
        let mut sim = Vec::with_capacity(p.seeds);
        let mut dis = Vec::with_capacity(p.seeds);
        for k in 0..p.seeds {
            let ks = st.child("seed").trial(k as u64);
            sim.push(best_of_similarity_with(&g, sol.as_ref(), 1, ks)?.value);
            dis.push(best_of_dissimilarity_with(&g, &plan, 1, ks)?.value);
        }
        Ok((g.n(), sim_opt, dis_opt, sim, dis))
    });
    let mut sim_ok = true;
    let mut dis_ok = true;
    for (i, r) in results.into_iter().enumerate() {
        let (n, sim_opt, dis_opt, sim, dis) = r?;
        for (name, opt, values, target, ok) in [
            ("sim", sim_opt, &sim, sim_opt / 3.0, &mut sim_ok),
            ("dissim", dis_opt, &dis, 2.0 * dis_opt / 3.0, &mut dis_ok),
        ] {
            let est = crate::random_hc::McEstimate::from_samples(values);
            let lower = est.mean - Z95 * est.stderr;
            s.row(vec![
                i.to_string(),
                n.to_string(),
                name.into(),
                sig12(opt),
                sig12(est.mean),
                sig12(est.stderr),
                sig12(lower),
                sig12(target),
            ]);
            if !(lower > target) {
                *ok = false;
            }
        }
    }
    s.check("best-of similarity mean > OPT/3 (one-sided 95%)", sim_ok, format!("{} instances", p.instances));
    s.check("best-of dissimilarity mean > 2 OPT/3 (one-sided 95%)", dis_ok, format!("{} instances", p.instances));
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchParams {
    pub sizes: Vec<usize>,
    pub gammas: Vec<f64>,
    pub per_size: usize,
    pub seed: u64,
    pub gw_rounds: usize,
    pub solver: SolverConfig,
}

impl Default for BenchParams {
    fn default() -> Self {
        Self {
            sizes: vec![8, 16, 32, 64],
            gammas: vec![1.5, 2.0, 4.0, DEFAULT_GAMMA],
            per_size: 3,
            seed: 0,
            gw_rounds: DEFAULT_GW_ROUNDS,
            solver: SolverConfig::default(),
        }
    }
}

/// Instances of the benchmark sweep: random graphs of several densities, an
/// embedded clique, a star, and the tight dissimilarity family.
pub fn bench_instances(p: &BenchParams) -> Result<Vec<(String, WeightedGraph)>> {
    let root = RngStream::new(p.seed);
    let mut out = Vec::new();
    for &n in &p.sizes {
        for i in 0..p.per_size {
            let density = [0.2, 0.5, 1.0][i % 3];
            let dist = if i % 2 == 0 { WeightDist::Uniform01 } else { WeightDist::Unit };
            let g = random_instance(n, density, dist, root.child("bench").trial((n * 1000 + i) as u64))?;
            out.push((format!("random-n{n}-d{density}-{i}"), g));
        }
        out.push((format!("embedded-clique-n{n}"), embedded_clique_instance(n, 0.25)?));
        let mut star = WeightedGraph::empty(n)?;
        for v in 1..n {
            star.set_weight(0, v, 1.0)?;
        }
        out.push((format!("star-n{n}"), star));
        if n % 2 == 0 && n >= 4 {
            out.push((format!("tight-dissim-n{n}"), tight_dissimilarity_instance(n / 2)?));
        }
        out.push((format!("clique-n{n}"), clique(n, 1.0)?));
    }
    Ok(out)
}

/// Runs peel-then-max-cut across the sweep and checks the peel bound `ℓ ≤ n/γ`
/// and that every peeled vertex was above the threshold.
pub fn bench_sweep(p: &BenchParams) -> Result<Scenario> {
    let mut s = Scenario::new(
        "bench",
        &["instance", "n", "W", "gamma", "threshold", "peeled", "peel_bound", "dissim_value", "nW", "ratio_nW"],
    );
    let instances = bench_instances(p)?;
    let root = RngStream::new(p.seed);
    let mut bound_ok = true;
    let mut above_ok = true;
    let mut runs = 0;
    for (name, g) in &instances {
        for &gamma in &p.gammas {
            let cfg = PeelConfig { gamma, gw_rounds: p.gw_rounds };
            let out = peel_off_first_maxcut_next(g, cfg, root.child(name), &p.solver)?;
            let value = dissimilarity_reward(g, &out.tree)?;
            let n = g.n();
            let nw = n as f64 * g.total_weight();
            let bound = n as f64 / gamma;
            s.row(vec![
                name.clone(),
                n.to_string(),
                sig12(g.total_weight()),
                sig12(gamma),
                sig12(out.threshold),
                out.peeled.len().to_string(),
                sig12(bound),
                sig12(value),
                sig12(nw),
                opt_cell((nw > 0.0).then(|| value / nw)),
            ]);
            runs += 1;
            if out.peeled.len() as f64 > bound {
                bound_ok = false;
                s.check(format!("{name} gamma={gamma}"), false, format!("peeled {} > n/gamma {}", out.peeled.len(), sig12(bound)));
            }
            above_ok &= out.peeled.iter().all(|st| st.degree > out.threshold);
        }
    }
    s.check("peel count <= n/gamma", bound_ok, format!("{runs} runs"));
    s.check("peeled degrees exceed threshold", above_ok, format!("{runs} runs"));
    Ok(s)
}
