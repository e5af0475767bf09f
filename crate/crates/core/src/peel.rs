//! "Peel-off first, max-cut next" for the dissimilarity objective.
//!
//! Vertices whose weighted degree in the remaining graph exceeds
//! `τ = 2Wγ/n` are split off one at a time along a caterpillar spine. The
//! remainder is cut by Goemans–Williamson hyperplane rounding, and each side
//! of that cut is finished by random bipartitions.

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::dendrogram::{Dendrogram, Node};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::objectives::dissimilarity_reward;
use crate::par;
use crate::random_hc::{random_always, random_bipartition, random_tree};
use crate::rng::RngStream;
use crate::sdp::{build_maxcut_sdp, dot, solve_low_rank, SdpSolution, SolverConfig};
use crate::sdp_round::BestOf;

pub const DEFAULT_GAMMA: f64 = 11.1;
pub const DEFAULT_GW_ROUNDS: usize = 100;
/// Largest graph [`brute_force_maxcut`] accepts.
pub const MAX_BRUTE_FORCE_MAXCUT_N: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeelConfig {
    pub gamma: f64,
    pub gw_rounds: usize,
}

impl Default for PeelConfig {
    fn default() -> Self {
        Self { gamma: DEFAULT_GAMMA, gw_rounds: DEFAULT_GW_ROUNDS }
    }
}

impl PeelConfig {
    /// `τ = 2Wγ/n` for `g`.
    pub fn threshold(&self, g: &WeightedGraph) -> f64 {
        2.0 * g.total_weight() * self.gamma / g.n() as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.gw_rounds == 0 {
            return Err(Error::InvalidParameter("gw_rounds must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeelStep {
    pub vertex: usize,
    /// Weighted degree in the remaining graph when the vertex was removed.
    pub degree: f64,
}

/// Peels vertices of degree above `tau` (degrees in the remaining graph),
/// highest degree first with ties to the smaller id. Returns the peel order
/// and the remaining vertices.
pub fn peel_vertices(g: &WeightedGraph, tau: f64) -> (Vec<PeelStep>, Vec<usize>) {
    let n = g.n();
    let mut alive = vec![true; n];
    let mut degree: Vec<f64> = (0..n).map(|v| g.degree(v)).collect();
    let mut steps = Vec::new();
    loop {
        let pick = (0..n)
            .filter(|&v| alive[v] && degree[v] > tau)
            .fold(None, |best: Option<usize>, v| match best {
                Some(b) if degree[b] >= degree[v] => Some(b),
                _ => Some(v),
            });
        let Some(v) = pick else { break };
        steps.push(PeelStep { vertex: v, degree: degree[v] });
        alive[v] = false;
        for u in 0..n {
            if alive[u] {
                degree[u] -= g.weight(u, v);
            }
        }
    }
    let rest = (0..n).filter(|&v| alive[v]).collect();
    (steps, rest)
}

/// Caterpillar spine: `peeled[0]` splits off at the root, then `peeled[1]`, …,
/// ending in `bottom`.
fn spine(peeled: &[usize], bottom: Option<Node>) -> Option<Node> {
    peeled.iter().rev().fold(bottom, |acc, &v| {
        Some(match acc {
            Some(node) => Node::join(Node::leaf(v), node),
            None => Node::leaf(v),
        })
    })
}

/// A cut with its weight. `side[v]` is true for `v ∈ S`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cut {
    pub side: Vec<bool>,
    pub value: f64,
}

impl Cut {
    pub fn sides(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.side.len()).partition(|&v| self.side[v])
    }

    fn is_proper(&self) -> bool {
        self.side.iter().any(|&s| s) && self.side.iter().any(|&s| !s)
    }
}

/// Result of hyperplane rounding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GwCut {
    pub cut: Cut,
    pub sdp_value: f64,
    /// Winning round, or `None` when no round gave a proper cut and a random
    /// bipartition was used instead.
    pub round: Option<usize>,
}

/// Rounds a solved max-cut relaxation with `rounds` hyperplanes and keeps
/// the heaviest proper cut (the earliest round on ties).
pub fn round_maxcut(g: &WeightedGraph, sol: &SdpSolution, rounds: usize, stream: RngStream) -> Result<GwCut> {
    if rounds == 0 {
        return Err(Error::InvalidParameter("rounds must be at least 1".into()));
    }
    let n = g.n();
    let vecs = sol.level(1);
    let dim = sol.vectors.dim;
    let cuts = par::map_indexed(rounds, |r| {
        let mut rng = stream.trial(r as u64).rng();
        let v0: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let side: Vec<bool> = (0..n).map(|i| dot(vecs[i], &v0) >= 0.0).collect();
        let value = g.cut_weight(&side);
        Cut { side, value }
    });
    let mut best: Option<(usize, Cut)> = None;
    for (r, cut) in cuts.into_iter().enumerate() {
        if cut.is_proper() && best.as_ref().is_none_or(|(_, b)| cut.value > b.value) {
            best = Some((r, cut));
        }
    }
    Ok(match best {
        Some((r, cut)) => GwCut { cut, sdp_value: sol.objective, round: Some(r) },
        None => {
            let vertices: Vec<usize> = (0..n).collect();
            let (s, _) = random_bipartition(&vertices, &mut stream.child("fallback").rng());
            let mut side = vec![false; n];
            s.into_iter().for_each(|v| side[v] = true);
            let value = g.cut_weight(&side);
            GwCut { cut: Cut { side, value }, sdp_value: sol.objective, round: None }
        }
    })
}

/// Goemans–Williamson: solve the max-cut relaxation, then [`round_maxcut`].
pub fn gw_maxcut(g: &WeightedGraph, rounds: usize, stream: RngStream, solver: &SolverConfig) -> Result<GwCut> {
    if g.n() < 2 {
        return Err(Error::InvalidParameter("max-cut needs n >= 2".into()));
    }
    let sol = solve_low_rank(&build_maxcut_sdp(g)?, solver)?;
    round_maxcut(g, &sol, rounds, stream)
}

/// Exact max cut by enumerating every cut with the last vertex on the
/// `false` side (Gray-code order, the first maximum wins).
pub fn brute_force_maxcut(g: &WeightedGraph) -> Result<Cut> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidParameter("max-cut needs n >= 2".into()));
    }
    if n > MAX_BRUTE_FORCE_MAXCUT_N {
        return Err(Error::TooLarge { n, max: MAX_BRUTE_FORCE_MAXCUT_N });
    }
    let mut side = vec![false; n];
    let mut value = 0.0;
    let mut best = Cut { side: side.clone(), value: f64::NEG_INFINITY };
    for step in 1u64..(1u64 << (n - 1)) {
        let v = step.trailing_zeros() as usize;
        // moving v across changes the cut by (same-side weight) - (cross weight)
        let mut delta = 0.0;
        for u in 0..n {
            if u != v {
                let w = g.weight(u, v);
                delta += if side[u] == side[v] { w } else { -w };
            }
        }
        side[v] = !side[v];
        value += delta;
        if value > best.value {
            best = Cut { side: side.clone(), value };
        }
    }
    // recompute exactly to drop accumulated rounding
    best.value = g.cut_weight(&best.side);
    Ok(best)
}

/// One run of peel-then-max-cut.
#[derive(Debug, Clone, PartialEq)]
pub struct PeelOutcome {
    pub tree: Dendrogram,
    pub threshold: f64,
    pub peeled: Vec<PeelStep>,
    /// Cut of the remainder (original vertex ids), absent when at most one
    /// vertex remained.
    pub cut: Option<(Vec<usize>, Vec<usize>)>,
}

/// The deterministic part of peel-then-max-cut: peeling and the remainder's
/// relaxation. [`PeelPlan::run`] draws the random part.
#[derive(Debug, Clone)]
pub struct PeelPlan {
    n: usize,
    cfg: PeelConfig,
    threshold: f64,
    peeled: Vec<PeelStep>,
    rest: Vec<usize>,
    rest_graph: Option<WeightedGraph>,
    sdp: Option<SdpSolution>,
}

impl PeelPlan {
    pub fn new(g: &WeightedGraph, cfg: PeelConfig, solver: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        if g.n() < 2 {
            return Err(Error::InvalidParameter("need n >= 2".into()));
        }
        let threshold = cfg.threshold(g);
        let (peeled, rest) = peel_vertices(g, threshold);
        let (rest_graph, sdp) = if rest.len() >= 2 {
            let sub = g.induced(&rest);
            let sol = solve_low_rank(&build_maxcut_sdp(&sub)?, solver)?;
            (Some(sub), Some(sol))
        } else {
            (None, None)
        };
        Ok(Self { n: g.n(), cfg, threshold, peeled, rest, rest_graph, sdp })
    }

    pub fn peeled(&self) -> &[PeelStep] {
        &self.peeled
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn run(&self, stream: RngStream) -> Result<PeelOutcome> {
        let order: Vec<usize> = self.peeled.iter().map(|s| s.vertex).collect();
        let (bottom, cut) = match (&self.rest_graph, &self.sdp) {
            (Some(sub), Some(sol)) => {
                let gw = round_maxcut(sub, sol, self.cfg.gw_rounds, stream.child("gw"))?;
                let (s, t) = gw.cut.sides();
                let s: Vec<usize> = s.into_iter().map(|i| self.rest[i]).collect();
                let t: Vec<usize> = t.into_iter().map(|i| self.rest[i]).collect();
                let mut rng = stream.child("random-next").rng();
                let node = Node::join(random_always(&s, &mut rng), random_always(&t, &mut rng));
                (Some(node), Some((s, t)))
            }
            _ => (self.rest.first().map(|&v| Node::leaf(v)), None),
        };
        let root = spine(&order, bottom).expect("n >= 2");
        let tree = Dendrogram::new(root)?;
        debug_assert_eq!(tree.n(), self.n);
        Ok(PeelOutcome { tree, threshold: self.threshold, peeled: self.peeled.clone(), cut })
    }
}

/// Peel-then-max-cut once.
pub fn peel_off_first_maxcut_next(
    g: &WeightedGraph,
    cfg: PeelConfig,
    stream: RngStream,
    solver: &SolverConfig,
) -> Result<PeelOutcome> {
    PeelPlan::new(g, cfg, solver)?.run(stream)
}

/// Recursive Goemans–Williamson cuts down to singletons. The subproblem met
/// `k`-th in depth-first order rounds with `stream.trial(k)`.
pub fn recursive_maxcut_baseline(
    g: &WeightedGraph,
    rounds: usize,
    stream: RngStream,
    solver: &SolverConfig,
) -> Result<Dendrogram> {
    if g.n() < 2 {
        return Err(Error::InvalidParameter("need n >= 2".into()));
    }
    fn build(
        g: &WeightedGraph,
        vertices: &[usize],
        rounds: usize,
        stream: RngStream,
        solver: &SolverConfig,
        counter: &mut u64,
    ) -> Result<Node> {
        match vertices {
            [v] => return Ok(Node::leaf(*v)),
            [a, b] => return Ok(Node::join(Node::leaf(*a), Node::leaf(*b))),
            _ => {}
        }
        let sub = g.induced(vertices);
        let s = stream.trial(*counter);
        *counter += 1;
        let gw = gw_maxcut(&sub, rounds, s, solver)?;
        let (left, right) = gw.cut.sides();
        let left: Vec<usize> = left.into_iter().map(|i| vertices[i]).collect();
        let right: Vec<usize> = right.into_iter().map(|i| vertices[i]).collect();
        let l = build(g, &left, rounds, stream, solver, counter)?;
        let r = build(g, &right, rounds, stream, solver, counter)?;
        Ok(Node::join(l, r))
    }
    let vertices: Vec<usize> = (0..g.n()).collect();
    Dendrogram::new(build(g, &vertices, rounds, stream, solver, &mut 0)?)
}

/// Caterpillar that peels vertices one at a time, always taking the highest
/// remaining degree (ties to the smaller id).
pub fn peel_one_by_one_tree(g: &WeightedGraph) -> Result<Dendrogram> {
    let (steps, rest) = peel_vertices(g, f64::NEG_INFINITY);
    debug_assert!(rest.is_empty());
    let order: Vec<usize> = steps.into_iter().map(|s| s.vertex).collect();
    Dendrogram::new(Node::caterpillar(&order).expect("n >= 1"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DissimilarityAlgorithm {
    RandomAlways,
    PeelMaxcut,
}

/// Best dissimilarity reward over `runs` random trees and `runs` runs of
/// peel-then-max-cut (which share one peel and one relaxation solve).
pub fn best_of_dissimilarity(
    g: &WeightedGraph,
    runs: usize,
    stream: RngStream,
    cfg: PeelConfig,
    solver: &SolverConfig,
) -> Result<BestOf<DissimilarityAlgorithm>> {
    let plan = PeelPlan::new(g, cfg, solver)?;
    best_of_dissimilarity_with(g, &plan, runs, stream)
}

pub fn best_of_dissimilarity_with(
    g: &WeightedGraph,
    plan: &PeelPlan,
    runs: usize,
    stream: RngStream,
) -> Result<BestOf<DissimilarityAlgorithm>> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    let mut best: Option<BestOf<DissimilarityAlgorithm>> = None;
    let mut offer = |tree: Dendrogram, algorithm, run| -> Result<()> {
        let value = dissimilarity_reward(g, &tree)?;
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(BestOf { tree, value, algorithm, run });
        }
        Ok(())
    };
    for run in 0..runs {
        let tree = random_tree(g.n(), stream.child("random-always").trial(run as u64))?;
        offer(tree, DissimilarityAlgorithm::RandomAlways, run)?;
    }
    for run in 0..runs {
        let out = plan.run(stream.child("peel-maxcut").trial(run as u64))?;
        offer(out.tree, DissimilarityAlgorithm::PeelMaxcut, run)?;
    }
    Ok(best.expect("runs >= 1"))
}

/// `min_θ (θ/π) / ((1 - cos θ)/2)`, the hyperplane rounding ratio.
pub fn rho_gw() -> f64 {
    let f = |t: f64| (t / PI) / ((1.0 - t.cos()) / 2.0);
    let (mut lo, mut hi) = (1.0f64, PI);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-13 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) <= f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    f(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaDissimilarity {
    pub gamma: f64,
    pub eps: f64,
    pub delta: f64,
    /// `2/(3(1 - ε))`.
    pub random_side: f64,
    /// `ρ(1 - 1/γ)(1 - (ε/δ)/(1 - ε) - δγ/(1 - ε))`.
    pub cut_side: f64,
    pub alpha: f64,
}

/// Both sides of the balancing with `δ = √(ε/γ)`; the guarantee is their minimum.
pub fn alpha_dissimilarity(gamma: f64, eps: f64) -> Result<AlphaDissimilarity> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps {eps} outside (0, 1)")));
    }
    let delta = (eps / gamma).sqrt();
    let random_side = 2.0 / (3.0 * (1.0 - eps));
    let cut_side = rho_gw() * (1.0 - 1.0 / gamma) * (1.0 - (eps / delta) / (1.0 - eps) - delta * gamma / (1.0 - eps));
    Ok(AlphaDissimilarity { gamma, eps, delta, random_side, cut_side, alpha: random_side.min(cut_side) })
}

/// The `ε` that balances both sides for a given `γ`: the positive root `√ε` of
/// `s² + 2√γ·s + (2/(3ρ))·γ/(γ - 1) - 1 = 0`.
pub fn balanced_eps(gamma: f64) -> Result<f64> {
    if gamma <= 1.0 {
        return Err(Error::NoRoot(format!("gamma {gamma} <= 1 leaves no peel margin")));
    }
    let c = 2.0 / (3.0 * rho_gw()) * gamma / (gamma - 1.0) - 1.0;
    let disc = gamma - c;
    if disc < 0.0 {
        return Err(Error::NoRoot(format!("negative discriminant at gamma {gamma}")));
    }
    let s = -gamma.sqrt() + disc.sqrt();
    if s <= 0.0 {
        return Err(Error::NoRoot(format!("no positive root at gamma {gamma}")));
    }
    Ok(s * s)
}

/// Scans `γ ∈ (1, 100]` and refines the best point by golden-section search.
pub fn optimize_alpha_dissimilarity() -> AlphaDissimilarity {
    let value = |g: f64| {
        balanced_eps(g).and_then(|e| alpha_dissimilarity(g, e)).map(|a| a.alpha).unwrap_or(f64::NEG_INFINITY)
    };
    let grid: Vec<f64> = (1..=1000).map(|i| 1.0 + i as f64 * 0.099).collect();
    let best = grid.iter().copied().fold(grid[0], |b, x| if value(x) > value(b) { x } else { b });
    let (mut lo, mut hi) = (best - 0.099, best + 0.099);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-10 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if value(a) >= value(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let gamma = 0.5 * (lo + hi);
    alpha_dissimilarity(gamma, balanced_eps(gamma).expect("optimum is feasible")).expect("valid parameters")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{clique, cycle, embedded_clique_instance, tight_dissimilarity_instance};
    use approx::assert_abs_diff_eq;

    #[test]
    fn rho_value() {
        assert_abs_diff_eq!(rho_gw(), 0.8785672, epsilon = 1e-7);
    }

    #[test]
    fn alpha_at_quoted_point() {
        let a = alpha_dissimilarity(11.1, 0.000612).unwrap();
        assert_abs_diff_eq!(a.alpha, 0.667078, epsilon = 5e-5);
        assert_abs_diff_eq!(a.delta, 0.00743, epsilon = 1e-5);
        assert!(alpha_dissimilarity(1.0, 0.000612).unwrap().cut_side <= 0.0);
        assert!(alpha_dissimilarity(0.5, 0.000612).unwrap().alpha <= 0.0);
        let opt = optimize_alpha_dissimilarity();
        assert!((10.0..=12.0).contains(&opt.gamma), "{opt:?}");
        assert!((4e-4..=8e-4).contains(&opt.eps), "{opt:?}");
        assert!(opt.alpha > 2.0 / 3.0 + 4e-4);
        assert!(balanced_eps(1.01).is_err());
    }

    #[test]
    fn brute_maxcut_small() {
        assert_eq!(brute_force_maxcut(&cycle(5).unwrap()).unwrap().value, 4.0);
        assert_eq!(brute_force_maxcut(&clique(4, 1.0).unwrap()).unwrap().value, 4.0);
        assert_eq!(brute_force_maxcut(&tight_dissimilarity_instance(5).unwrap()).unwrap().value, 20.0);
    }

    #[test]
    fn gw_pentagon() {
        let c5 = cycle(5).unwrap();
        let cut = gw_maxcut(&c5, 200, RngStream::new(1), &SolverConfig::default()).unwrap();
        assert_eq!(cut.cut.value, 4.0);
        let edge = clique(2, 1.0).unwrap();
        assert_eq!(gw_maxcut(&edge, 1, RngStream::new(1), &SolverConfig::default()).unwrap().cut.value, 1.0);
    }

    #[test]
    fn clique_forty_peels_nothing() {
        let g = embedded_clique_instance(40, 0.2).unwrap();
        let cfg = PeelConfig::default();
        assert_abs_diff_eq!(cfg.threshold(&g), 15.54, epsilon = 1e-9);
        let (steps, rest) = peel_vertices(&g, cfg.threshold(&g));
        assert!(steps.is_empty());
        assert_eq!(rest.len(), 40);
    }

    #[test]
    fn tiny_gamma_peels_the_clique() {
        let g = clique(6, 1.0).unwrap();
        let cfg = PeelConfig { gamma: 0.01, gw_rounds: 4 };
        let out = peel_off_first_maxcut_next(&g, cfg, RngStream::new(0), &SolverConfig::default()).unwrap();
        let order: Vec<usize> = out.peeled.iter().map(|s| s.vertex).collect();
        assert_eq!(order, vec![0, 1, 2, 3, 4]);
        assert!(out.peeled.iter().all(|s| s.degree > out.threshold));
        assert_eq!(out.tree.canonical(), Dendrogram::caterpillar(6).unwrap().canonical());
    }

    #[test]
    fn large_gamma_is_plain_maxcut() {
        let g = tight_dissimilarity_instance(5).unwrap();
        let cfg = PeelConfig { gamma: 1e6, gw_rounds: 50 };
        let out = peel_off_first_maxcut_next(&g, cfg, RngStream::new(2), &SolverConfig::default()).unwrap();
        assert!(out.peeled.is_empty());
        let (s, _) = out.cut.unwrap();
        let mut s = s;
        s.sort_unstable();
        assert!(s == vec![0, 2, 4, 6, 8] || s == vec![1, 3, 5, 7, 9]);
        assert_eq!(dissimilarity_reward(&g, &out.tree).unwrap(), 200.0);
    }

    #[test]
    fn recursive_baseline_builds_tree() {
        let g = tight_dissimilarity_instance(4).unwrap();
        let t = recursive_maxcut_baseline(&g, 20, RngStream::new(3), &SolverConfig::default()).unwrap();
        assert_eq!(t.n(), 8);
        let a = recursive_maxcut_baseline(&g, 20, RngStream::new(3), &SolverConfig::default()).unwrap();
        assert_eq!(a, t);
    }

    #[test]
    fn one_by_one_reference_leads_with_clique() {
        let g = embedded_clique_instance(20, 0.2).unwrap();
        let t = peel_one_by_one_tree(&g).unwrap();
        let lca = t.lca_sizes();
        assert_eq!(lca.get(0, 1), 20);
        assert_eq!(lca.get(1, 2), 19);
    }
}
