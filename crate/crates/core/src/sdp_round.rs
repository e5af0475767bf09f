//! "SDP first, random next" and the numbers behind its analysis.
//!
//! The rounding step takes the level `⌊n/2⌋ - 1` vectors of the hierarchical
//! relaxation, cuts them with a uniformly random hyperplane and finishes each
//! side with random bipartitions.

use std::f64::consts::{FRAC_PI_2, PI};

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::dendrogram::{Dendrogram, Node};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::objectives::similarity_reward;
use crate::par;
use crate::random_hc::{random_always, random_bipartition, random_tree};
use crate::rng::RngStream;
use crate::sdp::{build_hc_sdp, dot, solve_low_rank, Layout, SdpSolution, SolverConfig};

/// Hyperplane draws before giving up on a proper cut.
pub const MAX_REDRAWS: usize = 100;

/// Pairwise angles of three unit vectors with nonnegative inner products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripletAngles {
    pub ij: f64,
    pub ik: f64,
    pub jk: f64,
}

impl TripletAngles {
    pub fn new(ij: f64, ik: f64, jk: f64) -> Result<Self> {
        for a in [ij, ik, jk] {
            if !(0.0..=FRAC_PI_2 + 1e-12).contains(&a) {
                return Err(Error::InvalidParameter(format!("angle {a} outside [0, pi/2]")));
            }
        }
        Ok(Self { ij, ik, jk })
    }

    pub fn from_vectors(vi: &[f64], vj: &[f64], vk: &[f64]) -> Result<Self> {
        Self::new(angle(vi, vj), angle(vi, vk), angle(vj, vk))
    }
}

/// Angle between two unit vectors.
pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).clamp(-1.0, 1.0).acos()
}

/// Outcome probabilities of one random hyperplane on a triple. `ij_k` is the
/// event that `k` lands alone on its side (so `i` and `j` stay together).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripletProbabilities {
    pub ij_k: f64,
    pub ik_j: f64,
    pub jk_i: f64,
    pub together: f64,
}

impl TripletProbabilities {
    pub fn as_array(&self) -> [f64; 4] {
        [self.ij_k, self.ik_j, self.jk_i, self.together]
    }

    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }
}

pub fn triplet_separation_probability(a: TripletAngles) -> Result<TripletProbabilities> {
    let tau = 2.0 * PI;
    let p = TripletProbabilities {
        ij_k: (a.ik + a.jk - a.ij) / tau,
        ik_j: (a.ij + a.jk - a.ik) / tau,
        jk_i: (a.ij + a.ik - a.jk) / tau,
        together: 1.0 - (a.ij + a.ik + a.jk) / tau,
    };
    if let Some(&bad) = p.as_array().iter().find(|&&x| x < -1e-12) {
        return Err(Error::InconsistentAngles(bad));
    }
    Ok(p)
}

/// Empirical frequencies of the four hyperplane events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripletFrequencies {
    pub probabilities: TripletProbabilities,
    pub trials: u64,
}

impl TripletFrequencies {
    /// Binomial standard error of an event with probability `p`.
    pub fn stderr(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Hyperplane trials are grouped in blocks of this size, one RNG stream each.
const TRIPLET_BLOCK: u64 = 1 << 16;

pub fn mc_verify_triplet(
    vi: &[f64],
    vj: &[f64],
    vk: &[f64],
    trials: u64,
    stream: RngStream,
) -> Result<TripletFrequencies> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let d = vi.len();
    if vj.len() != d || vk.len() != d {
        return Err(Error::InvalidParameter("vectors differ in dimension".into()));
    }
    let blocks = par::chunks(trials, TRIPLET_BLOCK);
    let counts = par::map_indexed(blocks.len(), |b| {
        let (start, end) = blocks[b];
        let mut rng = stream.trial(b as u64).rng();
        let mut v0 = vec![0.0; d];
        let mut c = [0u64; 4];
        for _ in start..end {
            v0.iter_mut().for_each(|x| *x = StandardNormal.sample(&mut rng));
            let (si, sj, sk) = (dot(vi, &v0) >= 0.0, dot(vj, &v0) >= 0.0, dot(vk, &v0) >= 0.0);
            let slot = match (si == sj, si == sk) {
                (true, true) => 3,
                (true, false) => 0,
                (false, true) => 1,
                (false, false) => 2,
            };
            c[slot] += 1;
        }
        c
    });
    let mut total = [0u64; 4];
    for c in counts {
        for (t, x) in total.iter_mut().zip(c) {
            *t += x;
        }
    }
    let f = |x: u64| x as f64 / trials as f64;
    Ok(TripletFrequencies {
        probabilities: TripletProbabilities {
            ij_k: f(total[0]),
            ik_j: f(total[1]),
            jk_i: f(total[2]),
            together: f(total[3]),
        },
        trials,
    })
}

/// Level whose vectors are rounded: `⌊n/2⌋ - 1`, raised to 1 for `n ≤ 3`
/// where that expression is not a valid level.
pub fn rounding_level(n: usize) -> usize {
    (n / 2).saturating_sub(1).max(1)
}

/// Record of one relaxation-then-random run.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpRounding {
    pub tree: Dendrogram,
    pub level: usize,
    /// Top split `(S, V \ S)`.
    pub cut: (Vec<usize>, Vec<usize>),
    /// Hyperplanes drawn (1 when the first was proper).
    pub draws: usize,
    /// Whether the run fell back to a random bipartition.
    pub fell_back: bool,
}

/// Rounds an already solved hierarchical relaxation.
pub fn round_hc_solution(sol: &SdpSolution, stream: RngStream) -> Result<SdpRounding> {
    let n = match sol.layout {
        Layout::Hierarchy { n } => n,
        Layout::MaxCut { .. } => {
            return Err(Error::InvalidParameter("expected a hierarchical solution".into()))
        }
    };
    let vertices: Vec<usize> = (0..n).collect();
    let level = rounding_level(n);
    let vecs = sol.level(level);
    let mut rng = stream.child("hyperplane").rng();
    let mut v0 = vec![0.0; sol.vectors.dim];
    let mut cut = None;
    let mut draws = 0;
    while draws < MAX_REDRAWS && cut.is_none() {
        draws += 1;
        v0.iter_mut().for_each(|x| *x = StandardNormal.sample(&mut rng));
        let (s, t): (Vec<usize>, Vec<usize>) = vertices.iter().partition(|&&i| dot(vecs[i], &v0) >= 0.0);
        if !s.is_empty() && !t.is_empty() {
            cut = Some((s, t));
        }
    }
    let fell_back = cut.is_none();
    let mut rng = stream.child("random-next").rng();
    let (s, t) = match cut {
        Some(c) => c,
        None => random_bipartition(&vertices, &mut rng),
    };
    let left = random_always(&s, &mut rng);
    let right = random_always(&t, &mut rng);
    Ok(SdpRounding { tree: Dendrogram::new(Node::join(left, right))?, level, cut: (s, t), draws, fell_back })
}

/// Solves the hierarchical relaxation of `g` and rounds it once.
pub fn sdp_first_random_next(g: &WeightedGraph, stream: RngStream, solver: &SolverConfig) -> Result<SdpRounding> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidParameter("need n >= 2".into()));
    }
    if n == 2 {
        let tree = Dendrogram::new(Node::join(Node::leaf(0), Node::leaf(1)))?;
        return Ok(SdpRounding { tree, level: 1, cut: (vec![0], vec![1]), draws: 0, fell_back: false });
    }
    let sol = solve_low_rank(&build_hc_sdp(g)?, solver)?;
    round_hc_solution(&sol, stream)
}

/// `(n - 2)(1/4 - θ̄/(2π))`.
pub fn factor_revealing_lower_bound(n: usize, theta_bar: f64) -> Result<f64> {
    check_theta_bar(theta_bar)?;
    Ok(n.saturating_sub(2) as f64 * (0.25 - theta_bar / (2.0 * PI)))
}

fn check_theta_bar(theta_bar: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta_bar) {
        return Err(Error::InvalidParameter(format!("theta_bar {theta_bar} outside [0, pi/2]")));
    }
    Ok(())
}

/// Smallest `θ ∈ [0, π/2]` with `cos θ ≤ budget`, by bisection.
fn smallest_angle_within(budget: f64) -> Option<f64> {
    if budget < 0.0 {
        return None;
    }
    if budget >= 1.0 {
        return Some(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, FRAC_PI_2);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid.cos() <= budget {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 {
            break;
        }
    }
    Some(hi)
}

/// Minimum of `Σ_k θ_k` over `m` angles in `[0, π/2]` with `Σ_k cos θ_k ≤ budget`,
/// searched over configurations with `a` zero angles, `b` right angles and at
/// most one angle in between.
fn min_angle_sum(m: usize, budget: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for a in 0..=m {
        for b in 0..=(m - a) {
            let rest = m - a - b;
            let value = match rest {
                0 if a as f64 <= budget + 1e-12 => b as f64 * FRAC_PI_2,
                1 => match smallest_angle_within(budget - a as f64) {
                    Some(theta) => b as f64 * FRAC_PI_2 + theta,
                    None => continue,
                },
                _ => continue,
            };
            if best.is_none_or(|v| value < v) {
                best = Some(value);
            }
        }
    }
    best
}

/// Numeric minimum of the factor-revealing program
/// `min (1/2π) Σ_(k≠i,j) (θ_ik + θ_jk - θ̄)` subject to
/// `Σ_(k≠i,j) cos θ_ik ≤ n/2 - 1`, the same for `j`, and angles in `[0, π/2]`.
pub fn factor_revealing_numeric(n: usize, theta_bar: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidParameter("the program needs n >= 3".into()));
    }
    check_theta_bar(theta_bar)?;
    let m = n - 2;
    let budget = n as f64 / 2.0 - 1.0;
    let side = min_angle_sum(m, budget)
        .ok_or(Error::NotConverged { iterations: 0, residual: f64::INFINITY })?;
    Ok((2.0 * side - m as f64 * theta_bar) / (2.0 * PI))
}

/// Balanced constants for a given `ε₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaSimilarity {
    pub eps2: f64,
    pub eps1: f64,
    pub alpha: f64,
}

/// Solves `(1 - 2ε₁/ε₂)(1/2 - 2·arccos(1 - ε₂)/(3π)) = 1/(3(1 - ε₁))` for
/// `ε₁ ∈ (0, ε₂/2)` and returns `α = 1/(3(1 - ε₁))`.
pub fn alpha_similarity(eps2: f64) -> Result<AlphaSimilarity> {
    if !(eps2 > 0.0 && eps2 < 1.0) {
        return Err(Error::InvalidParameter(format!("eps2 {eps2} outside (0, 1)")));
    }
    let c = 0.5 - 2.0 * (1.0 - eps2).acos() / (3.0 * PI);
    let f = |e1: f64| (1.0 - 2.0 * e1 / eps2) * c - 1.0 / (3.0 * (1.0 - e1));
    let (mut lo, mut hi) = (0.0, eps2 / 2.0);
    if f(lo) <= 0.0 {
        return Err(Error::NoRoot(format!("no balancing eps1 for eps2 = {eps2}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let eps1 = 0.5 * (lo + hi);
    Ok(AlphaSimilarity { eps2, eps1, alpha: 1.0 / (3.0 * (1.0 - eps1)) })
}

/// Grid scan of `ε₂` followed by golden-section refinement.
pub fn optimize_alpha_similarity() -> AlphaSimilarity {
    let value = |e: f64| alpha_similarity(e).map(|a| a.alpha).unwrap_or(f64::NEG_INFINITY);
    let grid: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
    let best = grid.iter().copied().fold(grid[0], |b, e| if value(e) > value(b) { e } else { b });
    let (mut lo, mut hi) = ((best - 1e-3).max(1e-9), (best + 1e-3).min(1.0 - 1e-9));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-12 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if value(a) >= value(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    alpha_similarity(0.5 * (lo + hi)).expect("optimum lies inside the feasible range")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityAlgorithm {
    RandomAlways,
    SdpRandom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestOf<A> {
    pub tree: Dendrogram,
    pub value: f64,
    pub algorithm: A,
    pub run: usize,
}

/// Best similarity reward over `runs` random trees and `runs` roundings of
/// one solve of the relaxation.
pub fn best_of_similarity(
    g: &WeightedGraph,
    runs: usize,
    stream: RngStream,
    solver: &SolverConfig,
) -> Result<BestOf<SimilarityAlgorithm>> {
    let sol = if g.n() > 2 { Some(solve_low_rank(&build_hc_sdp(g)?, solver)?) } else { None };
    best_of_similarity_with(g, sol.as_ref(), runs, stream)
}

/// As [`best_of_similarity`] with a precomputed relaxation (`None` for `n = 2`).
pub fn best_of_similarity_with(
    g: &WeightedGraph,
    sol: Option<&SdpSolution>,
    runs: usize,
    stream: RngStream,
) -> Result<BestOf<SimilarityAlgorithm>> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    let n = g.n();
    let mut best: Option<BestOf<SimilarityAlgorithm>> = None;
    let mut offer = |tree: Dendrogram, algorithm, run| -> Result<()> {
        let value = similarity_reward(g, &tree)?;
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(BestOf { tree, value, algorithm, run });
        }
        Ok(())
    };
    for run in 0..runs {
        let tree = random_tree(n, stream.child("random-always").trial(run as u64))?;
        offer(tree, SimilarityAlgorithm::RandomAlways, run)?;
    }
    for run in 0..runs {
        let s = stream.child("sdp-random").trial(run as u64);
        let tree = match sol {
            Some(sol) => round_hc_solution(sol, s)?.tree,
            None => random_tree(n, s)?,
        };
        offer(tree, SimilarityAlgorithm::SdpRandom, run)?;
    }
    Ok(best.expect("runs >= 1"))
}
