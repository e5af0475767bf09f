//! "Random always": recursive uniformly random bipartition.
//!
//! Each vertex of the current cluster flips a fair coin; draws with an empty
//! side are rejected and redrawn, which makes the split uniform over proper
//! bipartitions. Recursion stops at singletons.

use rand::Rng as _;
use serde::Serialize;

use crate::dendrogram::{Dendrogram, Node};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::objectives::Objective;
use crate::par;
use crate::rng::{Rng, RngStream};

/// Splits `vertices` (at least two) into two nonempty sides.
pub fn random_bipartition(vertices: &[usize], rng: &mut Rng) -> (Vec<usize>, Vec<usize>) {
    debug_assert!(vertices.len() >= 2);
    loop {
        let (mut s, mut t) = (Vec::new(), Vec::new());
        for &v in vertices {
            if rng.random::<bool>() {
                s.push(v);
            } else {
                t.push(v);
            }
        }
        if !s.is_empty() && !t.is_empty() {
            return (s, t);
        }
    }
}

/// Random hierarchy over an arbitrary nonempty vertex set.
pub fn random_always(vertices: &[usize], rng: &mut Rng) -> Node {
    match vertices {
        [] => panic!("random_always needs a nonempty vertex set"),
        [v] => Node::leaf(*v),
        _ => {
            let (s, t) = random_bipartition(vertices, rng);
            let left = random_always(&s, rng);
            let right = random_always(&t, rng);
            Node::join(left, right)
        }
    }
}

/// Random hierarchy over `0..n` drawn from `stream`.
pub fn random_tree(n: usize, stream: RngStream) -> Result<Dendrogram> {
    if n == 0 {
        return Err(Error::InvalidParameter("random tree needs at least one vertex".into()));
    }
    let vertices: Vec<usize> = (0..n).collect();
    Dendrogram::new(random_always(&vertices, &mut stream.rng()))
}

/// `(n - 2)·W / 3`, the exact expected similarity reward of a random tree.
pub fn expected_similarity_reward_random(g: &WeightedGraph) -> Result<f64> {
    if g.n() < 2 {
        return Err(Error::InvalidParameter("need at least two vertices".into()));
    }
    Ok((g.n() - 2) as f64 * g.total_weight() / 3.0)
}

/// `(2/3)·n·W`, the value commonly quoted for the dissimilarity reward of a
/// random tree. It understates the exact expectation
/// ([`exact_expected_dissimilarity_reward_random`]) by `2W/3`.
pub fn expected_dissimilarity_reward_random(g: &WeightedGraph) -> Result<f64> {
    if g.n() < 3 {
        return Err(Error::InvalidParameter("need at least three vertices".into()));
    }
    Ok(2.0 / 3.0 * g.n() as f64 * g.total_weight())
}

/// `(2n + 2)·W / 3`.
///
/// A third vertex `k` lies under the LCA of `i, j` unless the first split
/// separating the triple isolates `k`, which happens with probability 1/3,
/// so `E|T_ij| = 2 + 2(n - 2)/3`.
pub fn exact_expected_dissimilarity_reward_random(g: &WeightedGraph) -> Result<f64> {
    if g.n() < 2 {
        return Err(Error::InvalidParameter("need at least two vertices".into()));
    }
    Ok((2 * g.n() + 2) as f64 * g.total_weight() / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Standard error of the mean; 0 for a single trial.
    pub stderr: f64,
    pub trials: u64,
}

impl McEstimate {
    /// Sample statistics, accumulated in slice order.
    pub fn from_samples(samples: &[f64]) -> Self {
        let k = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / k;
        let stderr = if samples.len() < 2 {
            0.0
        } else {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        };
        Self { mean, stderr, trials: samples.len() as u64 }
    }

    /// `|mean - target|` in units of the standard error (infinite when the
    /// error is zero and the values differ).
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }
}

/// Mean and standard error of `objective` over `trials` independent random
/// trees; trial `i` draws from `stream.trial(i)`.
pub fn monte_carlo_mean(
    g: &WeightedGraph,
    objective: Objective,
    trials: u64,
    stream: RngStream,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let n = g.n();
    let samples = par::map_indexed(trials as usize, |i| {
        let t = random_tree(n, stream.trial(i as u64)).expect("n >= 1");
        objective.evaluate(g, &t).expect("sizes agree")
    });
    Ok(McEstimate::from_samples(&samples))
}

/// Empirical `Pr[k ∉ leaves(T_ij)]` for every triple, as `[i][j][k]` (entries
/// with repeated indices are 0).
pub fn triplet_nonleaf_frequencies(n: usize, trials: u64, stream: RngStream) -> Result<Vec<f64>> {
    if n < 3 || trials == 0 {
        return Err(Error::InvalidParameter("need n >= 3 and at least one trial".into()));
    }
    let blocks = par::chunks(trials, 4096);
    let partial = par::map_slice(&blocks, |&(start, end)| {
        let mut counts = vec![0u64; n * n * n];
        for trial in start..end {
            let lca = random_tree(n, stream.trial(trial)).expect("n >= 3").lca_sizes();
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let sij = lca.get(i, j);
                    for k in 0..n {
                        // k sits outside T_ij exactly when its LCA with i is higher up
                        if k != i && k != j && lca.get(i, k) > sij {
                            counts[(i * n + j) * n + k] += 1;
                        }
                    }
                }
            }
        }
        counts
    });
    let mut total = vec![0u64; n * n * n];
    for c in partial {
        total.iter_mut().zip(c).for_each(|(t, x)| *t += x);
    }
    Ok(total.into_iter().map(|c| c as f64 / trials as f64).collect())
}
