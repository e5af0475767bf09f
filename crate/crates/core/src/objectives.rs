//! The three hierarchical-clustering objectives.
//!
//! All of them are sums over vertex pairs of `w_ij · f(|T_ij|)`, where
//! `|T_ij|` is the leaf count of the lowest common ancestor of `i` and `j`:
//!
//! * Dasgupta cost, `f(s) = s`, minimized over similarity weights;
//! * similarity reward, `f(s) = n - s`, maximized;
//! * dissimilarity reward, `f(s) = s`, maximized over dissimilarity weights.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dendrogram::Dendrogram;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Dasgupta,
    Similarity,
    Dissimilarity,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::Dasgupta, Objective::Similarity, Objective::Dissimilarity];

    pub fn is_maximized(self) -> bool {
        !matches!(self, Objective::Dasgupta)
    }

    /// Per-pair multiplier for an LCA of `size` leaves in a tree on `n` leaves.
    #[inline]
    pub fn coefficient(self, size: usize, n: usize) -> f64 {
        match self {
            Objective::Dasgupta | Objective::Dissimilarity => size as f64,
            Objective::Similarity => (n - size) as f64,
        }
    }

    /// `true` when `candidate` is strictly better than `incumbent`.
    #[inline]
    pub fn improves(self, candidate: f64, incumbent: f64) -> bool {
        if self.is_maximized() {
            candidate > incumbent
        } else {
            candidate < incumbent
        }
    }

    pub fn evaluate(self, g: &WeightedGraph, t: &Dendrogram) -> Result<f64> {
        check_sizes(g, t)?;
        let n = g.n();
        let lca = t.lca_sizes();
        let mut total = 0.0;
        for (i, j, w) in g.edges() {
            total += w * self.coefficient(lca.get(i, j), n);
        }
        Ok(total)
    }

    pub fn name(self) -> &'static str {
        match self {
            Objective::Dasgupta => "dasgupta",
            Objective::Similarity => "sim",
            Objective::Dissimilarity => "dissim",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dasgupta" => Ok(Objective::Dasgupta),
            "sim" | "similarity" => Ok(Objective::Similarity),
            "dissim" | "dissimilarity" => Ok(Objective::Dissimilarity),
            other => Err(Error::InvalidParameter(format!("unknown objective `{other}`"))),
        }
    }
}

fn check_sizes(g: &WeightedGraph, t: &Dendrogram) -> Result<()> {
    if g.n() != t.n() {
        return Err(Error::SizeMismatch { graph: g.n(), tree: t.n() });
    }
    Ok(())
}

/// `Σ w_ij |T_ij|`.
pub fn dasgupta_cost(g: &WeightedGraph, t: &Dendrogram) -> Result<f64> {
    Objective::Dasgupta.evaluate(g, t)
}

/// `Σ w_ij (n - |T_ij|)`.
pub fn similarity_reward(g: &WeightedGraph, t: &Dendrogram) -> Result<f64> {
    Objective::Similarity.evaluate(g, t)
}

/// `Σ w_ij |T_ij|`.
pub fn dissimilarity_reward(g: &WeightedGraph, t: &Dendrogram) -> Result<f64> {
    Objective::Dissimilarity.evaluate(g, t)
}

/// Similarity reward written as a triplet sum: `Σ_(i,j) Σ_(k≠i,j) w_ij · [k ∉ leaves(T_ij)]`.
///
/// Computed from explicit leaf sets, independently of [`Dendrogram::lca_sizes`].
pub fn triplet_nonleaf_decomposition(g: &WeightedGraph, t: &Dendrogram) -> Result<f64> {
    check_sizes(g, t)?;
    let n = g.n();
    let mut member = vec![false; n];
    let mut total = 0.0;
    t.for_each_split(|_, left, right| {
        member.iter_mut().for_each(|m| *m = false);
        for &v in left.iter().chain(right) {
            member[v] = true;
        }
        for &i in left {
            for &j in right {
                let w = g.weight(i, j);
                if w == 0.0 {
                    continue;
                }
                for (k, &inside) in member.iter().enumerate() {
                    if k != i && k != j && !inside {
                        total += w;
                    }
                }
            }
        }
    });
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dendrogram::Node;
    use crate::graph::{clique, tight_dissimilarity_instance, tight_dissimilarity_sides};

    fn caterpillar3() -> Dendrogram {
        Dendrogram::new(Node::join(Node::join(Node::leaf(0), Node::leaf(1)), Node::leaf(2))).unwrap()
    }

    #[test]
    fn unit_triangle_values() {
        let g = clique(3, 1.0).unwrap();
        let t = caterpillar3();
        assert_eq!(dasgupta_cost(&g, &t).unwrap(), 8.0);
        assert_eq!(similarity_reward(&g, &t).unwrap(), 1.0);
        assert_eq!(dissimilarity_reward(&g, &t).unwrap(), 8.0);
        assert_eq!(triplet_nonleaf_decomposition(&g, &t).unwrap(), 1.0);
    }

    #[test]
    fn empty_and_tiny_graphs() {
        let g = WeightedGraph::empty(3).unwrap();
        let t = caterpillar3();
        for obj in Objective::ALL {
            assert_eq!(obj.evaluate(&g, &t).unwrap(), 0.0);
        }
        let edge = clique(2, 1.0).unwrap();
        let t2 = Dendrogram::caterpillar(2).unwrap();
        assert_eq!(similarity_reward(&edge, &t2).unwrap(), 0.0);
        assert_eq!(triplet_nonleaf_decomposition(&edge, &t2).unwrap(), 0.0);
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let g = clique(4, 1.0).unwrap();
        let err = dasgupta_cost(&g, &caterpillar3()).unwrap_err();
        assert!(matches!(err, Error::SizeMismatch { graph: 4, tree: 3 }));
    }

    #[test]
    fn top_bipartition_cut_collects_everything() {
        let m = 5;
        let g = tight_dissimilarity_instance(m).unwrap();
        let (l, r) = tight_dissimilarity_sides(m);
        let t = Dendrogram::new(Node::join(
            Node::caterpillar(&l).unwrap(),
            Node::caterpillar(&r).unwrap(),
        ))
        .unwrap();
        let nw = g.n() as f64 * g.total_weight();
        assert_eq!(dissimilarity_reward(&g, &t).unwrap(), nw);
    }

    #[test]
    fn objective_names_parse() {
        for obj in Objective::ALL {
            assert_eq!(obj.name().parse::<Objective>().unwrap(), obj);
        }
        assert!("ward".parse::<Objective>().is_err());
    }
}
