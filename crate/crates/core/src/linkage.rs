//! Average-linkage agglomerative clustering.
//!
//! Clusters live in slots `0..n`; merging slots `a < b` stores the union in
//! slot `a`. Inter-cluster weight sums are kept explicitly (sums add, sizes
//! add), and the average of a pair is `sum / (|A|·|B|)`.

use std::fmt::Write as _;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dendrogram::{Dendrogram, Node};
use crate::error::Result;
use crate::graph::{
    tight_dissimilarity_instance, tight_dissimilarity_sides, tight_similarity_instance,
    tight_similarity_vertical_cliques, WeightedGraph,
};
use crate::objectives::Objective;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkageMode {
    /// Merge the pair with the largest average weight.
    Similarity,
    /// Merge the pair with the smallest average weight.
    Dissimilarity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    /// First pair in `(lower slot, higher slot)` order.
    Lexicographic,
    /// Decide on weights perturbed by tiny seeded noise; reported averages
    /// still use the original weights.
    Perturb { seed: u64 },
}

/// Averages closer than this (relative) are treated as ties.
const TIE_TOLERANCE: f64 = 1e-12;

/// Scale of the decision noise in [`TieBreak::Perturb`], relative to the largest weight.
const PERTURBATION: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub size_a: usize,
    pub size_b: usize,
    pub average: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MergeTrace {
    pub merges: Vec<Merge>,
}

impl MergeTrace {
    /// CSV rows `step,size_a,size_b,average` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,size_a,size_b,average\n");
        for (step, m) in self.merges.iter().enumerate() {
            writeln!(out, "{},{},{},{}", step, m.size_a, m.size_b, crate::harness::sig12(m.average)).unwrap();
        }
        out
    }

    /// Replays the trace and returns the vertex sets joined at each step.
    pub fn merged_members(&self, n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
        let mut slots: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
        let mut out = Vec::with_capacity(self.merges.len());
        for m in &self.merges {
            let b = std::mem::take(&mut slots[m.b]);
            out.push((slots[m.a].clone(), b.clone()));
            slots[m.a].extend(b);
        }
        out
    }
}

pub fn average_linkage(
    g: &WeightedGraph,
    mode: LinkageMode,
    tie_break: TieBreak,
) -> (Dendrogram, MergeTrace) {
    let n = g.n();
    let mut sums: Vec<f64> = (0..n).flat_map(|i| g.row(i).iter().copied()).collect();
    let mut decide = match tie_break {
        TieBreak::Lexicographic => None,
        TieBreak::Perturb { seed } => {
            let scale = PERTURBATION * g.edges().map(|e| e.2).fold(1.0, f64::max);
            let mut rng = RngStream::new(seed).child("linkage-perturb").rng();
            let mut noisy = sums.clone();
            for i in 0..n {
                for j in i + 1..n {
                    let eta = scale * rng.random::<f64>();
                    noisy[i * n + j] += eta;
                    noisy[j * n + i] += eta;
                }
            }
            Some(noisy)
        }
    };
    let mut sizes = vec![1usize; n];
    let mut alive = vec![true; n];
    let mut nodes: Vec<Option<Node>> = (0..n).map(|v| Some(Node::leaf(v))).collect();
    let mut trace = MergeTrace { merges: Vec::with_capacity(n.saturating_sub(1)) };

    for _ in 1..n {
        let keys = decide.as_deref().unwrap_or(&sums);
        let mut best: Option<(usize, usize, f64)> = None;
        for a in (0..n).filter(|&a| alive[a]) {
            for b in (a + 1..n).filter(|&b| alive[b]) {
                let avg = keys[a * n + b] / (sizes[a] * sizes[b]) as f64;
                let better = match best {
                    None => true,
                    Some((_, _, cur)) => {
                        let margin = TIE_TOLERANCE * avg.abs().max(cur.abs());
                        match mode {
                            LinkageMode::Similarity => avg > cur + margin,
                            LinkageMode::Dissimilarity => avg < cur - margin,
                        }
                    }
                };
                if better {
                    best = Some((a, b, avg));
                }
            }
        }
        let (a, b, _) = best.expect("at least two live clusters");
        trace.merges.push(Merge {
            a,
            b,
            size_a: sizes[a],
            size_b: sizes[b],
            average: sums[a * n + b] / (sizes[a] * sizes[b]) as f64,
        });

        for m in [Some(&mut sums), decide.as_mut()].into_iter().flatten() {
            for c in 0..n {
                if alive[c] && c != a && c != b {
                    let s = m[a * n + c] + m[b * n + c];
                    m[a * n + c] = s;
                    m[c * n + a] = s;
                }
            }
        }
        sizes[a] += sizes[b];
        alive[b] = false;
        let right = nodes[b].take().expect("live slot holds a node");
        let left = nodes[a].take().expect("live slot holds a node");
        nodes[a] = Some(Node::join(left, right));
    }

    let root = nodes.into_iter().flatten().next().expect("one cluster remains");
    (Dendrogram::new(root).expect("linkage builds a valid tree"), trace)
}

/// Which worst-case family a [`RatioReport`] was computed on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TightFamily {
    /// `k` vertical cliques of `k²` vertices, horizontal weight `1 + eps`.
    Similarity { k: usize, eps: f64 },
    /// Bipartite graph `K_{m,m}` minus a perfect matching.
    Dissimilarity { m: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub n: usize,
    pub total_weight: f64,
    pub alg_value: f64,
    pub reference_value: f64,
    pub ratio: f64,
}

/// Tree merging each vertical clique first (as a caterpillar), then joining
/// the cliques; its similarity reward lower-bounds the optimum.
pub fn vertical_first_tree(k: usize) -> Dendrogram {
    let parts = tight_similarity_vertical_cliques(k)
        .iter()
        .map(|c| Node::caterpillar(c).expect("cliques are nonempty"))
        .collect();
    Dendrogram::new(Node::join_all(parts).expect("k >= 1")).expect("cliques partition the vertices")
}

/// Tree whose top split is the `(L, R)` bipartition of the tight dissimilarity instance.
pub fn top_bipartition_tree(m: usize) -> Dendrogram {
    let (l, r) = tight_dissimilarity_sides(m);
    Dendrogram::new(Node::join(
        Node::caterpillar(&l).expect("m >= 1"),
        Node::caterpillar(&r).expect("m >= 1"),
    ))
    .expect("sides partition the vertices")
}

/// Average-linkage value on a tight instance against the reference lower
/// bound on the optimum.
pub fn linkage_ratio_report(family: TightFamily) -> Result<RatioReport> {
    let (g, mode, objective, reference) = match family {
        TightFamily::Similarity { k, eps } => (
            tight_similarity_instance(k, eps)?,
            LinkageMode::Similarity,
            Objective::Similarity,
            vertical_first_tree(k),
        ),
        TightFamily::Dissimilarity { m } => (
            tight_dissimilarity_instance(m)?,
            LinkageMode::Dissimilarity,
            Objective::Dissimilarity,
            top_bipartition_tree(m),
        ),
    };
    let (tree, _) = average_linkage(&g, mode, TieBreak::Lexicographic);
    let alg_value = objective.evaluate(&g, &tree)?;
    let reference_value = objective.evaluate(&g, &reference)?;
    Ok(RatioReport {
        n: g.n(),
        total_weight: g.total_weight(),
        alg_value,
        reference_value,
        ratio: alg_value / reference_value,
    })
}

/// Closed form `(m+1)m(m-1)/3 · 4` for average linkage on the tight
/// dissimilarity instance.
pub fn tight_dissimilarity_linkage_value(m: usize) -> f64 {
    let m = m as f64;
    (m + 1.0) * m * (m - 1.0) / 3.0 * 4.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{clique, tight_similarity_vertex};
    use crate::objectives::{dissimilarity_reward, similarity_reward};

    #[test]
    fn single_vertex() {
        let g = WeightedGraph::empty(1).unwrap();
        let (t, trace) = average_linkage(&g, LinkageMode::Similarity, TieBreak::Lexicographic);
        assert_eq!(t.n(), 1);
        assert!(trace.merges.is_empty());
    }

    #[test]
    fn trace_has_n_minus_one_merges() {
        let g = clique(6, 1.0).unwrap();
        let (t, trace) = average_linkage(&g, LinkageMode::Similarity, TieBreak::Lexicographic);
        assert_eq!(trace.merges.len(), 5);
        assert_eq!(t.n(), 6);
        assert_eq!(trace.merges.last().map(|m| m.size_a + m.size_b), Some(6));
    }

    #[test]
    fn tight_dissimilarity_m10() {
        let g = tight_dissimilarity_instance(10).unwrap();
        let (t, trace) = average_linkage(&g, LinkageMode::Dissimilarity, TieBreak::Lexicographic);
        assert_eq!(dissimilarity_reward(&g, &t).unwrap(), 1320.0);
        assert_eq!(tight_dissimilarity_linkage_value(10), 1320.0);
        for (a, b) in trace.merged_members(g.n()).into_iter().take(10) {
            assert_eq!((a.len(), b.len()), (1, 1));
            assert_eq!(a[0] / 2, b[0] / 2, "first merges join matched pairs");
        }
        let r = linkage_ratio_report(TightFamily::Dissimilarity { m: 10 }).unwrap();
        assert_eq!((r.alg_value, r.reference_value), (1320.0, 1800.0));
    }

    #[test]
    fn tight_similarity_merges_horizontal_cliques_first() {
        let k = 3;
        let g = tight_similarity_instance(k, 0.1).unwrap();
        let (_, trace) = average_linkage(&g, LinkageMode::Similarity, TieBreak::Lexicographic);
        let position = |v: usize| v % (k * k);
        let first = trace.merged_members(g.n());
        assert!((trace.merges[0].average - 1.1).abs() < 1e-12);
        for (a, b) in first.iter().take(k * k * (k - 1)) {
            let p = position(a[0]);
            assert!(a.iter().chain(b).all(|&v| position(v) == p));
        }
        assert_eq!(tight_similarity_vertex(k, 1, 0), 9);
    }

    #[test]
    fn perturbed_tie_break_is_seeded() {
        let g = clique(7, 1.0).unwrap();
        let (a, _) = average_linkage(&g, LinkageMode::Similarity, TieBreak::Perturb { seed: 3 });
        let (b, _) = average_linkage(&g, LinkageMode::Similarity, TieBreak::Perturb { seed: 3 });
        assert_eq!(a, b);
        // on a clique every tree has the same reward
        let (c, _) = average_linkage(&g, LinkageMode::Similarity, TieBreak::Lexicographic);
        assert_eq!(similarity_reward(&g, &a).unwrap(), similarity_reward(&g, &c).unwrap());
    }

    #[test]
    fn trace_csv_has_header_and_rows() {
        let g = clique(3, 1.0).unwrap();
        let (_, trace) = average_linkage(&g, LinkageMode::Similarity, TieBreak::Lexicographic);
        let csv = trace.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "step,size_a,size_b,average");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("1,2,1,"));
    }
}
