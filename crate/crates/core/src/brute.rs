//! Exhaustive enumeration of leaf-labeled binary trees.
//!
//! Trees on `n` leaves are generated by inserting leaf `k` above every node
//! of each tree on leaves `0..k`, visiting existing nodes in id order. The
//! order is deterministic, so the witness returned by [`brute_force_opt`] is
//! reproducible: ties go to the first tree in enumeration order.

use crate::dendrogram::{Dendrogram, Node};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::objectives::Objective;
use crate::par;

/// Largest `n` accepted by the exhaustive oracle (`17!! ≈ 3.4·10⁷` trees).
pub const MAX_BRUTE_FORCE_N: usize = 10;

/// Number of prefix leaves enumerated serially before work is split into tasks.
const SPLIT_LEAVES: usize = 7;

/// `(2n - 3)!!`, the number of rooted binary trees with `n` labeled leaves.
pub fn tree_count(n: usize) -> u64 {
    (2..n).map(|k| (2 * k - 1) as u64).product()
}

const NONE: usize = usize::MAX;

/// Array-backed tree used during enumeration. Leaves are ids `0..n`,
/// internal nodes `n..2n-1`.
#[derive(Clone)]
struct Arena {
    n: usize,
    parent: Vec<usize>,
    children: Vec<[usize; 2]>,
    root: usize,
    leaves: usize,
}

impl Arena {
    fn new(n: usize) -> Self {
        let mut a = Arena {
            n,
            parent: vec![NONE; 2 * n - 1],
            children: vec![[NONE; 2]; 2 * n - 1],
            root: 0,
            leaves: 1,
        };
        if n >= 2 {
            let p = n;
            a.children[p] = [0, 1];
            a.parent[0] = p;
            a.parent[1] = p;
            a.root = p;
            a.leaves = 2;
        }
        a
    }

    /// Existing node ids in enumeration order.
    fn slots(&self) -> impl Iterator<Item = usize> {
        let (n, k) = (self.n, self.leaves);
        (0..k).chain(n..n + k - 1)
    }

    /// Inserts the next leaf above `x`.
    fn insert(&mut self, x: usize) {
        let k = self.leaves;
        let p = self.n + k - 1;
        let up = self.parent[x];
        if up == NONE {
            self.root = p;
        } else {
            let c = &mut self.children[up];
            if c[0] == x {
                c[0] = p;
            } else {
                c[1] = p;
            }
        }
        self.parent[p] = up;
        self.children[p] = [x, k];
        self.parent[x] = p;
        self.parent[k] = p;
        self.leaves += 1;
    }

    fn undo(&mut self) {
        self.leaves -= 1;
        let k = self.leaves;
        let p = self.n + k - 1;
        let x = self.children[p][0];
        let up = self.parent[p];
        if up == NONE {
            self.root = x;
        } else {
            let c = &mut self.children[up];
            if c[0] == p {
                c[0] = x;
            } else {
                c[1] = x;
            }
        }
        self.parent[x] = up;
        self.parent[p] = NONE;
        self.parent[k] = NONE;
        self.children[p] = [NONE; 2];
    }

    fn to_node(&self, id: usize) -> Node {
        if id < self.n {
            Node::leaf(id)
        } else {
            let [a, b] = self.children[id];
            Node::join(self.to_node(a), self.to_node(b))
        }
    }

    fn to_dendrogram(&self) -> Dendrogram {
        Dendrogram::new(self.to_node(self.root)).expect("enumerated trees are valid")
    }
}

/// Objective evaluation through subset tables: the cut weight between the
/// children of a node is `inner(A ∪ B) - inner(A) - inner(B)`.
struct MaskEvaluator {
    n: usize,
    objective: Objective,
    inner: Vec<f64>,
}

impl MaskEvaluator {
    fn new(g: &WeightedGraph, objective: Objective) -> Self {
        let n = g.n();
        let mut inner = vec![0.0; 1 << n];
        for mask in 1usize..(1 << n) {
            let top = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
            let rest = mask & !(1 << top);
            let mut add = 0.0;
            let mut r = rest;
            while r != 0 {
                let j = r.trailing_zeros() as usize;
                add += g.weight(top, j);
                r &= r - 1;
            }
            inner[mask] = inner[rest] + add;
        }
        Self { n, objective, inner }
    }

    fn value(&self, arena: &Arena) -> f64 {
        let mut total = 0.0;
        self.walk(arena, arena.root, &mut total);
        total
    }

    fn walk(&self, arena: &Arena, id: usize, total: &mut f64) -> usize {
        if id < self.n {
            return 1 << id;
        }
        let [a, b] = arena.children[id];
        let ma = self.walk(arena, a, total);
        let mb = self.walk(arena, b, total);
        let m = ma | mb;
        let cut = self.inner[m] - self.inner[ma] - self.inner[mb];
        if cut != 0.0 {
            *total += cut * self.objective.coefficient(m.count_ones() as usize, self.n);
        }
        m
    }
}

fn extend<F: FnMut(&Arena)>(arena: &mut Arena, target: usize, visit: &mut F) {
    if arena.leaves == target {
        visit(arena);
        return;
    }
    let slots: Vec<usize> = arena.slots().collect();
    for x in slots {
        arena.insert(x);
        extend(arena, target, visit);
        arena.undo();
    }
}

/// Visits every binary tree on `n` leaves in enumeration order.
pub fn for_each_tree<F: FnMut(&Dendrogram)>(n: usize, mut f: F) -> Result<()> {
    check_n(n)?;
    let mut arena = Arena::new(n);
    extend(&mut arena, n, &mut |a: &Arena| f(&a.to_dendrogram()));
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("tree needs at least one leaf".into()));
    }
    if n > MAX_BRUTE_FORCE_N {
        return Err(Error::TooLarge { n, max: MAX_BRUTE_FORCE_N });
    }
    Ok(())
}

/// Objective value of every tree, in enumeration order.
pub fn all_tree_values(g: &WeightedGraph, objective: Objective) -> Result<Vec<f64>> {
    check_n(g.n())?;
    let eval = MaskEvaluator::new(g, objective);
    let mut out = Vec::with_capacity(tree_count(g.n()) as usize);
    let mut arena = Arena::new(g.n());
    extend(&mut arena, g.n(), &mut |a: &Arena| out.push(eval.value(a)));
    Ok(out)
}

/// Global optimum of `objective` over all binary trees, with the first
/// optimal tree in enumeration order as witness.
pub fn brute_force_opt(g: &WeightedGraph, objective: Objective) -> Result<(Dendrogram, f64)> {
    let n = g.n();
    check_n(n)?;
    let eval = MaskEvaluator::new(g, objective);

    let mut prefixes = Vec::new();
    let mut arena = Arena::new(n);
    extend(&mut arena, n.min(SPLIT_LEAVES), &mut |a: &Arena| prefixes.push(a.clone()));

    let best_per_prefix = par::map_slice(&prefixes, |prefix| {
        let mut arena = prefix.clone();
        let mut best: Option<(f64, Arena)> = None;
        extend(&mut arena, n, &mut |a: &Arena| {
            let v = eval.value(a);
            if best.as_ref().is_none_or(|(b, _)| objective.improves(v, *b)) {
                best = Some((v, a.clone()));
            }
        });
        best.expect("every prefix has at least one completion")
    });

    let (value, arena) = best_per_prefix
        .into_iter()
        .reduce(|acc, cand| if objective.improves(cand.0, acc.0) { cand } else { acc })
        .expect("at least one tree");
    Ok((arena.to_dendrogram(), value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{clique, tight_dissimilarity_instance};
    use std::collections::HashSet;

    #[test]
    fn counts_match_double_factorial() {
        for n in 1..=7 {
            let mut seen = HashSet::new();
            let mut count = 0u64;
            for_each_tree(n, |t| {
                count += 1;
                seen.insert(t.canonical());
            })
            .unwrap();
            assert_eq!(count, tree_count(n));
            assert_eq!(seen.len() as u64, count, "duplicate tree for n={n}");
        }
        assert_eq!(tree_count(4), 15);
        assert_eq!(tree_count(10), 34_459_425);
    }

    #[test]
    fn mask_values_agree_with_lca_evaluation() {
        let g = WeightedGraph::from_edges(5, [(0, 1, 0.5), (1, 3, 2.0), (2, 4, 1.25), (0, 4, 0.75)]).unwrap();
        for obj in Objective::ALL {
            let fast = all_tree_values(&g, obj).unwrap();
            let mut slow = Vec::new();
            for_each_tree(5, |t| slow.push(obj.evaluate(&g, t).unwrap())).unwrap();
            assert_eq!(fast.len(), slow.len());
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tight_dissimilarity_four_vertices() {
        let g = tight_dissimilarity_instance(2).unwrap();
        let (t, v) = brute_force_opt(&g, Objective::Dissimilarity).unwrap();
        assert_eq!(v, 8.0);
        assert_eq!(Objective::Dissimilarity.evaluate(&g, &t).unwrap(), 8.0);
    }

    #[test]
    fn cliques_are_indifferent() {
        let g = clique(4, 1.0).unwrap();
        let vals = all_tree_values(&g, Objective::Similarity).unwrap();
        assert!(vals.iter().all(|&v| v == vals[0]));
    }

    #[test]
    fn witness_is_first_optimal_tree() {
        let g = clique(5, 1.0).unwrap();
        let (t, _) = brute_force_opt(&g, Objective::Dasgupta).unwrap();
        let mut first = None;
        for_each_tree(5, |tree| {
            if first.is_none() {
                first = Some(tree.clone());
            }
        })
        .unwrap();
        assert_eq!(Some(t), first);
    }

    #[test]
    fn too_large_is_guarded() {
        let g = WeightedGraph::empty(11).unwrap();
        assert!(matches!(
            brute_force_opt(&g, Objective::Similarity),
            Err(Error::TooLarge { n: 11, .. })
        ));
    }

    #[test]
    fn single_vertex() {
        let g = WeightedGraph::empty(1).unwrap();
        let (t, v) = brute_force_opt(&g, Objective::Similarity).unwrap();
        assert_eq!((t.n(), v), (1, 0.0));
    }
}
