//! Weighted graphs, the instance generators and the graph file format.
//!
//! A [`WeightedGraph`] stores a dense symmetric weight matrix. Whether the
//! weights are read as similarities or dissimilarities depends on the
//! objective the graph is evaluated under.

use std::fs;
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    weights: Vec<f64>,
}

impl WeightedGraph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("graph needs at least one vertex".into()));
        }
        Ok(Self { n, weights: vec![0.0; n * n] })
    }

    /// Builds a graph from `(i, j, w)` triples. Either orientation of a pair
    /// may appear; repeating a pair is allowed only with the same weight.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut g = Self::empty(n)?;
        let mut seen = vec![false; n * n];
        for (i, j, w) in edges {
            g.check_pair(i, j, w)?;
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            if seen[a * n + b] {
                let first = g.weight(a, b);
                if first != w {
                    return Err(Error::ConflictingEdge { i: a, j: b, first, second: w });
                }
                continue;
            }
            seen[a * n + b] = true;
            g.put(a, b, w);
        }
        Ok(g)
    }

    fn check_pair(&self, i: usize, j: usize, w: f64) -> Result<()> {
        for v in [i, j] {
            if v >= self.n {
                return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
            }
        }
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        if !w.is_finite() {
            return Err(Error::NonFiniteWeight { i, j });
        }
        if w < 0.0 {
            return Err(Error::NegativeWeight { i, j, weight: w });
        }
        Ok(())
    }

    fn put(&mut self, i: usize, j: usize, w: f64) {
        self.weights[i * self.n + j] = w;
        self.weights[j * self.n + i] = w;
    }

    pub fn set_weight(&mut self, i: usize, j: usize, w: f64) -> Result<()> {
        self.check_pair(i, j, w)?;
        self.put(i, j, w);
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Row `i` of the weight matrix (zero on the diagonal).
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    /// Unordered pairs `i < j` with nonzero weight.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n).filter_map(move |j| {
                let w = self.weight(i, j);
                (w != 0.0).then_some((i, j, w))
            })
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Sum of weights over unordered pairs.
    pub fn total_weight(&self) -> f64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    pub fn degree(&self, v: usize) -> f64 {
        self.row(v).iter().sum()
    }

    /// Weighted degree of `v` counting only neighbours flagged in `alive`.
    pub fn degree_within(&self, v: usize, alive: &[bool]) -> f64 {
        self.row(v)
            .iter()
            .zip(alive)
            .filter(|(_, &a)| a)
            .map(|(w, _)| *w)
            .sum()
    }

    /// Subgraph induced on `vertices`; vertex `k` of the result is `vertices[k]`.
    pub fn induced(&self, vertices: &[usize]) -> Self {
        let m = vertices.len();
        let mut weights = vec![0.0; m * m];
        for (a, &i) in vertices.iter().enumerate() {
            for (b, &j) in vertices.iter().enumerate() {
                if a != b {
                    weights[a * m + b] = self.weight(i, j);
                }
            }
        }
        Self { n: m, weights }
    }

    /// Total weight crossing the bipartition given by `side`.
    pub fn cut_weight(&self, side: &[bool]) -> f64 {
        self.edges()
            .filter(|&(i, j, _)| side[i] != side[j])
            .map(|(_, _, w)| w)
            .sum()
    }

    pub fn max_degree(&self) -> f64 {
        (0..self.n).map(|v| self.degree(v)).fold(0.0, f64::max)
    }

    /// Checks symmetry, the zero diagonal, and nonnegative finite weights.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            if self.weight(i, i) != 0.0 {
                return Err(Error::SelfLoop(i));
            }
            for j in i + 1..self.n {
                let w = self.weight(i, j);
                if w != self.weight(j, i) {
                    return Err(Error::ConflictingEdge { i, j, first: w, second: self.weight(j, i) });
                }
                self.check_pair(i, j, w)?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> GraphFile {
        GraphFile { n: self.n, edges: self.edges().collect() }
    }

    pub fn from_json(file: &GraphFile) -> Result<Self> {
        Self::from_edges(file.n, file.edges.iter().copied())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let file: GraphFile = serde_json::from_str(&text).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_json(&file)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string(&self.to_json())?)?;
        Ok(())
    }
}

/// On-disk graph format: `{"n": <int>, "edges": [[i, j, w], ...]}`, 0-based, `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

/// Default weight bonus on the horizontal cliques of the tight similarity instance.
pub const DEFAULT_TIGHT_EPS: f64 = 0.1;

/// Vertex id of position `p` inside vertical clique `c` of the tight similarity instance.
#[inline]
pub fn tight_similarity_vertex(k: usize, clique: usize, position: usize) -> usize {
    clique * k * k + position
}

/// `k` unit-weight vertical cliques on `k²` vertices each, plus `k²`
/// horizontal cliques (same position across the vertical cliques) of weight
/// `1 + eps`. `n = k³`.
pub fn tight_similarity_instance(k: usize, eps: f64) -> Result<WeightedGraph> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let k2 = k * k;
    let mut g = WeightedGraph::empty(k2 * k)?;
    for c in 0..k {
        for p in 0..k2 {
            for q in p + 1..k2 {
                g.put(tight_similarity_vertex(k, c, p), tight_similarity_vertex(k, c, q), 1.0);
            }
        }
    }
    for p in 0..k2 {
        for c in 0..k {
            for d in c + 1..k {
                g.put(tight_similarity_vertex(k, c, p), tight_similarity_vertex(k, d, p), 1.0 + eps);
            }
        }
    }
    Ok(g)
}

/// Vertex sets of the vertical cliques of the tight similarity instance.
pub fn tight_similarity_vertical_cliques(k: usize) -> Vec<Vec<usize>> {
    (0..k)
        .map(|c| (0..k * k).map(|p| tight_similarity_vertex(k, c, p)).collect())
        .collect()
}

/// `K_{m,m}` with unit weights minus a perfect matching, on `n = 2m` vertices.
///
/// Side `L` holds the even vertices and side `R` the odd ones; the removed
/// matching pairs `2i` with `2i + 1`.
pub fn tight_dissimilarity_instance(m: usize) -> Result<WeightedGraph> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("m must be at least 2, got {m}")));
    }
    let mut g = WeightedGraph::empty(2 * m)?;
    for a in 0..m {
        for b in 0..m {
            if a != b {
                g.put(2 * a, 2 * b + 1, 1.0);
            }
        }
    }
    Ok(g)
}

/// The `(L, R)` sides of [`tight_dissimilarity_instance`].
pub fn tight_dissimilarity_sides(m: usize) -> (Vec<usize>, Vec<usize>) {
    ((0..m).map(|a| 2 * a).collect(), (0..m).map(|a| 2 * a + 1).collect())
}

/// Unit clique on the first `⌈eps·n⌉` vertices; every other pair has weight 0.
pub fn embedded_clique_instance(n: usize, eps: f64) -> Result<WeightedGraph> {
    let size = embedded_clique_size(n, eps)?;
    let mut g = WeightedGraph::empty(n)?;
    for i in 0..size {
        for j in i + 1..size {
            g.put(i, j, 1.0);
        }
    }
    Ok(g)
}

pub fn embedded_clique_size(n: usize, eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1], got {eps}")));
    }
    // Guard against 0.2 * 20 = 4.000000000000001 style rounding.
    let size = ((eps * n as f64) - 1e-9).ceil().max(0.0) as usize;
    if size < 2 {
        return Err(Error::InvalidParameter(format!(
            "embedded clique of size {size} is smaller than 2"
        )));
    }
    Ok(size.min(n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightDist {
    /// Uniform on `(0, 1]`.
    Uniform01,
    Unit,
}

/// Each unordered pair is present independently with probability `density`.
pub fn random_instance(
    n: usize,
    density: f64,
    dist: WeightDist,
    stream: RngStream,
) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidParameter(format!("density must lie in (0, 1], got {density}")));
    }
    let mut rng = stream.rng();
    let mut g = WeightedGraph::empty(n)?;
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < density {
                let w = match dist {
                    WeightDist::Unit => 1.0,
                    WeightDist::Uniform01 => 1.0 - rng.random::<f64>(),
                };
                g.put(i, j, w);
            }
        }
    }
    Ok(g)
}

/// Complete graph with every weight equal to `w`.
pub fn clique(n: usize, w: f64) -> Result<WeightedGraph> {
    let mut g = WeightedGraph::empty(n)?;
    for i in 0..n {
        for j in i + 1..n {
            g.set_weight(i, j, w)?;
        }
    }
    Ok(g)
}

/// Unit-weight cycle `0 - 1 - … - (n-1) - 0`.
pub fn cycle(n: usize) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("cycle needs n >= 3, got {n}")));
    }
    WeightedGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n, 1.0)))
}
