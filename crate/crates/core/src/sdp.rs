//! Vector programs and a low-rank augmented-Lagrangian solver.
//!
//! A [`VectorProgram`] has one unit vector per variable, a linear objective
//! in their pairwise inner products, and linear constraints on inner-product
//! sums. Two programs are built here:
//!
//! * the hierarchical relaxation: one vector `v_i^t` per vertex `i` and
//!   level `t = 1..n-1`, separations `x^t_ij = ½‖v_i^t - v_j^t‖²`,
//!   objective `Σ_t Σ_ij w_ij (1 - x^t_ij)`, spreading constraints
//!   `Σ_(j≠i) x^t_ij ≥ n - t`, monotonicity `x^(t+1)_ij ≤ x^t_ij`,
//!   `x^1_ij = 1` and `v_i^t · v_j^t ≥ 0`;
//! * the max-cut relaxation: maximize `Σ w_ij (1 - u_i · u_j) / 2`.
//!
//! For unit vectors `x = 1 - v_i · v_j`, so every constraint is stored in
//! inner-product form. The solver keeps the vectors on the unit sphere by
//! renormalizing after each projected gradient step and handles the
//! remaining constraints with a shifted quadratic penalty whose multipliers
//! are updated between sweeps.

use std::collections::BTreeMap;

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::dendrogram::{Dendrogram, Node};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::random_hc::random_tree;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintFamily {
    Spreading,
    Monotonicity,
    Nonnegativity,
    LevelOne,
}

/// `Σ coef · (v_a · v_b)  sense  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub family: ConstraintFamily,
    pub terms: Vec<(usize, usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    fn lhs(&self, vecs: &Vectors) -> f64 {
        self.terms.iter().map(|&(a, b, c)| c * vecs.dot(a, b)).sum()
    }

    /// Signed violation: positive when infeasible (absolute value for equalities).
    fn violation(&self, lhs: f64) -> f64 {
        match self.sense {
            Sense::Le => lhs - self.rhs,
            Sense::Ge => self.rhs - lhs,
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Layout {
    /// Vector `(t - 1)·n + i` is `v_i^t`, for `t = 1..n-1`.
    Hierarchy { n: usize },
    /// Vector `i` is `u_i`.
    MaxCut { n: usize },
}

impl Layout {
    pub fn n(&self) -> usize {
        match *self {
            Layout::Hierarchy { n } | Layout::MaxCut { n } => n,
        }
    }

    pub fn levels(&self) -> usize {
        match *self {
            Layout::Hierarchy { n } => n - 1,
            Layout::MaxCut { .. } => 1,
        }
    }

    /// Index of vertex `i` at level `t` (1-based levels).
    #[inline]
    pub fn index(&self, t: usize, i: usize) -> usize {
        match *self {
            Layout::Hierarchy { n } => (t - 1) * n + i,
            Layout::MaxCut { .. } => i,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorProgram {
    pub layout: Layout,
    pub num_vectors: usize,
    /// Maximize `constant + Σ coef · (v_a · v_b)`.
    pub objective: Vec<(usize, usize, f64)>,
    pub constant: f64,
    pub constraints: Vec<Constraint>,
}

impl VectorProgram {
    pub fn count(&self, family: ConstraintFamily) -> usize {
        self.constraints.iter().filter(|c| c.family == family).count()
    }

    pub fn objective_value(&self, vecs: &Vectors) -> f64 {
        self.constant + self.objective.iter().map(|&(a, b, c)| c * vecs.dot(a, b)).sum::<f64>()
    }

    /// Default factorization rank `min(n, 1 + ⌈√(2m)⌉)` where `m` counts the
    /// constraints including unit norms.
    pub fn default_rank(&self) -> usize {
        let m = self.constraints.len() + self.num_vectors;
        let r = 1 + (2.0 * m as f64).sqrt().ceil() as usize;
        r.min(self.layout.n()).max(2)
    }

    fn min_rank(&self) -> usize {
        match self.layout {
            // level one needs n mutually orthogonal vectors
            Layout::Hierarchy { n } => n.max(2),
            Layout::MaxCut { .. } => 2,
        }
    }
}

/// The hierarchical relaxation for similarity weights.
pub fn build_hc_sdp(g: &WeightedGraph) -> Result<VectorProgram> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidParameter("the relaxation needs n >= 2".into()));
    }
    let layout = Layout::Hierarchy { n };
    let levels = n - 1;
    let mut objective = Vec::new();
    for t in 1..=levels {
        for (i, j, w) in g.edges() {
            objective.push((layout.index(t, i), layout.index(t, j), w));
        }
    }
    let mut constraints = Vec::new();
    for t in 1..=levels {
        // Σ_(j≠i) x_ij ≥ n - t  ⇔  Σ_(j≠i) v_i·v_j ≤ t - 1
        for i in 0..n {
            constraints.push(Constraint {
                family: ConstraintFamily::Spreading,
                terms: (0..n).filter(|&j| j != i).map(|j| (layout.index(t, i), layout.index(t, j), 1.0)).collect(),
                sense: Sense::Le,
                rhs: (t - 1) as f64,
            });
        }
    }
    for t in 1..levels {
        // x^(t+1) ≤ x^t  ⇔  v^(t+1)_i·v^(t+1)_j - v^t_i·v^t_j ≥ 0
        for i in 0..n {
            for j in i + 1..n {
                constraints.push(Constraint {
                    family: ConstraintFamily::Monotonicity,
                    terms: vec![
                        (layout.index(t + 1, i), layout.index(t + 1, j), 1.0),
                        (layout.index(t, i), layout.index(t, j), -1.0),
                    ],
                    sense: Sense::Ge,
                    rhs: 0.0,
                });
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            constraints.push(Constraint {
                family: ConstraintFamily::LevelOne,
                terms: vec![(layout.index(1, i), layout.index(1, j), 1.0)],
                sense: Sense::Eq,
                rhs: 0.0,
            });
        }
    }
    for t in 1..=levels {
        for i in 0..n {
            for j in i + 1..n {
                constraints.push(Constraint {
                    family: ConstraintFamily::Nonnegativity,
                    terms: vec![(layout.index(t, i), layout.index(t, j), 1.0)],
                    sense: Sense::Ge,
                    rhs: 0.0,
                });
            }
        }
    }
    Ok(VectorProgram { layout, num_vectors: n * levels, objective, constant: 0.0, constraints })
}

/// The Goemans–Williamson relaxation `max Σ w_ij (1 - u_i·u_j) / 2`.
pub fn build_maxcut_sdp(g: &WeightedGraph) -> Result<VectorProgram> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidParameter("max-cut needs n >= 2".into()));
    }
    Ok(VectorProgram {
        layout: Layout::MaxCut { n },
        num_vectors: n,
        objective: g.edges().map(|(i, j, w)| (i, j, -0.5 * w)).collect(),
        constant: 0.5 * g.total_weight(),
        constraints: Vec::new(),
    })
}

/// Row-major block of `count` vectors of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vectors {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Vectors {
    pub fn zeros(count: usize, dim: usize) -> Self {
        Self { dim, data: vec![0.0; count * dim] }
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.dim
    }

    #[inline]
    pub fn get(&self, a: usize) -> &[f64] {
        &self.data[a * self.dim..(a + 1) * self.dim]
    }

    #[inline]
    pub fn get_mut(&mut self, a: usize) -> &mut [f64] {
        &mut self.data[a * self.dim..(a + 1) * self.dim]
    }

    #[inline]
    pub fn dot(&self, a: usize, b: usize) -> f64 {
        dot(self.get(a), self.get(b))
    }

    /// Pads (with zeros) or truncates every vector to `dim` components.
    pub fn resized(&self, dim: usize) -> Self {
        let mut out = Self::zeros(self.count(), dim);
        let keep = dim.min(self.dim);
        for a in 0..self.count() {
            out.get_mut(a)[..keep].copy_from_slice(&self.get(a)[..keep]);
        }
        out
    }

    fn normalize(&mut self) {
        for a in 0..self.count() {
            let v = self.get_mut(a);
            let norm = dot(v, v).sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
        }
    }

    fn random(count: usize, dim: usize, stream: RngStream) -> Self {
        let mut rng = stream.rng();
        let data = (0..count * dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut v = Self { dim, data };
        v.normalize();
        v
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest violation per constraint family.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ResidualReport {
    pub unit_norm: f64,
    /// Separations outside `[0, 1]`.
    pub separation_range: f64,
    pub families: BTreeMap<ConstraintFamily, f64>,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.families
            .values()
            .copied()
            .fold(self.unit_norm.max(self.separation_range), f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() <= tol
    }

    pub fn family(&self, f: ConstraintFamily) -> f64 {
        self.families.get(&f).copied().unwrap_or(0.0)
    }
}

/// Measures every constraint family of `program` at `vectors`.
pub fn check_feasibility(program: &VectorProgram, vectors: &Vectors) -> ResidualReport {
    let mut report = ResidualReport::default();
    for a in 0..vectors.count() {
        report.unit_norm = report.unit_norm.max((vectors.dot(a, a).sqrt() - 1.0).abs());
    }
    if let Layout::Hierarchy { n } = program.layout {
        for t in 1..n {
            for i in 0..n {
                for j in i + 1..n {
                    let x = separation(vectors, program.layout.index(t, i), program.layout.index(t, j));
                    report.separation_range = report.separation_range.max(x - 1.0).max(-x);
                }
            }
        }
    }
    for c in &program.constraints {
        let v = c.violation(c.lhs(vectors)).max(0.0);
        let slot = report.families.entry(c.family).or_insert(0.0);
        *slot = slot.max(v);
    }
    report
}

/// `½‖v_a - v_b‖²`.
pub fn separation(vectors: &Vectors, a: usize, b: usize) -> f64 {
    0.5 * vectors.get(a).iter().zip(vectors.get(b)).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub enum WarmStart {
    /// Integral embedding of a random hierarchy drawn from the solver seed;
    /// random vectors for the max-cut program.
    Default,
    /// Integral embedding of the given tree (hierarchical programs only).
    Tree(Dendrogram),
    Vectors(Vectors),
    /// Independent uniformly random unit vectors.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Factorization rank; `None` uses [`VectorProgram::default_rank`].
    pub rank: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub warm_start: WarmStart,
    pub penalty_init: f64,
    pub penalty_growth: f64,
    pub penalty_max: f64,
    /// Most gradient sweeps between multiplier updates.
    pub inner_sweeps: usize,
    /// Stop when the objective moved less than this (relatively) over `stall_window` sweeps.
    pub rel_change: f64,
    pub stall_window: usize,
    /// Size of the random nudge applied to the starting vectors.
    pub perturbation: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rank: None,
            tol: 1e-5,
            max_iter: 20_000,
            seed: 0,
            warm_start: WarmStart::Default,
            penalty_init: 1.0,
            penalty_growth: 2.0,
            penalty_max: 1e5,
            inner_sweeps: 500,
            rel_change: 1e-7,
            stall_window: 50,
            perturbation: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub layout: Layout,
    pub vectors: Vectors,
    pub objective: f64,
    pub residuals: ResidualReport,
    /// Whether the stopping rule fired before `max_iter`.
    pub converged: bool,
    pub iterations: usize,
}

impl SdpSolution {
    /// `x^t_ij` for hierarchical solutions (levels are 1-based).
    pub fn separation(&self, t: usize, i: usize, j: usize) -> f64 {
        separation(&self.vectors, self.layout.index(t, i), self.layout.index(t, j))
    }

    /// The vectors of one level (the only level for max-cut).
    pub fn level(&self, t: usize) -> Vec<&[f64]> {
        (0..self.layout.n()).map(|i| self.vectors.get(self.layout.index(t, i))).collect()
    }

    /// `{"layout", "objective", "levels": {t: [[..], ..]}, "residuals", ..}`.
    pub fn to_json(&self) -> serde_json::Value {
        let levels: BTreeMap<String, Vec<Vec<f64>>> = (1..=self.layout.levels())
            .map(|t| (t.to_string(), self.level(t).into_iter().map(<[f64]>::to_vec).collect()))
            .collect();
        serde_json::json!({
            "layout": self.layout,
            "objective": self.objective,
            "converged": self.converged,
            "iterations": self.iterations,
            "levels": levels,
            "residuals": self.residuals,
        })
    }
}

/// Integral embedding of a tree: at level `t` every maximal cluster of at
/// most `t` leaves gets its own basis vector (indexed by its smallest leaf).
pub fn tree_to_vectors(tree: &Dendrogram, n: usize) -> Result<Vectors> {
    if tree.n() != n {
        return Err(Error::SizeMismatch { graph: n, tree: tree.n() });
    }
    if n < 2 {
        return Err(Error::InvalidParameter("the relaxation needs n >= 2".into()));
    }
    let layout = Layout::Hierarchy { n };
    let mut vecs = Vectors::zeros(n * (n - 1), n);
    fn assign(node: &Node, t: usize, layout: &Layout, vecs: &mut Vectors) {
        if node.size() <= t {
            let leaves = node.leaves();
            let anchor = *leaves.iter().min().expect("nonempty");
            for v in leaves {
                vecs.get_mut(layout.index(t, v))[anchor] = 1.0;
            }
        } else if let Some((a, b)) = node.children() {
            assign(a, t, layout, vecs);
            assign(b, t, layout, vecs);
        }
    }
    for t in 1..n {
        assign(tree.root(), t, &layout, &mut vecs);
    }
    Ok(vecs)
}

/// Builds a solution record (objective and residuals) for fixed vectors.
pub fn evaluate(program: &VectorProgram, vectors: Vectors) -> SdpSolution {
    SdpSolution {
        layout: program.layout,
        objective: program.objective_value(&vectors),
        residuals: check_feasibility(program, &vectors),
        vectors,
        converged: true,
        iterations: 0,
    }
}

struct AugmentedLagrangian<'a> {
    program: &'a VectorProgram,
    multipliers: Vec<f64>,
    penalty: f64,
    grad: Vectors,
}

impl AugmentedLagrangian<'_> {
    /// Penalty weight `μ_k` and the sign of `∇g_k` relative to `∇(lhs)`.
    fn weight(&self, k: usize, c: &Constraint, lhs: f64) -> f64 {
        let lam = self.multipliers[k];
        match c.sense {
            Sense::Le => (lam + self.penalty * (lhs - c.rhs)).max(0.0),
            Sense::Ge => -(lam + self.penalty * (c.rhs - lhs)).max(0.0),
            Sense::Eq => lam + self.penalty * (lhs - c.rhs),
        }
    }

    fn value(&self, vecs: &Vectors) -> f64 {
        let mut v = self.program.objective_value(vecs);
        for (k, c) in self.program.constraints.iter().enumerate() {
            let lhs = c.lhs(vecs);
            let lam = self.multipliers[k];
            let rho = self.penalty;
            v -= match c.sense {
                Sense::Eq => {
                    let h = lhs - c.rhs;
                    lam * h + 0.5 * rho * h * h
                }
                Sense::Le | Sense::Ge => {
                    let g = if c.sense == Sense::Le { lhs - c.rhs } else { c.rhs - lhs };
                    if lam + rho * g >= 0.0 {
                        lam * g + 0.5 * rho * g * g
                    } else {
                        -lam * lam / (2.0 * rho)
                    }
                }
            };
        }
        v
    }

    /// Riemannian gradient (tangent to each sphere) stored in `self.grad`;
    /// returns its squared norm.
    fn gradient(&mut self, vecs: &Vectors) -> f64 {
        let dim = vecs.dim;
        self.grad.data.iter_mut().for_each(|x| *x = 0.0);
        let add = |grad: &mut Vectors, a: usize, b: usize, coef: f64| {
            for d in 0..dim {
                grad.data[a * dim + d] += coef * vecs.data[b * dim + d];
                grad.data[b * dim + d] += coef * vecs.data[a * dim + d];
            }
        };
        for &(a, b, c) in &self.program.objective {
            add(&mut self.grad, a, b, c);
        }
        for (k, c) in self.program.constraints.iter().enumerate() {
            let mu = self.weight(k, c, c.lhs(vecs));
            if mu != 0.0 {
                for &(a, b, coef) in &c.terms {
                    add(&mut self.grad, a, b, -mu * coef);
                }
            }
        }
        let mut norm2 = 0.0;
        for a in 0..vecs.count() {
            let v = vecs.get(a);
            let g = self.grad.get_mut(a);
            let radial = dot(g, v);
            for (gd, vd) in g.iter_mut().zip(v) {
                *gd -= radial * vd;
            }
            norm2 += dot(g, g);
        }
        norm2
    }

    fn update_multipliers(&mut self, vecs: &Vectors) {
        for (k, c) in self.program.constraints.iter().enumerate() {
            let lhs = c.lhs(vecs);
            let lam = self.multipliers[k];
            self.multipliers[k] = match c.sense {
                Sense::Le => (lam + self.penalty * (lhs - c.rhs)).max(0.0),
                Sense::Ge => (lam + self.penalty * (c.rhs - lhs)).max(0.0),
                Sense::Eq => lam + self.penalty * (lhs - c.rhs),
            };
        }
    }
}

fn initial_vectors(program: &VectorProgram, cfg: &SolverConfig, dim: usize) -> Result<Vectors> {
    let stream = RngStream::new(cfg.seed).child("sdp-warm-start");
    let n = program.layout.n();
    let vecs = match (&cfg.warm_start, program.layout) {
        (WarmStart::Default, Layout::Hierarchy { .. }) => {
            tree_to_vectors(&random_tree(n, stream)?, n)?.resized(dim)
        }
        (WarmStart::Tree(t), Layout::Hierarchy { .. }) => tree_to_vectors(t, n)?.resized(dim),
        (WarmStart::Tree(_), Layout::MaxCut { .. }) => {
            return Err(Error::InvalidParameter("tree warm start needs a hierarchical program".into()))
        }
        (WarmStart::Vectors(v), _) => {
            if v.count() != program.num_vectors {
                return Err(Error::InvalidParameter(format!(
                    "warm start has {} vectors, program needs {}",
                    v.count(),
                    program.num_vectors
                )));
            }
            let mut v = v.resized(dim);
            v.normalize();
            v
        }
        (WarmStart::Default | WarmStart::Random, _) => Vectors::random(program.num_vectors, dim, stream),
    };
    Ok(vecs)
}

/// Maximizes `program` over unit vectors of dimension `rank`.
///
/// Returns the best iterate (including the warm start) whose residuals are
/// within `tol`; fails with [`Error::NotConverged`] when no iterate was.
pub fn solve_low_rank(program: &VectorProgram, cfg: &SolverConfig) -> Result<SdpSolution> {
    let rank = cfg.rank.unwrap_or_else(|| program.default_rank().max(program.min_rank()));
    if rank < 2 {
        return Err(Error::InvalidParameter(format!("rank must be at least 2, got {rank}")));
    }
    if rank < program.min_rank() {
        return Err(Error::InvalidParameter(format!(
            "rank {rank} cannot host {} orthogonal level-one vectors",
            program.min_rank()
        )));
    }
    let mut vecs = initial_vectors(program, cfg, rank)?;
    let mut al = AugmentedLagrangian {
        program,
        multipliers: vec![0.0; program.constraints.len()],
        penalty: cfg.penalty_init,
        grad: Vectors::zeros(program.num_vectors, rank),
    };

    let mut best: Option<(f64, Vectors)> = None;
    let consider = |vecs: &Vectors, best: &mut Option<(f64, Vectors)>| -> (f64, f64) {
        let residual = check_feasibility(program, vecs).max();
        let obj = program.objective_value(vecs);
        if residual <= cfg.tol && best.as_ref().is_none_or(|(b, _)| obj > *b) {
            *best = Some((obj, vecs.clone()));
        }
        (obj, residual)
    };
    let (_, mut last_residual) = consider(&vecs, &mut best);
    if cfg.perturbation > 0.0 {
        // Integral starting points are symmetric saddles; nudge off them.
        let noise = Vectors::random(vecs.count(), rank, RngStream::new(cfg.seed).child("sdp-perturb"));
        for (v, e) in vecs.data.iter_mut().zip(&noise.data) {
            *v += cfg.perturbation * e;
        }
        vecs.normalize();
    }
    let mut history: Vec<f64> = vec![program.objective_value(&vecs)];
    let mut sweeps = 0;
    let mut converged = false;
    let mut trial = vecs.clone();
    let mut prev: Option<(Vectors, Vectors)> = None;
    let mut step = 0.1;
    let mut omega = 1.0;

    'outer: loop {
        for _ in 0..cfg.inner_sweeps {
            if sweeps >= cfg.max_iter {
                break 'outer;
            }
            sweeps += 1;
            let f0 = al.value(&vecs);
            let g2 = al.gradient(&vecs);
            if g2.sqrt() <= omega {
                history.push(history[history.len() - 1]);
                break;
            }
            // Barzilai-Borwein initial step, Armijo backtracking along the
            // projected gradient.
            if let Some((pv, pg)) = &prev {
                let (mut ss, mut sy) = (0.0, 0.0);
                for d in 0..vecs.data.len() {
                    let s = vecs.data[d] - pv.data[d];
                    ss += s * s;
                    sy -= s * (al.grad.data[d] - pg.data[d]);
                }
                if sy > 0.0 {
                    step = (ss / sy).clamp(1e-10, 1e4);
                }
            }
            let mut accepted = false;
            for _ in 0..60 {
                trial.data.copy_from_slice(&vecs.data);
                for (t, g) in trial.data.iter_mut().zip(&al.grad.data) {
                    *t += step * g;
                }
                trial.normalize();
                if al.value(&trial) >= f0 + 1e-4 * step * g2 {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                history.push(history[history.len() - 1]);
                break;
            }
            match &mut prev {
                Some((pv, pg)) => {
                    pv.data.copy_from_slice(&vecs.data);
                    pg.data.copy_from_slice(&al.grad.data);
                }
                None => prev = Some((vecs.clone(), al.grad.clone())),
            }
            std::mem::swap(&mut vecs, &mut trial);
            history.push(program.objective_value(&vecs));
        }

        al.update_multipliers(&vecs);
        prev = None;
        let (obj, residual) = consider(&vecs, &mut best);
        if residual > cfg.tol && residual > 0.25 * last_residual {
            al.penalty = (al.penalty * cfg.penalty_growth).min(cfg.penalty_max);
        }
        last_residual = residual;
        omega = (omega * 0.3).max(1e-9);
        if residual <= cfg.tol && history.len() > cfg.stall_window {
            let then = history[history.len() - 1 - cfg.stall_window];
            if (obj - then).abs() <= cfg.rel_change * obj.abs().max(1.0) {
                converged = true;
                break;
            }
        }
    }

    match best {
        Some((objective, vectors)) => Ok(SdpSolution {
            layout: program.layout,
            residuals: check_feasibility(program, &vectors),
            objective,
            vectors,
            converged,
            iterations: sweeps,
        }),
        None => Err(Error::NotConverged {
            iterations: sweeps,
            residual: check_feasibility(program, &vecs).max(),
        }),
    }
}
