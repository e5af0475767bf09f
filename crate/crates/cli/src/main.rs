//! `hclab`: generate instances, run clustering algorithms, evaluate trees and
//! check the numerical claims behind them.
//!
//! Exit status is 0 on success, 1 when a verification check fails (or a
//! computation does not go through), and 2 on bad usage or unreadable input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hclab::graph::{
    clique, cycle, embedded_clique_instance, random_instance, tight_dissimilarity_instance,
    tight_similarity_instance, WeightDist,
};
use hclab::harness::{
    bench_sweep, compare, default_theta_grid, reports_to_csv, verify_constants, verify_embedded_clique,
    verify_factor, verify_gw_ratio, verify_guarantees, verify_random_expectation, verify_relaxation,
    verify_tight_dissimilarity, verify_tight_similarity, AlgParams, Algorithm, BenchParams,
    EmbeddedCliqueParams, ExpectationParams, GuaranteeParams, GwParams, RelaxationParams, Scenario,
    TripletParams, Which,
};
use hclab::linkage::{average_linkage, LinkageMode, TieBreak};
use hclab::objectives::{dasgupta_cost, dissimilarity_reward, similarity_reward};
use hclab::peel::{PeelConfig, DEFAULT_GAMMA, DEFAULT_GW_ROUNDS};
use hclab::sdp::{build_hc_sdp, solve_low_rank, SolverConfig};
use hclab::{Dendrogram, Error, Objective, WeightedGraph};

#[derive(Parser, Debug)]
#[command(name = "hclab", version, about = "Hierarchical clustering objectives laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a graph instance as JSON.
    Gen(GenArgs),
    /// Run algorithms on a graph and report their objective values.
    Run(RunArgs),
    /// Score a dendrogram on a graph.
    Eval(EvalArgs),
    /// Run a verification scenario.
    Verify(VerifyArgs),
    /// Peeling sweep over random and structured instances.
    Bench(BenchArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Family {
    TightSim,
    TightDissim,
    EmbeddedClique,
    Random,
    Clique,
    Cycle,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Weights {
    Uniform,
    Unit,
}

#[derive(Args, Debug)]
struct GenArgs {
    family: Family,
    /// Vertices (random, clique, cycle, embedded-clique).
    #[arg(long)]
    n: Option<usize>,
    /// Tight similarity parameter; the graph has k^3 vertices.
    #[arg(long)]
    k: Option<usize>,
    /// Tight dissimilarity side size; the graph has 2m vertices.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, value_enum, default_value_t = Weights::Uniform)]
    weights: Weights,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Sim,
    Dissim,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Feasibility tolerance of the vector-program solver.
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    /// Vector dimension; defaults to the smallest admissible rank.
    #[arg(long)]
    rank: Option<usize>,
}

impl SolverArgs {
    fn config(&self, seed: u64) -> SolverConfig {
        SolverConfig { tol: self.tol, rank: self.rank, seed, ..SolverConfig::default() }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Comma-separated algorithm names, or `sdp-solve` to dump the relaxation.
    #[arg(long, value_delimiter = ',', required = true)]
    alg: Vec<String>,
    #[arg(long, default_value = "sim")]
    objective: String,
    /// Average-linkage mode; sets the objective when `--objective` is left at its default.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_GW_ROUNDS)]
    gw_rounds: usize,
    /// Runs per constituent of the best-of algorithms.
    #[arg(long, default_value_t = 1)]
    best_of_runs: usize,
    #[command(flatten)]
    solver: SolverArgs,
    /// CSV (or, for `sdp-solve`, JSON) output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,
    /// Add a wall-clock column.
    #[arg(long)]
    timing: bool,
    /// Write the average-linkage merge trace here as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    tree: PathBuf,
    /// Only this objective; all three when omitted.
    #[arg(long)]
    objective: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Target {
    SimTight,
    DissimTight,
    Triplet,
    Factor,
    Constants,
    Relaxation,
    RandomExpectation,
    GwRatio,
    EmbeddedClique,
    Guarantees,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    target: Target,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte-Carlo trials (triplet, random-expectation).
    #[arg(long)]
    trials: Option<u64>,
    /// Sizes: k for sim-tight, m for dissim-tight, n for factor.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    theta_bar: Vec<f64>,
    #[arg(long, default_value = "both")]
    which: String,
    #[arg(long)]
    eps: Option<f64>,
    /// Instances (relaxation, gw-ratio, guarantees) or random triples (triplet).
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_GW_ROUNDS)]
    gw_rounds: usize,
    #[command(flatten)]
    solver: SolverArgs,
    /// Table output path (CSV, or JSON with `--json`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    gammas: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_GW_ROUNDS)]
    gw_rounds: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

/// Errors in the user's request, reported with exit status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(Usage(msg.into()).into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run(a),
        Command::Eval(a) => eval(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_usage(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn is_usage(e: &anyhow::Error) -> bool {
    if e.downcast_ref::<Usage>().is_some() {
        return true;
    }
    matches!(
        e.downcast_ref::<Error>(),
        Some(
            Error::InvalidParameter(_)
                | Error::UnknownAlgorithm(_)
                | Error::TooLarge { .. }
                | Error::Malformed { .. }
                | Error::Io(_)
                | Error::Json(_)
                | Error::SizeMismatch { .. }
                | Error::InvalidDendrogram(_)
                | Error::VertexOutOfRange { .. }
                | Error::SelfLoop(_)
                | Error::NegativeWeight { .. }
                | Error::NonFiniteWeight { .. }
                | Error::ConflictingEdge { .. }
        )
    )
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Usage(format!("writing {}: {e}", p.display())).into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn require<T>(v: Option<T>, flag: &str, family: &str) -> anyhow::Result<T> {
    match v {
        Some(v) => Ok(v),
        None => usage(format!("{family} needs --{flag}")),
    }
}

fn gen(a: GenArgs) -> anyhow::Result<bool> {
    let g = match a.family {
        Family::TightSim => tight_similarity_instance(require(a.k, "k", "tight-sim")?, a.eps.unwrap_or(0.1))?,
        Family::TightDissim => tight_dissimilarity_instance(require(a.m, "m", "tight-dissim")?)?,
        Family::EmbeddedClique => {
            embedded_clique_instance(require(a.n, "n", "embedded-clique")?, require(a.eps, "eps", "embedded-clique")?)?
        }
        Family::Random => {
            let dist = match a.weights {
                Weights::Uniform => WeightDist::Uniform01,
                Weights::Unit => WeightDist::Unit,
            };
            random_instance(require(a.n, "n", "random")?, a.density, dist, hclab::RngStream::new(a.seed))?
        }
        Family::Clique => clique(require(a.n, "n", "clique")?, 1.0)?,
        Family::Cycle => cycle(require(a.n, "n", "cycle")?)?,
    };
    let text = serde_json::to_string(&g.to_json())?;
    emit(a.out.as_deref(), &(text + "\n"))?;
    Ok(true)
}

fn parse_objective(s: &str) -> anyhow::Result<Objective> {
    Ok(s.parse::<Objective>()?)
}

fn instance_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "graph".into())
}

fn run(a: RunArgs) -> anyhow::Result<bool> {
    let g = WeightedGraph::read(&a.graph)?;
    let mut objective = parse_objective(&a.objective)?;
    if let Some(mode) = a.mode {
        if a.objective == "sim" {
            objective = match mode {
                Mode::Sim => Objective::Similarity,
                Mode::Dissim => Objective::Dissimilarity,
            };
        }
    }
    if a.alg.iter().any(|s| s == "sdp-solve") {
        if a.alg.len() != 1 {
            return usage("sdp-solve cannot be combined with other algorithms");
        }
        let sol = solve_low_rank(&build_hc_sdp(&g)?, &a.solver.config(a.seed))?;
        let text = serde_json::to_string_pretty(&sol.to_json())?;
        emit(a.out.as_deref(), &(text + "\n"))?;
        eprintln!(
            "objective {} max residual {:e} converged {}",
            sol.objective,
            sol.residuals.max(),
            sol.converged
        );
        return Ok(true);
    }
    let algs = a.alg.iter().map(|s| s.parse::<Algorithm>()).collect::<Result<Vec<_>, _>>()?;
    if let Some(path) = &a.trace {
        let mode = match objective {
            Objective::Dissimilarity => LinkageMode::Dissimilarity,
            _ => LinkageMode::Similarity,
        };
        let (_, trace) = average_linkage(&g, mode, TieBreak::Lexicographic);
        fs::write(path, trace.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    let params = AlgParams {
        peel: PeelConfig { gamma: a.gamma, gw_rounds: a.gw_rounds },
        solver: a.solver.config(a.seed),
        best_of_runs: a.best_of_runs,
    };
    let reports = compare(&g, &instance_name(&a.graph), &algs, a.trials, a.seed, objective, &params)?;
    let text = if a.json {
        serde_json::to_string_pretty(&reports)? + "\n"
    } else {
        reports_to_csv(&reports, a.timing)
    };
    emit(a.out.as_deref(), &text)?;
    Ok(true)
}

fn eval(a: EvalArgs) -> anyhow::Result<bool> {
    let g = WeightedGraph::read(&a.graph)?;
    let t = Dendrogram::read(&a.tree)?;
    let objectives = match &a.objective {
        Some(s) => vec![parse_objective(s)?],
        None => Objective::ALL.to_vec(),
    };
    let mut values = Vec::new();
    for o in objectives {
        let v = match o {
            Objective::Dasgupta => dasgupta_cost(&g, &t)?,
            Objective::Similarity => similarity_reward(&g, &t)?,
            Objective::Dissimilarity => dissimilarity_reward(&g, &t)?,
        };
        values.push((o, v));
    }
    if a.json {
        let map: serde_json::Map<String, serde_json::Value> =
            values.iter().map(|(o, v)| (o.name().to_string(), serde_json::json!(v))).collect();
        println!("{}", serde_json::Value::Object(map));
    } else {
        println!("objective,value");
        for (o, v) in values {
            println!("{},{}", o.name(), hclab::harness::sig12(v));
        }
    }
    Ok(true)
}

fn verify(a: VerifyArgs) -> anyhow::Result<bool> {
    let solver = a.solver.config(a.seed);
    let peel = PeelConfig { gamma: a.gamma, gw_rounds: a.gw_rounds };
    let sizes = |default: Vec<usize>| if a.n.is_empty() { default } else { a.n.clone() };
    let scenario: Scenario = match a.target {
        Target::SimTight => verify_tight_similarity(&sizes((2..=6).collect()), a.eps.unwrap_or(0.1))?,
        Target::DissimTight => verify_tight_dissimilarity(&sizes(vec![2, 5, 10, 20, 50]))?,
        Target::Triplet => {
            let mut p = TripletParams { seed: a.seed, ..TripletParams::default() };
            if let Some(t) = a.trials {
                p.trials = t;
            }
            if let Some(k) = a.instances {
                p.triples = k;
            }
            hclab::harness::verify_triplet(p)?
        }
        Target::Factor => {
            let thetas = if a.theta_bar.is_empty() { default_theta_grid() } else { a.theta_bar.clone() };
            verify_factor(&sizes(vec![4, 6, 8, 10, 12, 16, 20]), &thetas)?
        }
        Target::Constants => verify_constants(a.which.parse::<Which>()?)?,
        Target::Relaxation => {
            let mut p = RelaxationParams { seed: a.seed, solver, ..RelaxationParams::default() };
            if let Some(k) = a.instances {
                p.instances = k;
            }
            verify_relaxation(&p)?
        }
        Target::RandomExpectation => {
            let mut p = ExpectationParams { seed: a.seed, ..ExpectationParams::default() };
            if let Some(t) = a.trials {
                p.trials = t;
                p.triplet_trials = t;
            }
            if let Some(k) = a.instances {
                p.graphs = k;
            }
            verify_random_expectation(p)?
        }
        Target::GwRatio => {
            let mut p = GwParams { seed: a.seed, rounds: a.gw_rounds, solver, ..GwParams::default() };
            if let Some(k) = a.instances {
                p.instances = k;
            }
            verify_gw_ratio(&p)?
        }
        Target::EmbeddedClique => {
            let mut p = EmbeddedCliqueParams { seed: a.seed, peel, solver, ..EmbeddedCliqueParams::default() };
            if let Some(&n) = a.n.first() {
                p.n = n;
            }
            if let Some(e) = a.eps {
                p.eps = e;
            }
            verify_embedded_clique(&p)?
        }
        Target::Guarantees => {
            let mut p = GuaranteeParams { seed: a.seed, peel, solver, ..GuaranteeParams::default() };
            if let Some(k) = a.instances {
                p.instances = k;
            }
            if let Some(t) = a.trials {
                p.seeds = t as usize;
            }
            verify_guarantees(&p)?
        }
    };
    report(&scenario, a.out.as_deref(), a.json)
}

/// Writes the table, prints one line per check, and returns whether all passed.
fn report(s: &Scenario, out: Option<&Path>, json: bool) -> anyhow::Result<bool> {
    let table = if json { serde_json::to_string_pretty(&s.to_json())? + "\n" } else { s.to_csv() };
    emit(out, &table)?;
    eprint!("{}", s.summary());
    Ok(s.passed())
}

fn bench(a: BenchArgs) -> anyhow::Result<bool> {
    let mut p = BenchParams { seed: a.seed, gw_rounds: a.gw_rounds, solver: a.solver.config(a.seed), ..BenchParams::default() };
    if !a.sizes.is_empty() {
        p.sizes = a.sizes;
    }
    if !a.gammas.is_empty() {
        if a.gammas.iter().any(|&g| !(g > 0.0)) {
            bail!(Usage("gammas must be positive".into()));
        }
        p.gammas = a.gammas;
    }
    report(&bench_sweep(&p)?, a.out.as_deref(), a.json)
}
