use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self loop on vertex {0}")]
    SelfLoop(usize),

    #[error("negative weight {weight} on edge ({i}, {j})")]
    NegativeWeight { i: usize, j: usize, weight: f64 },

    #[error("non-finite weight on edge ({i}, {j})")]
    NonFiniteWeight { i: usize, j: usize },

    #[error("conflicting entries for edge ({i}, {j}): {first} vs {second}")]
    ConflictingEdge {
        i: usize,
        j: usize,
        first: f64,
        second: f64,
    },

    #[error("invalid dendrogram: {0}")]
    InvalidDendrogram(String),

    #[error("size mismatch: graph has {graph} vertices, tree has {tree} leaves")]
    SizeMismatch { graph: usize, tree: usize },

    #[error("brute-force enumeration supports at most {max} vertices, got {n}")]
    TooLarge { n: usize, max: usize },

    #[error("solver did not converge after {iterations} iterations (max residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("inconsistent angle triple: probability {0} is negative")]
    InconsistentAngles(f64),

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("malformed file {path}: {message}")]
    Malformed { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
