//! A laboratory for hierarchical clustering objectives.
//!
//! The crate evaluates the Dasgupta cost and the similarity and
//! dissimilarity rewards of binary dendrograms, and implements algorithms
//! for them alongside the instances and numerical checks used to compare
//! those algorithms:
//!
//! * [`linkage`]: average-linkage agglomeration in both weight roles;
//! * [`random_hc`]: recursive uniformly random bipartition;
//! * [`sdp`] and [`sdp_round`]: the hierarchical vector-program relaxation,
//!   its low-rank solver, and hyperplane rounding on top of it;
//! * [`peel`]: high-degree peeling followed by a Goemans–Williamson cut;
//! * [`brute`]: an exhaustive optimal-tree oracle for small graphs;
//! * [`harness`]: verification scenarios, comparisons and CSV reports.
//!
//! Monte-Carlo loops, rounding trials and the brute-force oracle run on
//! rayon when the `parallel` feature is enabled (the default). Every random
//! draw comes from a seeded [`rng::RngStream`], and results are reduced in a
//! fixed order, so output does not depend on the feature or thread count.

pub mod brute;
pub mod dendrogram;
pub mod error;
pub mod graph;
pub mod harness;
pub mod linkage;
pub mod objectives;
pub mod par;
pub mod peel;
pub mod random_hc;
pub mod rng;
pub mod sdp;
pub mod sdp_round;

pub use dendrogram::{Dendrogram, LcaSizes, Node};
pub use error::{Error, Result};
pub use graph::WeightedGraph;
pub use objectives::Objective;
pub use rng::RngStream;
