//! Hierarchical Bayesian optimization (hBOA) over binary strings, with a soft
//! distance-based structural bias harvested from the models of earlier runs.
//!
//! The crate is organized bottom-up:
//!
//! * [`adf`], [`population`] and [`rng`] hold the search primitives: solutions,
//!   additively decomposable objectives, tournament selection and restricted
//!   tournament replacement.
//! * [`problems`] generates and evaluates the benchmark families (3D ±J spin
//!   glasses, minimum vertex cover, morphed graph-coloring MAXSAT) and provides
//!   local search, repair and exact oracles.
//! * [`distance`] derives the variable distance metric from an ADF.
//! * [`model`] learns and samples Bayesian networks with decision-tree local
//!   structures.
//! * [`bias`] turns split statistics of prior models into a structural prior.
//! * [`engine`] is the optimization loop; [`harness`] wraps it in population
//!   sizing, crossvalidation and speedup experiments.

pub mod adf;
pub mod bias;
pub mod distance;
pub mod engine;
mod error;
pub mod harness;
pub mod model;
pub mod population;
pub mod problems;
pub mod rng;

pub use adf::{AdfSpec, Solution, Subfunction};
pub use bias::{BiasMode, BiasTable, SplitStats};
pub use distance::DistanceMatrix;
pub use engine::{HboaConfig, RunResult};
pub use error::{Error, Result};
pub use model::{BayesNet, DecisionTree, ModelDump, ScoreParams};
pub use population::Population;
pub use problems::Problem;
pub use rng::RngStream;
