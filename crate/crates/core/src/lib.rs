//! Construction and dissection of the supercritical giant component of G(n, p).
//!
//! The crate provides samplers for G(n, p), Poisson cloning, the
//! Poisson-configuration and Poisson-geometric models and the two
//! contiguous giant-component models, a 2-core / kernel / bush
//! decomposition, the cut-off line algorithm on Poisson λ-cells,
//! observables tied to near-critical structure (2-paths, distances,
//! expansion, mixing) and a replicated experiment harness.
//!
//! Every random operation takes an explicit random stream; see [`stream`].

pub mod analytic;
pub mod cli;
pub mod cola;
pub mod decompose;
pub mod error;
pub mod harness;
pub mod models;
pub mod multigraph;
pub mod observables;
pub mod oracle;
pub mod selftest;
pub mod stats;
pub mod stream;

pub use analytic::{ModelParams, RootedTree};
pub use cola::{ColaResult, LambdaCell};
pub use decompose::CoreDecomposition;
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, ExperimentReport};
pub use models::{ModelKind, ModelSpec};
pub use multigraph::Multigraph;
pub use observables::ObservableRecord;
