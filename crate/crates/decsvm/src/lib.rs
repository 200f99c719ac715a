//! Decentralized penalized convoluted support vector machines: smoothed
//! hinge losses, a consensus ADMM engine over simulated peer networks,
//! reference solvers and baselines, and the experiment harness around them.

pub mod admm;
pub mod baselines;
pub mod error;
pub mod evaluate;
pub mod harness;
pub mod ingest;
pub mod linalg;
pub mod netgraph;
pub mod refsolver;
pub mod smoothing;
pub mod synthgen;

pub use admm::{run_decsvm, AdmmConfig, AdmmResult, IterationTrace};
pub use error::{DecsvmError, Result};
pub use netgraph::Topology;
pub use refsolver::{solve_csvm, PenaltySpec, SolveOptions};
pub use smoothing::{bandwidth_default, KernelKind, SmoothedHingeLoss};
pub use synthgen::{sample_shards, LabeledShard, SynthConfig};
