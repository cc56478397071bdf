//! Surrogate modelling of rugged landscapes.
//!
//! Candidate surrogates are stack-machine programs evolved by linear genetic
//! programming. Each candidate is scored by minimising it with a fuzzy
//! self-tuning particle swarm, evaluating the original landscape at the
//! argminimum found, and adding the RMSE between the two functions over a
//! fixed uniform sample.

pub mod benchmarks;
pub mod error;
pub mod fstpso;
pub mod harness;
pub mod par;
pub mod stackgp;
pub mod surrogate;

pub use benchmarks::{BenchmarkFunction, Bounds, FunctionKind, Landscape};
pub use error::{Error, Result};
pub use par::Execution;
pub use stackgp::{Instruction, Program};
