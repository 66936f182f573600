//! Iterative program synthesis for accelerator kernels.
//!
//! A generation agent writes candidate programs, the executor compiles and
//! times them against the framework baseline, and a performance-analysis
//! agent turns profiler evidence into a single recommendation that feeds
//! the next iteration. Every iteration lands in an append-only run log from
//! which the `fast_p` metric family is computed.

pub mod agents;
pub mod backend;
pub mod config;
pub mod digest;
pub mod executor;
pub mod jsonl;
pub mod metrics;
pub mod orchestrator;
pub mod problem;
pub mod profiling;
pub mod prompt;
pub mod sim;
pub mod verify;

pub use backend::{Backend, BaselineKind, DeviceId};
pub use verify::ExecState;
