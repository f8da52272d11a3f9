//! Deterministic discrete-event execution of one configured run.

mod config;
mod harness;
mod trace;

pub use config::{ConfigError, ExecutionConfig};
pub use harness::{run, SimError};
pub use trace::{ExecutionTrace, TraceError, TraceEvent, TraceHeader, TraceRecord};
