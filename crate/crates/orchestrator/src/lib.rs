//! Orchestration of the discovery loop: run configs, the three run modes,
//! append-only JSONL run logs with replay, and cross-run comparison.

pub mod compare;
pub mod config;
pub mod error;
pub mod log;
pub mod run;
pub mod state;

pub use compare::{compare_runs, to_csv, to_table, CompareError, ComparisonRow};
pub use config::{LabConfig, RunConfig, RunMode, DEFAULT_CONSTRAINTS, DEFAULT_GOAL};
pub use error::{ReplayError, RunError};
pub use log::{read_log, replay, stored_summary, EventKind, LogLine, LOG_FILE};
pub use run::{execute, execute_with_transcript, run_prim, run_vanilla_agent, run_vanilla_mas};
pub use state::{LoopState, RunSummary};
