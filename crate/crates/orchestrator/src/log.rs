//! Append-only JSONL run log and its replay.
//!
//! Each line is `{"v": 1, "event": <type>, "t": <outer-iter>, "payload":
//! {...}, "ts": <rfc3339>}`. Events are totally ordered by file position;
//! a run's summary is recomputable from the log alone (no lab, no backend).
//! Timestamps are excluded from determinism comparisons.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use helixlab_core::analysis::ExperimentRecord;
use helixlab_core::space::ParameterVector;

use crate::config::RunMode;
use crate::error::ReplayError;
use crate::state::{summarize, RunSummary};

pub const SCHEMA_VERSION: u64 = 1;

/// Default log file name inside a run's output directory.
pub const LOG_FILE: &str = "run_log.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    RunStart,
    GoalClarified,
    ConstraintsClarified,
    QueryBuilt,
    Literature,
    Hypothesis,
    Variables,
    Evaluation,
    Analysis,
    Report,
    RunEnd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLine {
    pub v: u64,
    pub event: EventKind,
    pub t: u32,
    pub payload: Value,
    pub ts: String,
}

/// Payload of every `evaluation` event (same shape as trace JSONL lines).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationEvent {
    pub step: u64,
    pub parameters: ParameterVector,
    pub g_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStartEvent {
    pub mode: RunMode,
    pub seed: u64,
    pub outer_iterations: u32,
    pub total_budget: u64,
    pub goal: String,
    pub constraints: String,
}

pub struct RunLogWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl RunLogWriter {
    pub fn create(path: &Path) -> std::io::Result<Self> {
        Ok(Self {
            path: path.to_path_buf(),
            out: BufWriter::new(File::create(path)?),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends one event and flushes, so the log is intact up to the last
    /// completed step even if the run aborts.
    pub fn append<P: Serialize>(
        &mut self,
        event: EventKind,
        t: u32,
        payload: &P,
    ) -> std::io::Result<()> {
        let line = LogLine {
            v: SCHEMA_VERSION,
            event,
            t,
            payload: serde_json::to_value(payload).expect("payload serializes"),
            ts: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true),
        };
        serde_json::to_writer(&mut self.out, &line)?;
        self.out.write_all(b"\n")?;
        self.out.flush()
    }
}

/// Parses a complete log. Any unreadable line is reported as truncation;
/// a schema bump is reported as a version mismatch.
pub fn read_log(path: &Path) -> Result<Vec<LogLine>, ReplayError> {
    let file = File::open(path)
        .map_err(|e| ReplayError::TruncatedLog(format!("{}: {e}", path.display())))?;
    let mut lines = Vec::new();
    for (index, line) in BufReader::new(file).lines().enumerate() {
        let line =
            line.map_err(|e| ReplayError::TruncatedLog(format!("line {}: {e}", index + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        // check the version before insisting on the full schema
        let raw: Value = serde_json::from_str(&line)
            .map_err(|e| ReplayError::TruncatedLog(format!("line {}: {e}", index + 1)))?;
        let version = raw.get("v").and_then(Value::as_u64).unwrap_or(0);
        if version != SCHEMA_VERSION {
            return Err(ReplayError::SchemaVersionMismatch {
                found: version,
                expected: SCHEMA_VERSION,
            });
        }
        let parsed: LogLine = serde_json::from_value(raw)
            .map_err(|e| ReplayError::TruncatedLog(format!("line {}: {e}", index + 1)))?;
        lines.push(parsed);
    }
    if lines.is_empty() {
        return Err(ReplayError::TruncatedLog("log has no events".into()));
    }
    Ok(lines)
}

/// Recomputes the run summary purely from logged events. The log must be
/// complete (run_start first, run_end present).
pub fn replay(path: &Path) -> Result<RunSummary, ReplayError> {
    let lines = read_log(path)?;
    let first = &lines[0];
    if first.event != EventKind::RunStart {
        return Err(ReplayError::TruncatedLog(
            "log does not begin with run_start".into(),
        ));
    }
    let start: RunStartEvent = serde_json::from_value(first.payload.clone())
        .map_err(|e| ReplayError::TruncatedLog(format!("run_start payload: {e}")))?;
    if lines.iter().all(|l| l.event != EventKind::RunEnd) {
        return Err(ReplayError::TruncatedLog("log has no run_end event".into()));
    }

    let mut history: Vec<ExperimentRecord> = Vec::new();
    for line in &lines {
        if line.event == EventKind::Evaluation {
            let event: EvaluationEvent = serde_json::from_value(line.payload.clone())
                .map_err(|e| ReplayError::TruncatedLog(format!("evaluation payload: {e}")))?;
            history.push(ExperimentRecord {
                params: event.parameters,
                g_factor: event.g_factor,
                outer_iteration: line.t,
                step: event.step,
            });
        }
    }
    summarize(start.mode, start.seed, &history)
        .ok_or_else(|| ReplayError::TruncatedLog("log has no evaluation events".into()))
}

/// The summary stored in the run_end event, when present.
pub fn stored_summary(lines: &[LogLine]) -> Option<RunSummary> {
    lines
        .iter()
        .rev()
        .find(|l| l.event == EventKind::RunEnd)
        .and_then(|l| serde_json::from_value(l.payload.clone()).ok())
}
