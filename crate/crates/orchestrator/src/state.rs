//! Loop state and the final run summary.

use serde::{Deserialize, Serialize};

use helixlab_agents::{Hypothesis, LiteratureInsights, ResearchConstraints, ResearchGoal};
use helixlab_core::analysis::{critical_value, ExperimentRecord};
use helixlab_core::space::ParameterVector;

use crate::config::RunMode;

/// Mutable state of one discovery run, carried across outer iterations.
#[derive(Debug, Clone)]
pub struct LoopState {
    pub t: u32,
    pub goal: ResearchGoal,
    pub constraints: ResearchConstraints,
    pub insights: Option<LiteratureInsights>,
    pub hypothesis: Option<Hypothesis>,
    pub history: Vec<ExperimentRecord>,
    pub reports: Vec<String>,
    pub best: Option<(ParameterVector, f64)>,
}

impl LoopState {
    pub fn new(goal: ResearchGoal, constraints: ResearchConstraints) -> Self {
        Self {
            t: 0,
            goal,
            constraints,
            insights: None,
            hypothesis: None,
            history: Vec::new(),
            reports: Vec::new(),
            best: None,
        }
    }

    /// Appends records and re-derives `best` so it always equals the
    /// critical value over history.
    pub fn record(&mut self, records: impl IntoIterator<Item = ExperimentRecord>) {
        self.history.extend(records);
        self.best = critical_value(&self.history).ok();
    }
}

/// Final metrics of a run; serialized as `summary.json` and embedded in the
/// run_end event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mode: RunMode,
    pub optimal_value: f64,
    pub optimal_params: ParameterVector,
    /// `None` when fewer than two evaluations were made.
    pub exploration_rate: Option<f64>,
    pub total_evaluations: u64,
    /// Global evaluation index (0-based) of the first maximum.
    pub best_step: u64,
    pub per_iteration_best: Vec<f64>,
    pub seed: u64,
}

impl RunSummary {
    /// The one-line form printed by the CLI.
    pub fn summary_line(&self) -> String {
        format!(
            "mode={} mu={} eps={} evals={} best_step={}",
            self.mode.as_str(),
            self.optimal_value,
            self.exploration_rate
                .map_or_else(|| "n/a".to_string(), |e| e.to_string()),
            self.total_evaluations,
            self.best_step
        )
    }
}

/// Builds the summary from the full evaluation history.
pub fn summarize(
    mode: RunMode,
    seed: u64,
    history: &[ExperimentRecord],
) -> Option<RunSummary> {
    if history.is_empty() {
        return None;
    }
    let (optimal_params, optimal_value) = critical_value(history).ok()?;
    let best_step = history
        .iter()
        .find(|r| r.g_factor == optimal_value)
        .map(|r| r.step)?;
    let conditions: Vec<ParameterVector> = history.iter().map(|r| r.params.clone()).collect();
    let exploration_rate = helixlab_core::analysis::exploration_rate(&conditions).ok();
    let mut per_iteration_best = Vec::new();
    let mut iterations: Vec<u32> = history.iter().map(|r| r.outer_iteration).collect();
    iterations.sort_unstable();
    iterations.dedup();
    for t in iterations {
        let best = history
            .iter()
            .filter(|r| r.outer_iteration == t)
            .map(|r| r.g_factor)
            .fold(f64::NEG_INFINITY, f64::max);
        per_iteration_best.push(best);
    }
    Some(RunSummary {
        mode,
        optimal_value,
        optimal_params,
        exploration_rate,
        total_evaluations: history.len() as u64,
        best_step,
        per_iteration_best,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: u32, step: u64, g: f64) -> ExperimentRecord {
        ExperimentRecord {
            params: ParameterVector::from_pairs([("x", step as f64)]),
            g_factor: g,
            outer_iteration: t,
            step,
        }
    }

    #[test]
    fn best_tracks_critical_value() {
        let goal = ResearchGoal::new("g");
        let constraints = ResearchConstraints::new("c");
        let mut state = LoopState::new(goal, constraints);
        state.record([record(1, 0, 0.2), record(1, 1, 0.9)]);
        assert_eq!(state.best.as_ref().unwrap().1, 0.9);
        state.record([record(2, 2, 0.5)]);
        assert_eq!(state.best.as_ref().unwrap().1, 0.9);
        state.record([record(2, 3, 0.95)]);
        assert_eq!(state.best.as_ref().unwrap().1, 0.95);
    }

    #[test]
    fn summary_reports_first_maximum_and_per_iteration_bests() {
        let history = vec![
            record(1, 0, 0.2),
            record(1, 1, 0.9),
            record(2, 2, 0.9),
            record(2, 3, 0.4),
        ];
        let summary = summarize(RunMode::Prim, 7, &history).unwrap();
        assert_eq!(summary.optimal_value, 0.9);
        assert_eq!(summary.best_step, 1);
        assert_eq!(summary.per_iteration_best, vec![0.9, 0.9]);
        assert_eq!(summary.total_evaluations, 4);
        assert!(summary.exploration_rate.is_some());
        assert_eq!(summary.seed, 7);
    }

    #[test]
    fn single_evaluation_has_no_exploration_rate() {
        let summary = summarize(RunMode::VanillaAgent, 0, &[record(1, 0, 0.5)]).unwrap();
        assert_eq!(summary.exploration_rate, None);
        assert!(summary.summary_line().contains("eps=n/a"));
    }
}
