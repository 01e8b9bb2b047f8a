//! Aggregation of run summaries into a comparison table grouped by mode.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::RunMode;
use crate::state::RunSummary;

#[derive(Debug, Error, PartialEq)]
pub enum CompareError {
    #[error("no summaries to compare")]
    EmptyGroup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub mode: RunMode,
    pub runs: usize,
    pub mu_mean: f64,
    pub mu_std: f64,
    /// `None` when no run in the group had a defined exploration rate.
    pub eps_mean: Option<f64>,
    pub eps_std: Option<f64>,
    pub evals_mean: f64,
    pub best_step_mean: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-mode mean and population std of the headline metrics.
pub fn compare_runs(summaries: &[RunSummary]) -> Result<Vec<ComparisonRow>, CompareError> {
    if summaries.is_empty() {
        return Err(CompareError::EmptyGroup);
    }
    let mut groups: BTreeMap<RunMode, Vec<&RunSummary>> = BTreeMap::new();
    for summary in summaries {
        groups.entry(summary.mode).or_default().push(summary);
    }
    let mut rows = Vec::new();
    for (mode, group) in groups {
        let mu: Vec<f64> = group.iter().map(|s| s.optimal_value).collect();
        let eps: Vec<f64> = group.iter().filter_map(|s| s.exploration_rate).collect();
        let evals: Vec<f64> = group.iter().map(|s| s.total_evaluations as f64).collect();
        let steps: Vec<f64> = group.iter().map(|s| s.best_step as f64).collect();
        let (mu_mean, mu_std) = mean_std(&mu);
        let (eps_mean, eps_std) = if eps.is_empty() {
            (None, None)
        } else {
            let (m, s) = mean_std(&eps);
            (Some(m), Some(s))
        };
        rows.push(ComparisonRow {
            mode,
            runs: group.len(),
            mu_mean,
            mu_std,
            eps_mean,
            eps_std,
            evals_mean: mean_std(&evals).0,
            best_step_mean: mean_std(&steps).0,
        });
    }
    Ok(rows)
}

/// Stable-ordered CSV: fixed columns, period decimals, one row per mode.
pub fn to_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("mode,mu_mean,mu_std,eps_mean,eps_std,evals_mean,best_step_mean\n");
    for row in rows {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| x.to_string());
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.mode.as_str(),
            row.mu_mean,
            row.mu_std,
            opt(row.eps_mean),
            opt(row.eps_std),
            row.evals_mean,
            row.best_step_mean
        ));
    }
    out
}

/// Aligned text table for terminal output.
pub fn to_table(rows: &[ComparisonRow]) -> String {
    let mut out = format!(
        "{:<14} {:>5} {:>18} {:>20} {:>12} {:>15}\n",
        "mode", "runs", "mu (mean+/-std)", "eps (mean+/-std)", "evals_mean", "best_step_mean"
    );
    for row in rows {
        let eps = match (row.eps_mean, row.eps_std) {
            (Some(m), Some(s)) => format!("{m:.4} +/- {s:.4}"),
            _ => "n/a".to_string(),
        };
        out.push_str(&format!(
            "{:<14} {:>5} {:>12.4} +/- {:.4} {:>20} {:>12.1} {:>15.1}\n",
            row.mode.as_str(),
            row.runs,
            row.mu_mean,
            row.mu_std,
            eps,
            row.evals_mean,
            row.best_step_mean
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use helixlab_core::space::ParameterVector;

    fn summary(mode: RunMode, mu: f64, eps: Option<f64>, best_step: u64) -> RunSummary {
        RunSummary {
            mode,
            optimal_value: mu,
            optimal_params: ParameterVector::from_pairs([("x", 1.0)]),
            exploration_rate: eps,
            total_evaluations: 100,
            best_step,
            per_iteration_best: vec![mu],
            seed: 0,
        }
    }

    #[test]
    fn groups_by_mode_with_population_std() {
        let summaries = vec![
            summary(RunMode::Prim, 1.0, Some(50.0), 10),
            summary(RunMode::Prim, 0.8, Some(40.0), 20),
            summary(RunMode::VanillaAgent, 0.6, Some(200.0), 30),
        ];
        let rows = compare_runs(&summaries).unwrap();
        assert_eq!(rows.len(), 2);
        let prim = rows.iter().find(|r| r.mode == RunMode::Prim).unwrap();
        assert_eq!(prim.runs, 2);
        assert!((prim.mu_mean - 0.9).abs() < 1e-12);
        // population std of {1.0, 0.8} is 0.1
        assert!((prim.mu_std - 0.1).abs() < 1e-12);
        assert!((prim.eps_mean.unwrap() - 45.0).abs() < 1e-12);
        assert!((prim.best_step_mean - 15.0).abs() < 1e-12);
    }

    #[test]
    fn single_run_groups_have_zero_std() {
        let rows = compare_runs(&[summary(RunMode::VanillaMas, 0.9, Some(260.0), 50)]).unwrap();
        assert_eq!(rows[0].mu_std, 0.0);
        assert_eq!(rows[0].eps_std, Some(0.0));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert_eq!(compare_runs(&[]), Err(CompareError::EmptyGroup));
    }

    #[test]
    fn csv_has_fixed_columns_and_stable_order() {
        let summaries = vec![
            summary(RunMode::VanillaMas, 0.9, Some(260.0), 50),
            summary(RunMode::Prim, 1.0, Some(50.0), 10),
        ];
        let csv = to_csv(&compare_runs(&summaries).unwrap());
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "mode,mu_mean,mu_std,eps_mean,eps_std,evals_mean,best_step_mean"
        );
        // BTreeMap ordering: prim before vanilla_mas
        assert!(lines.next().unwrap().starts_with("prim,"));
        assert!(lines.next().unwrap().starts_with("vanilla_mas,"));
    }
}
