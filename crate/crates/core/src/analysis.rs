//! Converts evaluated experiment records into structured analysis data:
//! per-variable correlations and polynomial fits of the g-factor, the
//! critical (best-observed) value, and the exploration-rate metric.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::{distance, ParameterVector, SpaceError};
use crate::stats::{self, StatsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("no experiment records")]
    EmptyRecords,
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// One evaluated experimental condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub params: ParameterVector,
    pub g_factor: f64,
    /// Outer loop iteration that produced this record (1-based).
    pub outer_iteration: u32,
    /// Global evaluation index within the run (0-based).
    pub step: u64,
}

/// The three correlation coefficients of one variable against the g-factor.
/// A coefficient is `None` when its preconditions fail (e.g. Spearman on
/// tied ranks); the reason lands in [`VariableSkip`] notes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub variable: String,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub kendall: Option<f64>,
}

/// A variable (or one of its analyses) that had to be skipped, with why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSkip {
    pub variable: String,
    pub analysis: String,
    pub reason: String,
}

/// Least-squares fit of g against one variable, ascending coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyFit {
    pub variable: String,
    pub degree: usize,
    pub coefficients: Vec<f64>,
    pub sum_squared_residual: f64,
}

/// Structured output of [`analyze`], embedded in run logs and rendered into
/// the research report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReportData {
    pub correlations: Vec<CorrelationResult>,
    pub fits: Vec<PolyFit>,
    pub skipped: Vec<VariableSkip>,
    pub critical_params: ParameterVector,
    pub critical_value: f64,
    /// `None` when fewer than two records exist (the metric is undefined).
    pub exploration_rate: Option<f64>,
    pub record_count: usize,
}

/// Params and value of the maximum observed g-factor; ties resolve to the
/// earliest step.
pub fn critical_value(records: &[ExperimentRecord]) -> Result<(ParameterVector, f64), AnalysisError> {
    let best = records
        .iter()
        .min_by(|a, b| {
            b.g_factor
                .partial_cmp(&a.g_factor)
                .expect("finite g-factors")
                .then(a.step.cmp(&b.step))
        })
        .ok_or(AnalysisError::EmptyRecords)?;
    Ok((best.params.clone(), best.g_factor))
}

/// Mean pairwise Euclidean distance over ordered pairs:
/// (1 / (N(N-1))) * sum_{i != j} ||x_i - x_j||.
pub fn exploration_rate(conditions: &[ParameterVector]) -> Result<f64, AnalysisError> {
    let n = conditions.len();
    if n < 2 {
        return Err(AnalysisError::TooFewPoints(n));
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += distance(&conditions[i], &conditions[j])?;
        }
    }
    Ok(2.0 * sum / (n as f64 * (n - 1) as f64))
}

/// Exploration rate after z-scoring each dimension across the set, for
/// cross-space comparability. Dimensions constant across the set carry no
/// information and are dropped.
pub fn exploration_rate_standardized(
    conditions: &[ParameterVector],
) -> Result<f64, AnalysisError> {
    let n = conditions.len();
    if n < 2 {
        return Err(AnalysisError::TooFewPoints(n));
    }
    let names: Vec<String> = conditions[0].names().map(str::to_string).collect();
    let mut standardized = vec![ParameterVector::new(); n];
    for name in &names {
        let series: Vec<f64> = conditions
            .iter()
            .map(|c| {
                c.get(name)
                    .ok_or_else(|| SpaceError::DimensionMismatch(name.clone()))
            })
            .collect::<Result<_, _>>()?;
        match stats::standardize(&series) {
            Ok(z) => {
                for (vec, value) in standardized.iter_mut().zip(z) {
                    vec.set(name, value);
                }
            }
            Err(StatsError::ZeroVariance) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    // all-constant sets have zero spread by definition
    if standardized[0].is_empty() {
        return Ok(0.0);
    }
    exploration_rate(&standardized)
}

/// Runs the full toolkit over `records` for the named variables. Variables
/// whose preconditions fail are flagged in `skipped`, never an error.
pub fn analyze(
    records: &[ExperimentRecord],
    variables: &[String],
    fit_degree: usize,
) -> Result<AnalysisReportData, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::EmptyRecords);
    }
    let g: Vec<f64> = records.iter().map(|r| r.g_factor).collect();

    let mut seen = Vec::new();
    let mut correlations = Vec::new();
    let mut fits = Vec::new();
    let mut skipped = Vec::new();

    for variable in variables {
        if seen.contains(variable) {
            continue;
        }
        seen.push(variable.clone());

        let series: Option<Vec<f64>> = records
            .iter()
            .map(|r| r.params.get(variable))
            .collect();
        let Some(series) = series else {
            skipped.push(VariableSkip {
                variable: variable.clone(),
                analysis: "all".into(),
                reason: "variable missing from one or more records".into(),
            });
            continue;
        };

        let mut note = |analysis: &str, err: StatsError| {
            skipped.push(VariableSkip {
                variable: variable.clone(),
                analysis: analysis.into(),
                reason: err.to_string(),
            });
        };

        let pearson = match stats::pearson(&series, &g) {
            Ok(v) => Some(v),
            Err(e) => {
                note("pearson", e);
                None
            }
        };
        let spearman = match stats::spearman(&series, &g) {
            Ok(v) => Some(v),
            Err(e) => {
                note("spearman", e);
                None
            }
        };
        let kendall = match stats::kendall(&series, &g) {
            Ok(v) => Some(v),
            Err(e) => {
                note("kendall", e);
                None
            }
        };
        if pearson.is_some() || spearman.is_some() || kendall.is_some() {
            correlations.push(CorrelationResult {
                variable: variable.clone(),
                pearson,
                spearman,
                kendall,
            });
        }

        match stats::polyfit(&series, &g, fit_degree) {
            Ok(fit) => fits.push(PolyFit {
                variable: variable.clone(),
                degree: fit_degree,
                coefficients: fit.coefficients,
                sum_squared_residual: fit.sum_squared_residual,
            }),
            Err(e) => note("polyfit", e),
        }
    }

    let (critical_params, critical) = critical_value(records)?;
    let conditions: Vec<ParameterVector> = records.iter().map(|r| r.params.clone()).collect();
    let exploration = match exploration_rate(&conditions) {
        Ok(v) => Some(v),
        Err(AnalysisError::TooFewPoints(_)) => None,
        Err(e) => return Err(e),
    };

    Ok(AnalysisReportData {
        correlations,
        fits,
        skipped,
        critical_params,
        critical_value: critical,
        exploration_rate: exploration,
        record_count: records.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::default_nanohelix_space;

    fn record(step: u64, params: ParameterVector, g: f64) -> ExperimentRecord {
        ExperimentRecord {
            params,
            g_factor: g,
            outer_iteration: 1,
            step,
        }
    }

    fn point(x: f64, y: f64) -> ParameterVector {
        ParameterVector::from_pairs([("x", x), ("y", y)])
    }

    #[test]
    fn critical_value_picks_maximum() {
        let records = vec![
            record(0, point(0.0, 0.0), 0.2),
            record(1, point(1.0, 0.0), 0.9),
            record(2, point(2.0, 0.0), 0.5),
        ];
        let (params, g) = critical_value(&records).unwrap();
        assert_eq!(g, 0.9);
        assert_eq!(params, point(1.0, 0.0));
    }

    #[test]
    fn critical_value_tie_breaks_on_earliest_step() {
        let records = vec![
            record(7, point(9.0, 9.0), 0.9),
            record(3, point(1.0, 1.0), 0.9),
            record(5, point(5.0, 5.0), 0.1),
        ];
        let (params, _) = critical_value(&records).unwrap();
        assert_eq!(params, point(1.0, 1.0));
    }

    #[test]
    fn critical_value_rejects_empty() {
        assert!(matches!(
            critical_value(&[]),
            Err(AnalysisError::EmptyRecords)
        ));
    }

    #[test]
    fn exploration_rate_two_point_case() {
        let conditions = vec![point(0.0, 0.0), point(3.0, 4.0)];
        assert_eq!(exploration_rate(&conditions).unwrap(), 5.0);
    }

    #[test]
    fn exploration_rate_needs_two_points() {
        assert!(matches!(
            exploration_rate(&[point(1.0, 1.0)]),
            Err(AnalysisError::TooFewPoints(1))
        ));
        assert!(matches!(
            exploration_rate(&[]),
            Err(AnalysisError::TooFewPoints(0))
        ));
    }

    #[test]
    fn exploration_rate_matches_brute_force_on_random_sets() {
        use rand::SeedableRng;
        let space = default_nanohelix_space();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let conditions: Vec<ParameterVector> =
            (0..7).map(|_| space.sample_uniform(&mut rng)).collect();
        // independent O(N^2) double loop over ordered pairs
        let n = conditions.len();
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    sum += distance(&conditions[i], &conditions[j]).unwrap();
                }
            }
        }
        let oracle = sum / (n as f64 * (n - 1) as f64);
        let got = exploration_rate(&conditions).unwrap();
        assert!((got - oracle).abs() < 1e-9);
    }

    #[test]
    fn standardized_rate_drops_constant_dims() {
        let conditions = vec![
            ParameterVector::from_pairs([("a", 1.0), ("b", 5.0)]),
            ParameterVector::from_pairs([("a", 2.0), ("b", 5.0)]),
            ParameterVector::from_pairs([("a", 3.0), ("b", 5.0)]),
        ];
        let eps = exploration_rate_standardized(&conditions).unwrap();
        assert!(eps > 0.0);
        let all_constant = vec![
            ParameterVector::from_pairs([("a", 5.0)]),
            ParameterVector::from_pairs([("a", 5.0)]),
        ];
        assert_eq!(exploration_rate_standardized(&all_constant).unwrap(), 0.0);
    }

    #[test]
    fn analyze_flags_constant_variables() {
        let records: Vec<ExperimentRecord> = (0..6)
            .map(|i| {
                record(
                    i,
                    ParameterVector::from_pairs([
                        ("helix_radius", 20.0 + 10.0 * i as f64),
                        ("pitch", 100.0),
                    ]),
                    0.1 * i as f64,
                )
            })
            .collect();
        let vars = vec!["helix_radius".to_string(), "pitch".to_string()];
        let report = analyze(&records, &vars, 2).unwrap();
        assert_eq!(report.correlations.len(), 1);
        assert_eq!(report.correlations[0].variable, "helix_radius");
        assert!(report
            .skipped
            .iter()
            .any(|s| s.variable == "pitch" && s.analysis == "pearson"));
        assert_eq!(report.record_count, 6);
    }

    #[test]
    fn analyze_single_record_flags_undefined_metrics() {
        let records = vec![record(0, point(1.0, 2.0), 0.7)];
        let report = analyze(&records, &["x".to_string()], 2).unwrap();
        assert_eq!(report.critical_value, 0.7);
        assert!(report.exploration_rate.is_none());
        assert!(report.correlations.is_empty());
        assert!(!report.skipped.is_empty());
    }

    #[test]
    fn analyze_detects_monotone_relationship() {
        let records: Vec<ExperimentRecord> = (0..8)
            .map(|i| {
                let v = i as f64;
                record(
                    i,
                    ParameterVector::from_pairs([("x", v)]),
                    (0.2 * v).exp(), // strictly increasing, nonlinear
                )
            })
            .collect();
        let report = analyze(&records, &["x".to_string()], 2).unwrap();
        assert_eq!(report.correlations[0].spearman, Some(1.0));
        assert_eq!(report.correlations[0].kendall, Some(1.0));
    }

    #[test]
    fn analyze_rejects_empty_records() {
        assert!(matches!(
            analyze(&[], &[], 2),
            Err(AnalysisError::EmptyRecords)
        ));
    }
}
