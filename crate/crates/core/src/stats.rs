//! Statistics used by the analysis layer: standardization, the three
//! correlation coefficients, and polynomial least squares.
//!
//! Conventions pinned here: population (divide-by-N) standard deviation,
//! the tie-free 6*sum(d^2) Spearman shortcut (ties are rejected, not
//! approximated), and Kendall's tau on the comparable-pair denominator
//! C + D with tied pairs excluded from both counts.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {required} points, got {got}")]
    TooFewPoints { required: usize, got: usize },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("ties present; the rank formula requires distinct values")]
    TiesPresent,
    #[error("no comparable pairs")]
    NoComparablePairs,
    #[error("need {required} distinct x values, got {got}")]
    InsufficientPoints { required: usize, got: usize },
    #[error("least-squares system is ill-conditioned (diagnostic {0:.3e})")]
    IllConditioned(f64),
    #[error("series contains a non-finite value")]
    NonFinite,
}

fn check_finite(series: &[f64]) -> Result<(), StatsError> {
    if series.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

fn check_paired(x: &[f64], y: &[f64]) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewPoints {
            required: 2,
            got: x.len(),
        });
    }
    check_finite(x)?;
    check_finite(y)
}

pub fn mean(series: &[f64]) -> f64 {
    series.iter().sum::<f64>() / series.len() as f64
}

/// Population standard deviation (divide by N).
pub fn population_std(series: &[f64]) -> f64 {
    let mu = mean(series);
    (series.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / series.len() as f64).sqrt()
}

/// Maps each value to (x - mean) / population std.
pub fn standardize(series: &[f64]) -> Result<Vec<f64>, StatsError> {
    if series.len() < 2 {
        return Err(StatsError::TooFewPoints {
            required: 2,
            got: series.len(),
        });
    }
    check_finite(series)?;
    let mu = mean(series);
    let sigma = population_std(series);
    if sigma == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(series.iter().map(|v| (v - mu) / sigma).collect())
}

/// Linear correlation, definitional form.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_paired(x, y)?;
    let mx = mean(x);
    let my = mean(y);
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(cov / (vx.sqrt() * vy.sqrt()))
}

/// 1-based ranks of a tie-free series.
pub fn ranks(series: &[f64]) -> Result<Vec<f64>, StatsError> {
    check_finite(series)?;
    let mut order: Vec<usize> = (0..series.len()).collect();
    order.sort_by(|&a, &b| series[a].partial_cmp(&series[b]).expect("finite"));
    for w in order.windows(2) {
        if series[w[0]] == series[w[1]] {
            return Err(StatsError::TiesPresent);
        }
    }
    let mut out = vec![0.0; series.len()];
    for (rank, &idx) in order.iter().enumerate() {
        out[idx] = (rank + 1) as f64;
    }
    Ok(out)
}

/// Rank correlation via the tie-free shortcut 1 - 6*sum(d^2)/(n(n^2-1)).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_paired(x, y)?;
    let rx = ranks(x)?;
    let ry = ranks(y)?;
    let n = x.len() as f64;
    let d2: f64 = rx
        .iter()
        .zip(&ry)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(1.0 - 6.0 * d2 / (n * (n * n - 1.0)))
}

/// (C - D) / (C + D) over concordant/discordant pairs; tied pairs count
/// toward neither.
pub fn kendall(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_paired(x, y)?;
    let mut concordant = 0u64;
    let mut discordant = 0u64;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let p = (x[i] - x[j]) * (y[i] - y[j]);
            if p > 0.0 {
                concordant += 1;
            } else if p < 0.0 {
                discordant += 1;
            }
        }
    }
    let total = concordant + discordant;
    if total == 0 {
        return Err(StatsError::NoComparablePairs);
    }
    Ok((concordant as f64 - discordant as f64) / total as f64)
}

/// Result of a least-squares polynomial fit, coefficients in ascending
/// powers of the original (unscaled) variable.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresFit {
    pub coefficients: Vec<f64>,
    pub sum_squared_residual: f64,
}

/// Degree-`degree` polynomial minimizing the sum of squared residuals.
///
/// x is centered and scaled to [-1, 1] before the solve; the returned
/// coefficients are mapped back to the original variable.
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<LeastSquaresFit, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    check_finite(x)?;
    check_finite(y)?;
    let mut distinct: Vec<f64> = x.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    distinct.dedup();
    if distinct.len() < degree + 1 {
        return Err(StatsError::InsufficientPoints {
            required: degree + 1,
            got: distinct.len(),
        });
    }

    let center = mean(x);
    let half_range = x
        .iter()
        .map(|v| (v - center).abs())
        .fold(0.0f64, f64::max);
    let scale = if half_range > 0.0 { half_range } else { 1.0 };

    let n = x.len();
    let cols = degree + 1;
    let vandermonde = DMatrix::from_fn(n, cols, |i, j| ((x[i] - center) / scale).powi(j as i32));
    let rhs = DVector::from_column_slice(y);

    let svd = vandermonde.clone().svd(true, true);
    let sv = &svd.singular_values;
    let max_sv = sv.iter().cloned().fold(0.0f64, f64::max);
    let min_sv = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let diagnostic = if min_sv > 0.0 { max_sv / min_sv } else { f64::INFINITY };
    if !diagnostic.is_finite() || diagnostic > 1e12 {
        return Err(StatsError::IllConditioned(diagnostic));
    }

    let beta = svd
        .solve(&rhs, 0.0)
        .map_err(|_| StatsError::IllConditioned(diagnostic))?;
    let predicted = vandermonde * &beta;
    let sum_squared_residual = (&rhs - predicted).iter().map(|r| r * r).sum();

    Ok(LeastSquaresFit {
        coefficients: expand_shifted(beta.as_slice(), center, scale),
        sum_squared_residual,
    })
}

/// Rewrites sum_j beta_j ((x - m)/s)^j as coefficients of x^k.
fn expand_shifted(beta: &[f64], m: f64, s: f64) -> Vec<f64> {
    let degree = beta.len() - 1;
    let shift = [-m / s, 1.0 / s];
    let mut out = vec![0.0; degree + 1];
    let mut power = vec![1.0];
    for (j, &b) in beta.iter().enumerate() {
        for (k, &c) in power.iter().enumerate() {
            out[k] += b * c;
        }
        if j < degree {
            power = poly_mul(&power, &shift);
        }
    }
    out
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Evaluates ascending-power coefficients at `x` (Horner).
pub fn eval_poly(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}
