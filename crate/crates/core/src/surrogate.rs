//! Synthetic g-factor surrogate standing in for a trained structure-property
//! model: a fixed analytic function over the normalized nanohelix coordinates
//! with a single dominant optimum, a weaker decoy optimum, and a ripple that
//! couples helix radius and pitch so the landscape is not dimension-separable.
//!
//! The function is pure; optional Gaussian noise is derived deterministically
//! from the configured seed and the evaluated point.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::{default_nanohelix_space, ParameterSpace, ParameterVector, SpaceError};

/// Weight and center (normalized coordinates, dims in space order) of the
/// dominant optimum.
const PRIMARY_WEIGHT: f64 = 1.05;
const PRIMARY_CENTER: [f64; 9] = [0.35, 0.60, 0.25, 0.45, 0.19, 0.50, 0.70, 0.40, 0.55];

/// Weaker decoy optimum that punishes purely greedy descent.
const DECOY_WEIGHT: f64 = 0.60;
const DECOY_CENTER: [f64; 9] = [0.80, 0.20, 0.75, 0.80, 0.85, 0.25, 0.20, 0.75, 0.15];

const FALLOFF: f64 = 3.0;
const RIPPLE_AMPLITUDE: f64 = 0.02;
const RIPPLE_CYCLES: f64 = 6.0 * PI;
const BASELINE: f64 = 0.02;

/// Index of helix_radius / pitch in the space's dim order.
const HELIX_RADIUS: usize = 4;
const PITCH: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateConfig {
    /// Standard deviation of additive Gaussian noise; 0 disables noise.
    pub noise_stddev: f64,
    /// Only consulted when `noise_stddev > 0`.
    pub seed: u64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            noise_stddev: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropertyValue {
    pub g_factor: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurrogateError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("surrogate produced a non-finite value")]
    NonFinite,
    #[error("noise standard deviation must be nonnegative, got {0}")]
    NegativeNoise(f64),
}

/// The virtual laboratory's property model, bound to its governing space.
#[derive(Debug, Clone)]
pub struct Surrogate {
    space: ParameterSpace,
    config: SurrogateConfig,
}

impl Surrogate {
    pub fn new(config: SurrogateConfig) -> Result<Self, SurrogateError> {
        if config.noise_stddev < 0.0 {
            return Err(SurrogateError::NegativeNoise(config.noise_stddev));
        }
        Ok(Self {
            space: default_nanohelix_space(),
            config,
        })
    }

    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    pub fn config(&self) -> &SurrogateConfig {
        &self.config
    }

    /// Validates `vec` against the nanohelix space (all nine dims required)
    /// and evaluates the g-factor.
    pub fn evaluate(&self, vec: &ParameterVector) -> Result<PropertyValue, SurrogateError> {
        self.space.require_complete(vec)?;
        let mut u = [0.0f64; 9];
        for (i, dim) in self.space.dims().iter().enumerate() {
            let x = vec.get(&dim.name).expect("completeness checked");
            u[i] = (x - dim.lower) / (dim.upper - dim.lower);
        }
        let mut g = g_of_normalized(&u);
        if self.config.noise_stddev > 0.0 {
            g += self.config.noise_stddev * deterministic_standard_normal(self.config.seed, vec);
        }
        if !g.is_finite() {
            return Err(SurrogateError::NonFinite);
        }
        Ok(PropertyValue { g_factor: g })
    }
}

/// Analytic g-factor on normalized `[0,1]^9` coordinates, dims in space order.
/// Exposed for grid-search oracles; no validation or noise.
pub fn g_of_normalized(u: &[f64; 9]) -> f64 {
    let mut primary = 0.0;
    let mut decoy = 0.0;
    for d in 0..9 {
        let dp = u[d] - PRIMARY_CENTER[d];
        let dd = u[d] - DECOY_CENTER[d];
        primary += dp * dp;
        decoy += dd * dd;
    }
    PRIMARY_WEIGHT * (-FALLOFF * primary).exp()
        + DECOY_WEIGHT * (-FALLOFF * decoy).exp()
        + RIPPLE_AMPLITUDE * (RIPPLE_CYCLES * u[HELIX_RADIUS]).sin() * (RIPPLE_CYCLES * u[PITCH]).cos()
        + BASELINE
}

/// Spec'd operation form: validate against the default space and evaluate.
pub fn evaluate_g_factor(
    vec: &ParameterVector,
    config: &SurrogateConfig,
) -> Result<PropertyValue, SurrogateError> {
    Surrogate::new(config.clone())?.evaluate(vec)
}

/// One standard-normal draw fully determined by `(seed, vec)`.
fn deterministic_standard_normal(seed: u64, vec: &ParameterVector) -> f64 {
    // FNV-1a over the canonical JSON form; stable across platforms and runs.
    let canonical = serde_json::to_string(vec).expect("vector serializes");
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in canonical.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ hash);
    // Box-Muller; u1 in (0, 1] so the log is finite.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}
