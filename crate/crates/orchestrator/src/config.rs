//! Run configuration, read from a JSON file with the same field names.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use helixlab_agents::{LLMBackendConfig, LiteratureSource};
use helixlab_core::optimizer::MCTSConfig;
use helixlab_core::surrogate::SurrogateConfig;

use crate::error::RunError;

/// The research goal posed to the system when a config does not override it.
pub const DEFAULT_GOAL: &str = "Find the structural parameters corresponding to the strongest \
                                chirality (g-factor characteristics) in the nanohelix material \
                                system.";

/// Default companion constraints to the goal.
pub const DEFAULT_CONSTRAINTS: &str = "Explicitly show the underlying physicochemical principles \
                                       regarding the structure and property relationships.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Prim,
    VanillaAgent,
    VanillaMas,
}

impl RunMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Prim => "prim",
            Self::VanillaAgent => "vanilla_agent",
            Self::VanillaMas => "vanilla_mas",
        }
    }
}

impl std::str::FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "prim" => Ok(Self::Prim),
            "vanilla_agent" => Ok(Self::VanillaAgent),
            "vanilla_mas" => Ok(Self::VanillaMas),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// Where surrogate evaluations come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabConfig {
    InProcess {
        #[serde(default)]
        surrogate: SurrogateConfig,
    },
    Endpoint { url: String },
}

impl Default for LabConfig {
    fn default() -> Self {
        Self::InProcess {
            surrogate: SurrogateConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: RunMode,
    #[serde(default = "default_goal")]
    pub goal: String,
    #[serde(default = "default_constraints")]
    pub constraints: String,
    #[serde(default = "default_outer_iterations")]
    pub outer_iterations: u32,
    /// `mcts.iterations` is the total surrogate budget for the whole run,
    /// divided across outer iterations; `mcts.seed` is ignored (per-
    /// iteration seeds derive from `seed`).
    #[serde(default)]
    pub mcts: MCTSConfig,
    #[serde(default)]
    pub lab: LabConfig,
    /// Required for prim and vanilla_mas; ignored by vanilla_agent.
    #[serde(default)]
    pub backend: Option<LLMBackendConfig>,
    /// Required for prim and vanilla_mas; ignored by vanilla_agent.
    #[serde(default)]
    pub literature_source: Option<LiteratureSource>,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
}

fn default_goal() -> String {
    DEFAULT_GOAL.to_string()
}

fn default_constraints() -> String {
    DEFAULT_CONSTRAINTS.to_string()
}

fn default_outer_iterations() -> u32 {
    8
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!(
            "cannot read {}: {e}",
            path.display()
        )))?;
        let config: Self = serde_json::from_str(&text)
            .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.outer_iterations == 0 {
            return Err(RunError::Config("outer_iterations must be positive".into()));
        }
        if self.mcts.iterations == 0 {
            return Err(RunError::Config("mcts.iterations must be positive".into()));
        }
        if self.goal.trim().is_empty() || self.constraints.trim().is_empty() {
            return Err(RunError::Config("goal and constraints must be nonempty".into()));
        }
        if matches!(self.mode, RunMode::Prim | RunMode::VanillaMas) {
            if self.backend.is_none() {
                return Err(RunError::Config(format!(
                    "mode {} requires a backend",
                    self.mode.as_str()
                )));
            }
            if self.literature_source.is_none() {
                return Err(RunError::Config(format!(
                    "mode {} requires a literature_source",
                    self.mode.as_str()
                )));
            }
        }
        if matches!(self.mode, RunMode::Prim | RunMode::VanillaMas)
            && (self.mcts.iterations as u32) < self.outer_iterations
        {
            return Err(RunError::Config(
                "total MCTS budget is smaller than the number of outer iterations".into(),
            ));
        }
        Ok(())
    }
}

/// Even split of the total budget, remainder going to the earliest
/// iterations.
pub fn budget_shares(total: usize, iterations: u32) -> Vec<usize> {
    let n = iterations as usize;
    let base = total / n;
    let remainder = total % n;
    (0..n).map(|i| base + usize::from(i < remainder)).collect()
}

/// Per-iteration search seed derived from the master seed (splitmix-style
/// mixing so adjacent iterations decorrelate).
pub fn derive_seed(master: u64, outer_iteration: u32) -> u64 {
    let mut z = master
        .wrapping_add(u64::from(outer_iteration).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
