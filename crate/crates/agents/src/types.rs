//! Language artifacts passed between the agents and the orchestrator.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResearchGoal {
    pub raw: String,
    pub clarified: Option<String>,
}

impl ResearchGoal {
    pub fn new(raw: &str) -> Self {
        Self {
            raw: raw.to_string(),
            clarified: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResearchConstraints {
    pub raw: String,
    pub clarified: Option<String>,
}

impl ResearchConstraints {
    pub fn new(raw: &str) -> Self {
        Self {
            raw: raw.to_string(),
            clarified: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperSummary {
    pub title: String,
    pub authors: String,
    pub year: Option<i32>,
    pub summary: String,
}

/// Output of the literature phase: at most four paper summaries plus a
/// mechanism-focused digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiteratureInsights {
    pub papers: Vec<PaperSummary>,
    pub digest: String,
}

/// Digest text used when a search returns nothing; the hypothesis templates
/// still need their literature slot filled.
pub const NO_LITERATURE_DIGEST: &str =
    "No relevant literature was found for this query; proceed from first principles.";

impl LiteratureInsights {
    pub fn empty() -> Self {
        Self {
            papers: Vec::new(),
            digest: NO_LITERATURE_DIGEST.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub statement: String,
    /// Dim names selected by variable extraction; empty until extracted.
    pub variables: Vec<String>,
    pub initial_values: Vec<f64>,
    pub outer_iteration: u32,
}

/// Chat-completion backend selection, deserialized from run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LLMBackendConfig {
    Live {
        /// Defaults to the LLM_BASE_URL environment variable.
        #[serde(default)]
        endpoint_url: Option<String>,
        model_name: String,
        #[serde(default)]
        temperature: f64,
    },
    Scripted { fixture_path: std::path::PathBuf },
}
