//! Language layer of the discovery loop: the Appendix-style prompt catalog,
//! pluggable chat backends (live HTTP or deterministic scripted fixtures),
//! literature retrieval, and the agent operations built on top of them.
//!
//! The layer is read-only with respect to numeric state: nothing here
//! mutates the parameter space or experiment records, and extracted
//! variables are validated before they can reach the optimizer.

pub mod backend;
pub mod error;
pub mod extract;
pub mod literature;
pub mod ops;
pub mod prompts;
pub mod types;

pub use backend::{Backend, CompletionRequest, ScriptedBackend, TranscriptEntry};
pub use error::AgentError;
pub use literature::{search_literature, LiteratureEntry, LiteratureSource};
pub use ops::Agents;
pub use prompts::{PromptCatalog, PromptTemplate};
pub use types::{
    ChatMessage, Hypothesis, LLMBackendConfig, LiteratureInsights, PaperSummary,
    ResearchConstraints, ResearchGoal, Role,
};
