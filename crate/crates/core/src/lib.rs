//! Numerical core of the nanohelix discovery loop: the bounded design space,
//! the synthetic g-factor surrogate, hyper-rectangle MCTS, and the analysis
//! toolkit. Everything here is pure and deterministic under a fixed seed.

pub mod analysis;
pub mod optimizer;
pub mod space;
pub mod stats;
pub mod surrogate;

pub use analysis::{analyze, critical_value, exploration_rate, AnalysisReportData, ExperimentRecord};
pub use optimizer::{best_of, mcts_optimize, random_search, MCTSConfig, OptimizationTrace};
pub use space::{default_nanohelix_space, distance, ParameterSpace, ParameterVector};
pub use surrogate::{evaluate_g_factor, PropertyValue, Surrogate, SurrogateConfig};
