//! The agent operations: UserProxy clarifications, literature digestion,
//! hypothesis generation/refinement, variable extraction, and report
//! writing, all running over one pluggable chat backend.

use std::collections::BTreeMap;

use helixlab_core::analysis::AnalysisReportData;
use helixlab_core::space::ParameterSpace;

use crate::backend::{Backend, CompletionRequest, TranscriptEntry};
use crate::error::AgentError;
use crate::extract;
use crate::literature::LiteratureEntry;
use crate::prompts::PromptCatalog;
use crate::types::{
    Hypothesis, LiteratureInsights, PaperSummary, ResearchConstraints, ResearchGoal,
};

/// Text used for the hypothesis slot when a mode bypasses the Hypothesis
/// Agent entirely.
pub const NO_HYPOTHESIS_SENTINEL: &str = "(hypothesis generation bypassed in this mode)";

pub struct Agents {
    catalog: PromptCatalog,
    backend: Backend,
}

impl Agents {
    pub fn new(backend: Backend) -> Self {
        Self {
            catalog: PromptCatalog::embedded(),
            backend,
        }
    }

    pub fn catalog(&self) -> &PromptCatalog {
        &self.catalog
    }

    /// Outbound prompts recorded so far (scripted backends only).
    pub fn transcript(&self) -> Vec<TranscriptEntry> {
        self.backend.transcript()
    }

    fn complete(
        &self,
        template_id: &str,
        outer_iteration: u32,
        values: &BTreeMap<String, String>,
    ) -> Result<String, AgentError> {
        let messages = self.catalog.render(template_id, values)?;
        self.backend.complete(&CompletionRequest {
            template_id: template_id.to_string(),
            outer_iteration,
            messages,
        })
    }

    /// UserProxy: clarified goal via the goal_clarify template. The
    /// completion replaces any previous clarification verbatim.
    pub fn clarify_goal(
        &self,
        goal: &ResearchGoal,
        outer_iteration: u32,
    ) -> Result<ResearchGoal, AgentError> {
        if goal.raw.trim().is_empty() {
            return Err(AgentError::EmptyInput("research goal"));
        }
        let mut values = BTreeMap::new();
        values.insert("research_goal".to_string(), goal.raw.clone());
        let clarified = self.complete("goal_clarify", outer_iteration, &values)?;
        Ok(ResearchGoal {
            raw: goal.raw.clone(),
            clarified: Some(clarified),
        })
    }

    pub fn clarify_constraints(
        &self,
        constraints: &ResearchConstraints,
        outer_iteration: u32,
    ) -> Result<ResearchConstraints, AgentError> {
        if constraints.raw.trim().is_empty() {
            return Err(AgentError::EmptyInput("research constraints"));
        }
        let mut values = BTreeMap::new();
        values.insert("research_constraints".to_string(), constraints.raw.clone());
        let clarified = self.complete("constraints_clarify", outer_iteration, &values)?;
        Ok(ResearchConstraints {
            raw: constraints.raw.clone(),
            clarified: Some(clarified),
        })
    }

    /// Literature Agent: one comma-separated query string, collapsed onto a
    /// single line.
    pub fn build_search_query(
        &self,
        goal: &ResearchGoal,
        constraints: &ResearchConstraints,
        outer_iteration: u32,
    ) -> Result<String, AgentError> {
        let clarified_goal = goal
            .clarified
            .as_deref()
            .ok_or(AgentError::NotClarified("research goal"))?;
        let clarified_constraints = constraints
            .clarified
            .as_deref()
            .ok_or(AgentError::NotClarified("research constraints"))?;
        let mut values = BTreeMap::new();
        values.insert("clarified_goal".to_string(), clarified_goal.to_string());
        values.insert(
            "clarified_constraints".to_string(),
            clarified_constraints.to_string(),
        );
        let raw = self.complete("search_query", outer_iteration, &values)?;
        Ok(raw.split_whitespace().collect::<Vec<_>>().join(" "))
    }

    /// Literature Agent: digest of up to four retrieved entries. An empty
    /// entry list short-circuits to the sentinel digest without any
    /// backend call.
    pub fn summarize_literature(
        &self,
        entries: &[LiteratureEntry],
        outer_iteration: u32,
    ) -> Result<LiteratureInsights, AgentError> {
        if entries.is_empty() {
            return Ok(LiteratureInsights::empty());
        }
        // insights carry at most four papers regardless of the caller
        let entries = &entries[..entries.len().min(crate::literature::MAX_RESULTS)];
        let mut values = BTreeMap::new();
        values.insert("search_results".to_string(), format_entries(entries));
        let digest = self.complete("literature_summarize", outer_iteration, &values)?;
        Ok(LiteratureInsights {
            papers: entries
                .iter()
                .map(|e| PaperSummary {
                    title: e.title.clone(),
                    authors: e.authors.join(", "),
                    year: e.year,
                    summary: e.abstract_text.clone(),
                })
                .collect(),
            digest,
        })
    }

    /// Hypothesis Agent, first iteration.
    pub fn generate_hypothesis(
        &self,
        goal: &ResearchGoal,
        constraints: &ResearchConstraints,
        insights: &LiteratureInsights,
        space: &ParameterSpace,
        outer_iteration: u32,
    ) -> Result<Hypothesis, AgentError> {
        let clarified_goal = goal
            .clarified
            .as_deref()
            .ok_or(AgentError::NotClarified("research goal"))?;
        let clarified_constraints = constraints
            .clarified
            .as_deref()
            .ok_or(AgentError::NotClarified("research constraints"))?;
        let mut values = BTreeMap::new();
        values.insert("research_goal".to_string(), clarified_goal.to_string());
        values.insert(
            "research_constraints".to_string(),
            clarified_constraints.to_string(),
        );
        values.insert(
            "literature_insights".to_string(),
            format_insights(insights),
        );
        values.insert("parameter_space".to_string(), format_parameter_space(space));
        let statement = self.complete("hypothesis_generate", outer_iteration, &values)?;
        Ok(Hypothesis {
            statement,
            variables: Vec::new(),
            initial_values: Vec::new(),
            outer_iteration,
        })
    }

    /// Hypothesis Agent, later iterations: refinement from the previous
    /// report. The template itself carries the parameter-space listing.
    pub fn refine_hypothesis(
        &self,
        previous_report_markdown: &str,
        _space: &ParameterSpace,
        outer_iteration: u32,
    ) -> Result<Hypothesis, AgentError> {
        if previous_report_markdown.trim().is_empty() {
            return Err(AgentError::EmptyInput("previous report"));
        }
        let mut values = BTreeMap::new();
        values.insert(
            "previous_report".to_string(),
            previous_report_markdown.to_string(),
        );
        let statement = self.complete("hypothesis_refine", outer_iteration, &values)?;
        Ok(Hypothesis {
            statement,
            variables: Vec::new(),
            initial_values: Vec::new(),
            outer_iteration,
        })
    }

    /// Experiment Agent: variables and initial values out of a hypothesis
    /// statement, validated against the space, with bounded re-prompting.
    pub fn extract_experiment_variables(
        &self,
        hypothesis_statement: &str,
        space: &ParameterSpace,
        outer_iteration: u32,
    ) -> Result<(Vec<String>, Vec<f64>), AgentError> {
        extract::extract_experiment_variables(
            hypothesis_statement,
            space,
            &self.backend,
            &self.catalog,
            outer_iteration,
        )
    }

    /// Analysis Agent: the research report fed into the next refinement.
    pub fn write_report(
        &self,
        goal: &ResearchGoal,
        constraints: &ResearchConstraints,
        insights: &LiteratureInsights,
        hypothesis: Option<&Hypothesis>,
        analysis: &AnalysisReportData,
        outer_iteration: u32,
    ) -> Result<String, AgentError> {
        let mut values = BTreeMap::new();
        values.insert(
            "research_goal".to_string(),
            goal.clarified.clone().unwrap_or_else(|| goal.raw.clone()),
        );
        values.insert(
            "research_constraints".to_string(),
            constraints
                .clarified
                .clone()
                .unwrap_or_else(|| constraints.raw.clone()),
        );
        values.insert(
            "literature_insights".to_string(),
            format_insights(insights),
        );
        values.insert(
            "hypothesis".to_string(),
            hypothesis
                .map(|h| h.statement.clone())
                .unwrap_or_else(|| NO_HYPOTHESIS_SENTINEL.to_string()),
        );
        values.insert(
            "data_analysis_results".to_string(),
            render_analysis(analysis),
        );
        let report = self.complete("report_write", outer_iteration, &values)?;
        if report.trim().is_empty() {
            return Err(AgentError::MalformedBackendResponse(
                "empty report".into(),
            ));
        }
        Ok(report)
    }
}

/// Appendix-style listing of the space, one `- name: [lo, hi]` per line.
pub fn format_parameter_space(space: &ParameterSpace) -> String {
    space
        .dims()
        .iter()
        .map(|d| {
            if d.integral {
                format!("- {}: [{}, {}] (integer values only)", d.name, d.lower, d.upper)
            } else {
                format!("- {}: [{}, {}]", d.name, d.lower, d.upper)
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Search-results slot for the literature template, one block per entry.
pub fn format_entries(entries: &[LiteratureEntry]) -> String {
    entries
        .iter()
        .map(|e| {
            format!(
                "Title: {}\nAuthors: {}\nYear: {}\nAbstract: {}",
                e.title,
                e.authors.join(", "),
                e.year.map_or_else(|| "unknown".to_string(), |y| y.to_string()),
                e.abstract_text
            )
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// Insights slot for the hypothesis templates: digest first, then the
/// per-paper summaries.
pub fn format_insights(insights: &LiteratureInsights) -> String {
    let mut out = insights.digest.clone();
    for paper in &insights.papers {
        let year = paper
            .year
            .map_or_else(|| "unknown".to_string(), |y| y.to_string());
        out.push_str(&format!(
            "\n- {} ({}, {}): {}",
            paper.title, paper.authors, year, paper.summary
        ));
    }
    out
}

/// Deterministic text rendering of the analysis data for the report
/// template; undefined metrics render as "n/a".
pub fn render_analysis(analysis: &AnalysisReportData) -> String {
    let mut lines = Vec::new();
    lines.push(format!("Records analyzed: {}", analysis.record_count));
    lines.push(format!(
        "Critical value (maximum g-factor): {}",
        analysis.critical_value
    ));
    lines.push(format!(
        "Critical parameters: {}",
        serde_json::to_string(&analysis.critical_params).expect("vector serializes")
    ));
    lines.push(format!(
        "Exploration rate (mean pairwise distance): {}",
        analysis
            .exploration_rate
            .map_or_else(|| "n/a".to_string(), |e| e.to_string())
    ));
    lines.push("Correlations with the g-factor:".to_string());
    if analysis.correlations.is_empty() {
        lines.push("- n/a".to_string());
    }
    for c in &analysis.correlations {
        let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| x.to_string());
        lines.push(format!(
            "- {}: pearson={}, spearman={}, kendall={}",
            c.variable,
            fmt(c.pearson),
            fmt(c.spearman),
            fmt(c.kendall)
        ));
    }
    if !analysis.fits.is_empty() {
        lines.push("Polynomial fits of g against each variable:".to_string());
        for fit in &analysis.fits {
            lines.push(format!(
                "- {}: degree {}, coefficients (ascending) {:?}, SSE {}",
                fit.variable, fit.degree, fit.coefficients, fit.sum_squared_residual
            ));
        }
    }
    for skip in &analysis.skipped {
        lines.push(format!(
            "- {} {} skipped: {}",
            skip.variable, skip.analysis, skip.reason
        ));
    }
    lines.join("\n")
}
