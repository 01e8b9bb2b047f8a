//! Parsing of the variable-extraction reply: a Python-ish dict of the form
//! `{'variables': ['a', 'b'], 'values': [1, 2.5]}`, possibly wrapped in
//! prose, single- or double-quoted, with free whitespace. Strictness is
//! applied after extraction: names must exist in the space and values must
//! sit inside their bounds (integers for integral dims).

use helixlab_core::space::{ParameterSpace, SpaceError};

use crate::backend::{Backend, CompletionRequest};
use crate::error::AgentError;
use crate::prompts::PromptCatalog;
use crate::types::ChatMessage;

pub const MAX_ATTEMPTS: u32 = 3;

/// Why a single reply could not be used; drives the correction message.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtractionFailure {
    NoDict,
    BadShape(String),
    UnknownVariable(String),
    InvalidValue { variable: String, detail: String },
}

impl std::fmt::Display for ExtractionFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NoDict => write!(f, "no {{...}} dictionary found in the reply"),
            Self::BadShape(detail) => write!(f, "dictionary has the wrong shape: {detail}"),
            Self::UnknownVariable(name) => {
                write!(f, "`{name}` is not a parameter of the space")
            }
            Self::InvalidValue { variable, detail } => {
                write!(f, "value for `{variable}` is invalid: {detail}")
            }
        }
    }
}

/// Locates the outermost braces, normalizes quotes, and parses the two
/// parallel lists. Purely syntactic; no space validation.
pub fn parse_variables_reply(text: &str) -> Result<(Vec<String>, Vec<f64>), ExtractionFailure> {
    let start = text.find('{').ok_or(ExtractionFailure::NoDict)?;
    let end = text.rfind('}').ok_or(ExtractionFailure::NoDict)?;
    if end <= start {
        return Err(ExtractionFailure::NoDict);
    }
    let dict = text[start..=end].replace('\'', "\"");
    let value: serde_json::Value = serde_json::from_str(&dict)
        .map_err(|e| ExtractionFailure::BadShape(e.to_string()))?;
    let object = value
        .as_object()
        .ok_or_else(|| ExtractionFailure::BadShape("not an object".into()))?;

    let variables = object
        .get("variables")
        .and_then(serde_json::Value::as_array)
        .ok_or_else(|| ExtractionFailure::BadShape("missing `variables` list".into()))?;
    let values = object
        .get("values")
        .and_then(serde_json::Value::as_array)
        .ok_or_else(|| ExtractionFailure::BadShape("missing `values` list".into()))?;

    let names: Option<Vec<String>> = variables
        .iter()
        .map(|v| v.as_str().map(str::to_string))
        .collect();
    let names = names.ok_or_else(|| {
        ExtractionFailure::BadShape("`variables` must contain strings".into())
    })?;
    let numbers: Option<Vec<f64>> = values.iter().map(serde_json::Value::as_f64).collect();
    let numbers = numbers.ok_or_else(|| {
        ExtractionFailure::BadShape("`values` must contain numbers".into())
    })?;

    if names.is_empty() {
        return Err(ExtractionFailure::BadShape("`variables` is empty".into()));
    }
    if names.len() != numbers.len() {
        return Err(ExtractionFailure::BadShape(format!(
            "{} variables but {} values",
            names.len(),
            numbers.len()
        )));
    }
    Ok((names, numbers))
}

/// Parse plus space validation.
pub fn validate_extraction(
    names: Vec<String>,
    values: Vec<f64>,
    space: &ParameterSpace,
) -> Result<(Vec<String>, Vec<f64>), ExtractionFailure> {
    for (name, &value) in names.iter().zip(&values) {
        let Some(dim) = space.dim(name) else {
            return Err(ExtractionFailure::UnknownVariable(name.clone()));
        };
        let probe = helixlab_core::space::ParameterVector::from_pairs([(name.clone(), value)]);
        if let Err(e) = space.validate(&probe) {
            let detail = match e {
                SpaceError::OutOfBounds { lower, upper, .. } => {
                    format!("{value} outside [{lower}, {upper}]")
                }
                SpaceError::NonIntegral { .. } => {
                    format!("{value} is not an integer (required for {})", dim.name)
                }
                other => other.to_string(),
            };
            return Err(ExtractionFailure::InvalidValue {
                variable: name.clone(),
                detail,
            });
        }
    }
    if names.len() != names.iter().collect::<std::collections::BTreeSet<_>>().len() {
        return Err(ExtractionFailure::BadShape(
            "duplicate variable names".into(),
        ));
    }
    Ok((names, values))
}

/// Prompts the backend with the variables_extract template and parses the
/// reply, re-prompting with a correction message up to [`MAX_ATTEMPTS`]
/// total attempts before giving up.
pub fn extract_experiment_variables(
    hypothesis_statement: &str,
    space: &ParameterSpace,
    backend: &Backend,
    catalog: &PromptCatalog,
    outer_iteration: u32,
) -> Result<(Vec<String>, Vec<f64>), AgentError> {
    if hypothesis_statement.trim().is_empty() {
        return Err(AgentError::EmptyInput("hypothesis statement"));
    }
    let mut values = std::collections::BTreeMap::new();
    values.insert("hypothesis".to_string(), hypothesis_statement.to_string());
    let mut messages = catalog.render("variables_extract", &values)?;

    let mut last_failure: Option<ExtractionFailure> = None;
    for _ in 0..MAX_ATTEMPTS {
        let reply = backend.complete(&CompletionRequest {
            template_id: "variables_extract".to_string(),
            outer_iteration,
            messages: messages.clone(),
        })?;
        let failure = match parse_variables_reply(&reply)
            .and_then(|(names, nums)| validate_extraction(names, nums, space))
        {
            Ok(result) => return Ok(result),
            Err(f) => f,
        };
        messages.push(ChatMessage::assistant(reply));
        messages.push(ChatMessage::user(format!(
            "Your previous response could not be used: {failure}. Respond with ONLY a dictionary \
             in the exact format {{'variables': ['var1', 'var2'], 'values': [val1, val2]}}, using \
             parameter names from the pre-defined parameter space and numerical values inside \
             their bounds."
        )));
        last_failure = Some(failure);
    }
    match last_failure.expect("at least one attempt was made") {
        ExtractionFailure::UnknownVariable(name) => Err(AgentError::UnknownVariable(name)),
        ExtractionFailure::InvalidValue { variable, detail } => {
            Err(AgentError::ValueOutOfBounds { variable, detail })
        }
        other => Err(AgentError::UnparseableAfterRetries {
            attempts: MAX_ATTEMPTS,
            last_error: other.to_string(),
        }),
    }
}
