use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("{0} must not be empty")]
    EmptyInput(&'static str),
    #[error("{0} must be clarified first")]
    NotClarified(&'static str),
    #[error("unknown prompt template `{0}`")]
    UnknownTemplate(String),
    #[error("template `{template}` missing value for placeholder `{placeholder}`")]
    MissingPlaceholder {
        template: String,
        placeholder: String,
    },
    #[error("template `{template}` has no placeholder `{placeholder}`")]
    UnknownPlaceholder {
        template: String,
        placeholder: String,
    },
    #[error("backend unreachable after {attempts} attempts: {detail}")]
    BackendUnreachable { attempts: u32, detail: String },
    #[error("backend rejected request with status {status}: {body}")]
    BackendRejection { status: u16, body: String },
    #[error("malformed backend response: {0}")]
    MalformedBackendResponse(String),
    #[error("no LLM endpoint configured (set endpoint_url or LLM_BASE_URL)")]
    NoEndpoint,
    #[error(
        "no scripted completion for template `{template}`, iteration {outer_iteration}, call {ordinal} (fixture {path})"
    )]
    FixtureMissing {
        template: String,
        outer_iteration: u32,
        ordinal: usize,
        path: String,
    },
    #[error("fixture file {path} is invalid: {detail}")]
    FixtureInvalid { path: String, detail: String },
    #[error("literature source unreachable after {attempts} attempts: {detail}")]
    SourceUnreachable { attempts: u32, detail: String },
    #[error("literature source quota exceeded (status 429)")]
    QuotaExceeded,
    #[error("literature source rejected request with status {status}: {body}")]
    SourceRejection { status: u16, body: String },
    #[error("variable extraction failed after {attempts} attempts: {last_error}")]
    UnparseableAfterRetries { attempts: u32, last_error: String },
    #[error("extracted variable `{0}` is not in the parameter space")]
    UnknownVariable(String),
    #[error("extracted value for `{variable}` is invalid: {detail}")]
    ValueOutOfBounds { variable: String, detail: String },
}
