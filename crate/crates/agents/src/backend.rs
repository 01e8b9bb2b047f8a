//! Chat-completion backends. Scripted fixtures make runs fully
//! deterministic: completions are looked up by (template id, outer
//! iteration, call ordinal) and a missing key fails loudly. Live mode is
//! the same call surface over an OpenAI-style HTTP endpoint.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use serde_json::{json, Value};

use crate::error::AgentError;
use crate::types::{ChatMessage, LLMBackendConfig, Role};

/// One completion request, carrying the fixture key alongside the messages.
#[derive(Debug, Clone)]
pub struct CompletionRequest {
    pub template_id: String,
    /// 1-based outer loop iteration.
    pub outer_iteration: u32,
    pub messages: Vec<ChatMessage>,
}

/// A prompt that actually went out, as recorded by the scripted backend.
#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptEntry {
    pub template_id: String,
    pub outer_iteration: u32,
    pub ordinal: usize,
    pub messages: Vec<ChatMessage>,
}

pub enum Backend {
    Scripted(ScriptedBackend),
    Live(LiveBackend),
}

impl Backend {
    pub fn from_config(config: &LLMBackendConfig) -> Result<Self, AgentError> {
        match config {
            LLMBackendConfig::Scripted { fixture_path } => {
                Ok(Self::Scripted(ScriptedBackend::load(fixture_path)?))
            }
            LLMBackendConfig::Live {
                endpoint_url,
                model_name,
                temperature,
            } => Ok(Self::Live(LiveBackend::new(
                endpoint_url.clone(),
                model_name,
                *temperature,
            )?)),
        }
    }

    pub fn complete(&self, request: &CompletionRequest) -> Result<String, AgentError> {
        if request.messages.is_empty() {
            return Err(AgentError::EmptyInput("message list"));
        }
        if request.messages[0].role != Role::System {
            return Err(AgentError::EmptyInput("leading system message"));
        }
        match self {
            Self::Scripted(backend) => backend.complete(request),
            Self::Live(backend) => backend.complete(request),
        }
    }

    /// Outbound prompts recorded so far (scripted mode only).
    pub fn transcript(&self) -> Vec<TranscriptEntry> {
        match self {
            Self::Scripted(backend) => backend.transcript(),
            Self::Live(_) => Vec::new(),
        }
    }
}

/// Deterministic fixture lookup. The fixture directory holds one JSON file
/// per template id: an array indexed by outer iteration (t - 1), each entry
/// an ordered array of completions consumed one per call.
pub struct ScriptedBackend {
    root: PathBuf,
    completions: BTreeMap<String, Vec<Vec<String>>>,
    counters: Mutex<BTreeMap<(String, u32), usize>>,
    transcript: Mutex<Vec<TranscriptEntry>>,
}

impl ScriptedBackend {
    pub fn load(fixture_path: &Path) -> Result<Self, AgentError> {
        let mut completions = BTreeMap::new();
        if !fixture_path.is_dir() {
            return Err(AgentError::FixtureInvalid {
                path: fixture_path.display().to_string(),
                detail: "not a directory".into(),
            });
        }
        let entries = std::fs::read_dir(fixture_path).map_err(|e| AgentError::FixtureInvalid {
            path: fixture_path.display().to_string(),
            detail: e.to_string(),
        })?;
        for entry in entries {
            let path = entry
                .map_err(|e| AgentError::FixtureInvalid {
                    path: fixture_path.display().to_string(),
                    detail: e.to_string(),
                })?
                .path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            let text = std::fs::read_to_string(&path).map_err(|e| AgentError::FixtureInvalid {
                path: path.display().to_string(),
                detail: e.to_string(),
            })?;
            let parsed: Vec<Vec<String>> =
                serde_json::from_str(&text).map_err(|e| AgentError::FixtureInvalid {
                    path: path.display().to_string(),
                    detail: format!("expected an array of per-iteration arrays: {e}"),
                })?;
            completions.insert(stem.to_string(), parsed);
        }
        Ok(Self {
            root: fixture_path.to_path_buf(),
            completions,
            counters: Mutex::new(BTreeMap::new()),
            transcript: Mutex::new(Vec::new()),
        })
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, AgentError> {
        let key = (request.template_id.clone(), request.outer_iteration);
        let ordinal = {
            let mut counters = self.counters.lock().expect("counter lock");
            let slot = counters.entry(key).or_insert(0);
            let current = *slot;
            *slot += 1;
            current
        };
        self.transcript.lock().expect("transcript lock").push(TranscriptEntry {
            template_id: request.template_id.clone(),
            outer_iteration: request.outer_iteration,
            ordinal,
            messages: request.messages.clone(),
        });
        let missing = || AgentError::FixtureMissing {
            template: request.template_id.clone(),
            outer_iteration: request.outer_iteration,
            ordinal,
            path: self.root.display().to_string(),
        };
        let per_iteration = self
            .completions
            .get(&request.template_id)
            .ok_or_else(missing)?;
        let iteration_index = (request.outer_iteration.max(1) - 1) as usize;
        let calls = per_iteration.get(iteration_index).ok_or_else(missing)?;
        calls.get(ordinal).cloned().ok_or_else(missing)
    }

    pub fn transcript(&self) -> Vec<TranscriptEntry> {
        self.transcript.lock().expect("transcript lock").clone()
    }
}

/// OpenAI-style chat-completion client.
pub struct LiveBackend {
    endpoint_url: String,
    model_name: String,
    temperature: f64,
    api_key: Option<String>,
    http: reqwest::blocking::Client,
    max_retries: u32,
    initial_backoff: Duration,
}

impl LiveBackend {
    pub fn new(
        endpoint_url: Option<String>,
        model_name: &str,
        temperature: f64,
    ) -> Result<Self, AgentError> {
        let endpoint_url = endpoint_url
            .or_else(|| std::env::var("LLM_BASE_URL").ok())
            .ok_or(AgentError::NoEndpoint)?;
        Ok(Self {
            endpoint_url: endpoint_url.trim_end_matches('/').to_string(),
            model_name: model_name.to_string(),
            temperature,
            api_key: std::env::var("LLM_API_KEY").ok(),
            http: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(120))
                .build()
                .expect("reqwest client builds"),
            max_retries: 3,
            initial_backoff: Duration::from_millis(250),
        })
    }

    pub fn with_retries(mut self, max_retries: u32, initial_backoff: Duration) -> Self {
        self.max_retries = max_retries;
        self.initial_backoff = initial_backoff;
        self
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, AgentError> {
        let body = json!({
            "model": self.model_name,
            "messages": request.messages,
            "temperature": self.temperature,
        });
        let attempts = self.max_retries.max(1);
        let mut backoff = self.initial_backoff;
        let mut last_error = String::new();
        for round in 0..attempts {
            let mut builder = self
                .http
                .post(format!("{}/chat/completions", self.endpoint_url))
                .json(&body);
            if let Some(key) = &self.api_key {
                builder = builder.bearer_auth(key);
            }
            match builder.send() {
                Ok(response) => {
                    let status = response.status().as_u16();
                    let text = response
                        .text()
                        .map_err(|e| AgentError::MalformedBackendResponse(e.to_string()))?;
                    if !(200..300).contains(&status) {
                        return Err(AgentError::BackendRejection { status, body: text });
                    }
                    let parsed: Value = serde_json::from_str(&text)
                        .map_err(|e| AgentError::MalformedBackendResponse(e.to_string()))?;
                    return parsed["choices"][0]["message"]["content"]
                        .as_str()
                        .map(str::to_string)
                        .ok_or_else(|| {
                            AgentError::MalformedBackendResponse(
                                "no choices[0].message.content".into(),
                            )
                        });
                }
                Err(e) if e.is_connect() || e.is_timeout() || e.is_request() => {
                    last_error = e.to_string();
                    if round + 1 < attempts {
                        std::thread::sleep(backoff);
                        backoff *= 2;
                    }
                }
                Err(e) => return Err(AgentError::MalformedBackendResponse(e.to_string())),
            }
        }
        Err(AgentError::BackendUnreachable {
            attempts,
            detail: last_error,
        })
    }
}
