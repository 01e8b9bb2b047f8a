//! Blocking client for the lab service. Transient connection failures are
//! retried with exponential backoff; HTTP-level rejections are surfaced with
//! the server's error code, never retried.

use std::time::Duration;

use serde_json::{json, Value};
use thiserror::Error;

use helixlab_core::space::ParameterVector;
use helixlab_core::surrogate::PropertyValue;

#[derive(Debug, Error)]
pub enum LabClientError {
    #[error("lab unreachable after {attempts} attempts: {detail}")]
    Unreachable { attempts: u32, detail: String },
    #[error("lab rejected request with status {status}{}", match code { Some(c) => format!(" ({c})"), None => String::new() })]
    RemoteRejection {
        status: u16,
        code: Option<String>,
        dim: Option<String>,
        body: String,
    },
    #[error("malformed lab response: {0}")]
    MalformedResponse(String),
}

#[derive(Debug, Clone)]
pub struct LabClient {
    endpoint_url: String,
    http: reqwest::blocking::Client,
    max_retries: u32,
    initial_backoff: Duration,
}

impl LabClient {
    pub fn new(endpoint_url: &str) -> Self {
        Self {
            endpoint_url: endpoint_url.trim_end_matches('/').to_string(),
            http: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(30))
                .build()
                .expect("reqwest client builds"),
            max_retries: 3,
            initial_backoff: Duration::from_millis(50),
        }
    }

    pub fn with_retries(mut self, max_retries: u32, initial_backoff: Duration) -> Self {
        self.max_retries = max_retries;
        self.initial_backoff = initial_backoff;
        self
    }

    pub fn endpoint_url(&self) -> &str {
        &self.endpoint_url
    }

    /// `POST /experiment`; numerically identical to the in-process surrogate.
    pub fn evaluate(&self, vec: &ParameterVector) -> Result<PropertyValue, LabClientError> {
        let response = self.send_with_retry(|| {
            self.http
                .post(format!("{}/experiment", self.endpoint_url))
                .json(&json!({"parameters": vec}))
                .send()
        })?;
        let status = response.status().as_u16();
        let body = response
            .text()
            .map_err(|e| LabClientError::MalformedResponse(e.to_string()))?;
        if !(200..300).contains(&status) {
            let parsed: Option<Value> = serde_json::from_str(&body).ok();
            let error = parsed.as_ref().and_then(|v| v.get("error"));
            let field = |k: &str| {
                error
                    .and_then(|e| e.get(k))
                    .and_then(Value::as_str)
                    .map(str::to_string)
            };
            return Err(LabClientError::RemoteRejection {
                status,
                code: field("code"),
                dim: field("dim"),
                body,
            });
        }
        let parsed: Value = serde_json::from_str(&body)
            .map_err(|e| LabClientError::MalformedResponse(e.to_string()))?;
        let g_factor = parsed
            .get("g_factor")
            .and_then(Value::as_f64)
            .ok_or_else(|| {
                LabClientError::MalformedResponse(format!("no numeric g_factor in `{body}`"))
            })?;
        Ok(PropertyValue { g_factor })
    }

    /// `GET /health`.
    pub fn health(&self) -> Result<(), LabClientError> {
        let response = self.send_with_retry(|| {
            self.http
                .get(format!("{}/health", self.endpoint_url))
                .send()
        })?;
        if response.status().is_success() {
            Ok(())
        } else {
            Err(LabClientError::RemoteRejection {
                status: response.status().as_u16(),
                code: None,
                dim: None,
                body: response.text().unwrap_or_default(),
            })
        }
    }

    fn send_with_retry<F>(&self, mut attempt: F) -> Result<reqwest::blocking::Response, LabClientError>
    where
        F: FnMut() -> Result<reqwest::blocking::Response, reqwest::Error>,
    {
        let attempts = self.max_retries.max(1);
        let mut backoff = self.initial_backoff;
        let mut last_error = String::new();
        for round in 0..attempts {
            match attempt() {
                Ok(response) => return Ok(response),
                Err(e) if e.is_connect() || e.is_timeout() || e.is_request() => {
                    last_error = e.to_string();
                    if round + 1 < attempts {
                        std::thread::sleep(backoff);
                        backoff *= 2;
                    }
                }
                Err(e) => {
                    return Err(LabClientError::MalformedResponse(e.to_string()));
                }
            }
        }
        Err(LabClientError::Unreachable {
            attempts,
            detail: last_error,
        })
    }
}
