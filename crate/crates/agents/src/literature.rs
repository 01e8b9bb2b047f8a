//! Literature retrieval: a Semantic-Scholar-style search client for live
//! use and a fixture directory for deterministic runs. Results are capped
//! at four entries either way.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::AgentError;

pub const MAX_RESULTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiteratureEntry {
    pub title: String,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LiteratureSource {
    /// A directory containing `papers.json` (or a direct path to a JSON
    /// file): an array of entry objects, order preserved.
    Fixture { path: PathBuf },
    /// HTTP paper search: GET {base_url}/paper/search with query, limit=4
    /// and fields=title,authors,year,abstract.
    Live { base_url: String },
}

/// Top-`MAX_RESULTS` entries for `query`. An empty result is not an error.
pub fn search_literature(
    query: &str,
    source: &LiteratureSource,
) -> Result<Vec<LiteratureEntry>, AgentError> {
    if query.trim().is_empty() {
        return Err(AgentError::EmptyInput("search query"));
    }
    let mut entries = match source {
        LiteratureSource::Fixture { path } => load_fixture(path)?,
        LiteratureSource::Live { base_url } => search_live(base_url, query)?,
    };
    entries.truncate(MAX_RESULTS);
    Ok(entries)
}

fn load_fixture(path: &Path) -> Result<Vec<LiteratureEntry>, AgentError> {
    let file = if path.is_dir() {
        path.join("papers.json")
    } else {
        path.to_path_buf()
    };
    let text = std::fs::read_to_string(&file).map_err(|e| AgentError::FixtureInvalid {
        path: file.display().to_string(),
        detail: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| AgentError::FixtureInvalid {
        path: file.display().to_string(),
        detail: format!("expected an array of entry objects: {e}"),
    })
}

fn search_live(base_url: &str, query: &str) -> Result<Vec<LiteratureEntry>, AgentError> {
    let http = reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(30))
        .build()
        .expect("reqwest client builds");
    let attempts = 3u32;
    let mut backoff = Duration::from_millis(250);
    let mut last_error = String::new();
    for round in 0..attempts {
        let mut builder = http
            .get(format!(
                "{}/paper/search",
                base_url.trim_end_matches('/')
            ))
            .query(&[
                ("query", query),
                ("limit", "4"),
                ("fields", "title,authors,year,abstract"),
            ]);
        if let Ok(key) = std::env::var("LITERATURE_API_KEY") {
            builder = builder.header("x-api-key", key);
        }
        match builder.send() {
            Ok(response) => {
                let status = response.status().as_u16();
                if status == 429 {
                    return Err(AgentError::QuotaExceeded);
                }
                let body = response
                    .text()
                    .map_err(|e| AgentError::SourceRejection {
                        status,
                        body: e.to_string(),
                    })?;
                if !(200..300).contains(&status) {
                    return Err(AgentError::SourceRejection { status, body });
                }
                let parsed: Value =
                    serde_json::from_str(&body).map_err(|e| AgentError::SourceRejection {
                        status,
                        body: format!("non-JSON body: {e}"),
                    })?;
                let data = parsed
                    .get("data")
                    .and_then(Value::as_array)
                    .cloned()
                    .unwrap_or_default();
                let mut entries = Vec::new();
                for item in data {
                    entries.push(LiteratureEntry {
                        title: item
                            .get("title")
                            .and_then(Value::as_str)
                            .unwrap_or_default()
                            .to_string(),
                        authors: item
                            .get("authors")
                            .and_then(Value::as_array)
                            .map(|authors| {
                                authors
                                    .iter()
                                    .filter_map(|a| {
                                        a.get("name").and_then(Value::as_str).map(str::to_string)
                                    })
                                    .collect()
                            })
                            .unwrap_or_default(),
                        year: item.get("year").and_then(Value::as_i64).map(|y| y as i32),
                        abstract_text: item
                            .get("abstract")
                            .and_then(Value::as_str)
                            .unwrap_or_default()
                            .to_string(),
                    });
                }
                return Ok(entries);
            }
            Err(e) if e.is_connect() || e.is_timeout() || e.is_request() => {
                last_error = e.to_string();
                if round + 1 < attempts {
                    std::thread::sleep(backoff);
                    backoff *= 2;
                }
            }
            Err(e) => {
                return Err(AgentError::SourceRejection {
                    status: 0,
                    body: e.to_string(),
                })
            }
        }
    }
    Err(AgentError::SourceUnreachable {
        attempts,
        detail: last_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_fixture(entries: usize) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        let items: Vec<Value> = (0..entries)
            .map(|i| {
                serde_json::json!({
                    "title": format!("Paper {i}"),
                    "authors": [format!("Author {i}")],
                    "year": 2020 + i as i32,
                    "abstract": format!("Abstract {i}")
                })
            })
            .collect();
        std::fs::write(
            dir.path().join("papers.json"),
            serde_json::to_string(&items).unwrap(),
        )
        .unwrap();
        dir
    }

    #[test]
    fn fixture_entries_come_back_in_order() {
        let dir = write_fixture(2);
        let source = LiteratureSource::Fixture {
            path: dir.path().to_path_buf(),
        };
        let entries = search_literature("nanohelix", &source).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].title, "Paper 0");
        assert_eq!(entries[1].title, "Paper 1");
    }

    #[test]
    fn results_cap_at_four() {
        let dir = write_fixture(10);
        let source = LiteratureSource::Fixture {
            path: dir.path().to_path_buf(),
        };
        let entries = search_literature("nanohelix", &source).unwrap();
        assert_eq!(entries.len(), 4);
        assert_eq!(entries[3].title, "Paper 3");
    }

    #[test]
    fn empty_query_is_rejected() {
        let dir = write_fixture(1);
        let source = LiteratureSource::Fixture {
            path: dir.path().to_path_buf(),
        };
        assert!(matches!(
            search_literature("  ", &source),
            Err(AgentError::EmptyInput(_))
        ));
    }

    #[test]
    fn unreachable_live_source_errors() {
        let source = LiteratureSource::Live {
            base_url: "http://127.0.0.1:1".into(),
        };
        // the retry loop backs off 250ms+500ms; accept the wait in this test
        match search_literature("nanohelix", &source) {
            Err(AgentError::SourceUnreachable { attempts: 3, .. }) => {}
            other => panic!("expected SourceUnreachable, got {other:?}"),
        }
    }

    #[test]
    fn zero_matches_is_an_empty_list_not_an_error() {
        let dir = write_fixture(0);
        let source = LiteratureSource::Fixture {
            path: dir.path().to_path_buf(),
        };
        assert_eq!(search_literature("anything", &source).unwrap(), vec![]);
    }
}
