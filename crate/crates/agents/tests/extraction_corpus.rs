//! Runs the variable-extraction pipeline over the 20-case fixture corpus:
//! every case must land on exactly the expected parse or the expected error
//! class after the bounded re-prompting.

use helixlab_agents::backend::{Backend, ScriptedBackend};
use helixlab_agents::{AgentError, Agents};
use helixlab_core::default_nanohelix_space;
use serde::Deserialize;

#[derive(Deserialize)]
struct Case {
    name: String,
    replies: Vec<String>,
    expect: Expectation,
}

#[derive(Deserialize)]
enum Expectation {
    #[serde(rename = "ok")]
    Ok {
        variables: Vec<String>,
        values: Vec<f64>,
    },
    #[serde(rename = "error")]
    Error(String),
}

fn corpus() -> Vec<Case> {
    serde_json::from_str(include_str!("data/extraction_cases.json")).expect("corpus parses")
}

#[test]
fn corpus_has_twenty_cases() {
    assert_eq!(corpus().len(), 20);
}

#[test]
fn every_corpus_case_classifies_correctly() {
    let space = default_nanohelix_space();
    let mut failures = Vec::new();
    for case in corpus() {
        let dir = tempfile::tempdir().unwrap();
        let fixture = serde_json::to_string(&vec![case.replies.clone()]).unwrap();
        std::fs::write(dir.path().join("variables_extract.json"), fixture).unwrap();
        let agents = Agents::new(Backend::Scripted(
            ScriptedBackend::load(dir.path()).unwrap(),
        ));
        let result =
            agents.extract_experiment_variables("test hypothesis statement", &space, 1);
        let verdict = match (&case.expect, &result) {
            (Expectation::Ok { variables, values }, Ok((got_vars, got_vals))) => {
                got_vars == variables && got_vals == values
            }
            (Expectation::Error(kind), Err(e)) => matches!(
                (kind.as_str(), e),
                ("unparseable", AgentError::UnparseableAfterRetries { .. })
                    | ("unknown_variable", AgentError::UnknownVariable(_))
                    | ("value_out_of_bounds", AgentError::ValueOutOfBounds { .. })
            ),
            _ => false,
        };
        if !verdict {
            failures.push(format!("{}: got {:?}", case.name, result));
        }
    }
    assert!(
        failures.is_empty(),
        "{} misclassifications:\n{}",
        failures.len(),
        failures.join("\n")
    );
}

#[test]
fn retries_append_correction_messages() {
    let space = default_nanohelix_space();
    let dir = tempfile::tempdir().unwrap();
    let replies = vec![vec![
        "no dict".to_string(),
        "{'variables': ['helix_radius'], 'values': [55]}".to_string(),
    ]];
    std::fs::write(
        dir.path().join("variables_extract.json"),
        serde_json::to_string(&replies).unwrap(),
    )
    .unwrap();
    let agents = Agents::new(Backend::Scripted(
        ScriptedBackend::load(dir.path()).unwrap(),
    ));
    let (vars, vals) = agents
        .extract_experiment_variables("hypothesis", &space, 1)
        .unwrap();
    assert_eq!(vars, vec!["helix_radius"]);
    assert_eq!(vals, vec![55.0]);

    let transcript = agents.transcript();
    assert_eq!(transcript.len(), 2);
    // the second attempt carries the failed reply and a correction
    assert_eq!(transcript[1].messages.len(), 4);
    assert!(transcript[1].messages[3]
        .content
        .contains("could not be used"));
}
