//! Black-box tests of the binary: exit codes, outputs, and file artifacts
//! per subcommand.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_helixlab"))
}

fn fixtures_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn write_config(dir: &Path, mode: &str, outer: u32, budget: usize, seed: u64) -> PathBuf {
    let output_dir = dir.join(format!("{mode}_s{seed}"));
    let config = serde_json::json!({
        "mode": mode,
        "outer_iterations": outer,
        "mcts": {"iterations": budget},
        "lab": {"kind": "in_process"},
        "backend": {"mode": "scripted", "fixture_path": fixtures_root().join("chat")},
        "literature_source": {"mode": "fixture", "path": fixtures_root().join("literature")},
        "seed": seed,
        "output_dir": output_dir,
    });
    let path = dir.join(format!("{mode}_s{seed}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

fn run_ok(output: &Output) -> String {
    assert!(
        output.status.success(),
        "command failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8_lossy(&output.stdout).to_string()
}

#[test]
fn run_executes_scripted_prim_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "prim", 2, 30, 5);
    let output = binary().args(["run", "--config"]).arg(&config).output().unwrap();
    let stdout = run_ok(&output);
    assert!(stdout.contains("mode=prim"));
    assert!(stdout.contains("mu="));
    assert!(stdout.contains("best_step="));
    let out_dir = dir.path().join("prim_s5");
    assert!(out_dir.join("summary.json").is_file());
    assert!(out_dir.join("run_log.jsonl").is_file());
    assert!(out_dir.join("report_t1.md").is_file());
    assert!(out_dir.join("report_t2.md").is_file());
}

#[test]
fn run_rejects_unknown_mode_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"mode": "banana", "output_dir": "/tmp/x"}"#,
    )
    .unwrap();
    let output = binary().args(["run", "--config"]).arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn mode_override_switches_to_vanilla_agent() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "prim", 2, 10, 6);
    let output = binary()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--mode-override", "vanilla_agent"])
        .output()
        .unwrap();
    let stdout = run_ok(&output);
    assert!(stdout.contains("mode=vanilla_agent"));
    assert!(stdout.contains("evals=10"));
}

#[test]
fn seed_override_changes_the_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "vanilla_agent", 1, 20, 1);
    let base = run_ok(&binary().args(["run", "--config"]).arg(&config).output().unwrap());
    let overridden = run_ok(
        &binary()
            .args(["run", "--config"])
            .arg(&config)
            .args(["--seed-override", "2"])
            .output()
            .unwrap(),
    );
    assert_ne!(base, overridden);
}

#[test]
fn unknown_flags_exit_2_with_usage() {
    let output = binary().args(["run", "--bogus-flag", "x"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.to_lowercase().contains("usage") || stderr.contains("--help"));
}

#[test]
fn replay_round_trips_and_detects_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "vanilla_agent", 1, 15, 9);
    run_ok(&binary().args(["run", "--config"]).arg(&config).output().unwrap());
    let log = dir.path().join("vanilla_agent_s9/run_log.jsonl");

    let output = binary().args(["replay", "--log"]).arg(&log).output().unwrap();
    let stdout = run_ok(&output);
    assert!(stdout.contains("replay matches"));

    // corrupt one evaluation's value: the recomputed summary must differ
    let text = std::fs::read_to_string(&log).unwrap();
    let best: f64 = stdout
        .split("mu=")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    let corrupted = text.replacen(&format!("\"g_factor\":{best}"), "\"g_factor\":99.9", 1);
    assert_ne!(text, corrupted, "corruption target not found");
    std::fs::write(&log, corrupted).unwrap();
    let output = binary().args(["replay", "--log"]).arg(&log).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn replay_without_summary_file_still_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "vanilla_agent", 1, 5, 2);
    run_ok(&binary().args(["run", "--config"]).arg(&config).output().unwrap());
    let out_dir = dir.path().join("vanilla_agent_s2");
    std::fs::remove_file(out_dir.join("summary.json")).unwrap();
    let output = binary()
        .args(["replay", "--log"])
        .arg(out_dir.join("run_log.jsonl"))
        .output()
        .unwrap();
    let stdout = run_ok(&output);
    assert!(stdout.contains("mode=vanilla_agent"));
}

#[test]
fn compare_aggregates_logs_into_csv() {
    let dir = tempfile::tempdir().unwrap();
    for seed in [1u64, 2] {
        let config = write_config(dir.path(), "vanilla_agent", 1, 10, seed);
        run_ok(&binary().args(["run", "--config"]).arg(&config).output().unwrap());
    }
    let config = write_config(dir.path(), "prim", 2, 10, 3);
    run_ok(&binary().args(["run", "--config"]).arg(&config).output().unwrap());

    let csv_path = dir.path().join("compare.csv");
    let pattern = format!("{}/*/run_log.jsonl", dir.path().display());
    let output = binary()
        .args(["compare", "--logs", &pattern, "--out"])
        .arg(&csv_path)
        .output()
        .unwrap();
    let stdout = run_ok(&output);
    assert!(stdout.contains("prim"));
    assert!(stdout.contains("vanilla_agent"));

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "mode,mu_mean,mu_std,eps_mean,eps_std,evals_mean,best_step_mean"
    );
    assert_eq!(lines.len(), 3); // header + 2 modes
}

#[test]
fn compare_with_no_matches_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let pattern = format!("{}/nothing/*.jsonl", dir.path().display());
    let output = binary()
        .args(["compare", "--logs", &pattern, "--out"])
        .arg(dir.path().join("out.csv"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn analyze_writes_convergence_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "vanilla_agent", 1, 25, 8);
    run_ok(&binary().args(["run", "--config"]).arg(&config).output().unwrap());
    let log = dir.path().join("vanilla_agent_s8/run_log.jsonl");
    let csv_path = dir.path().join("convergence.csv");

    let output = binary()
        .args(["analyze", "--log"])
        .arg(&log)
        .args(["--out"])
        .arg(&csv_path)
        .output()
        .unwrap();
    let stdout = run_ok(&output);
    assert!(stdout.contains("Critical value"));
    assert!(stdout.contains("Exploration rate"));

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,g,running_best");
    assert_eq!(lines.len(), 26); // header + 25 evaluations
    let mut previous = f64::NEG_INFINITY;
    for line in &lines[1..] {
        let best: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(best >= previous);
        previous = best;
    }
}

#[test]
fn analyze_flags_constant_variables_and_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    // prim run varying only helix_radius in iteration 1
    let config = write_config(dir.path(), "prim", 1, 12, 4);
    run_ok(&binary().args(["run", "--config"]).arg(&config).output().unwrap());
    let log = dir.path().join("prim_s4/run_log.jsonl");
    let output = binary()
        .args(["analyze", "--log"])
        .arg(&log)
        .args(["--variables", "pitch", "--out"])
        .arg(dir.path().join("c.csv"))
        .output()
        .unwrap();
    let stdout = run_ok(&output);
    // pitch is frozen in that run: correlation undefined, flagged not fatal
    assert!(stdout.contains("pitch"));
    assert!(stdout.contains("zero variance"));
}

#[test]
fn analyze_standardized_eps_flag() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "vanilla_agent", 1, 10, 12);
    run_ok(&binary().args(["run", "--config"]).arg(&config).output().unwrap());
    let log = dir.path().join("vanilla_agent_s12/run_log.jsonl");
    let output = binary()
        .args(["analyze", "--log"])
        .arg(&log)
        .args(["--standardized-eps", "--out"])
        .arg(dir.path().join("c.csv"))
        .output()
        .unwrap();
    let stdout = run_ok(&output);
    assert!(stdout.contains("Exploration rate (z-scored coordinates):"));
}

#[test]
fn aborted_run_names_the_failing_event() {
    let dir = tempfile::tempdir().unwrap();
    // empty fixture dir: the first backend call (goal clarification) fails
    let fixtures = dir.path().join("empty_fixtures");
    std::fs::create_dir_all(&fixtures).unwrap();
    let config = serde_json::json!({
        "mode": "prim",
        "outer_iterations": 1,
        "mcts": {"iterations": 10},
        "lab": {"kind": "in_process"},
        "backend": {"mode": "scripted", "fixture_path": fixtures},
        "literature_source": {"mode": "fixture", "path": fixtures_root().join("literature")},
        "seed": 0,
        "output_dir": dir.path().join("aborted"),
    });
    let path = dir.path().join("aborted.json");
    std::fs::write(&path, serde_json::to_string(&config).unwrap()).unwrap();
    let output = binary().args(["run", "--config"]).arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("goal_clarified"),
        "stderr does not name the failing event: {stderr}"
    );
}

#[test]
fn analyze_truncated_log_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "vanilla_agent", 1, 5, 3);
    run_ok(&binary().args(["run", "--config"]).arg(&config).output().unwrap());
    let log = dir.path().join("vanilla_agent_s3/run_log.jsonl");
    let text = std::fs::read_to_string(&log).unwrap();
    let truncated: Vec<&str> = text.lines().take(3).collect();
    std::fs::write(&log, truncated.join("\n")).unwrap();
    let output = binary()
        .args(["analyze", "--log"])
        .arg(&log)
        .args(["--out"])
        .arg(dir.path().join("c.csv"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn serve_lab_health_and_occupied_port() {
    // occupied port: hold a listener and point serve-lab at it
    let holder = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = holder.local_addr().unwrap().port();
    let output = binary()
        .args(["serve-lab", "--port", &port.to_string()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    drop(holder);

    // free port: spawn, poll health, then kill
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    drop(listener);
    let mut child = binary()
        .args(["serve-lab", "--port", &port.to_string(), "--noise", "0.01", "--seed", "7"])
        .spawn()
        .unwrap();
    let url = format!("http://127.0.0.1:{port}/health");
    let client = reqwest::blocking::Client::new();
    let mut healthy = false;
    for _ in 0..50 {
        std::thread::sleep(std::time::Duration::from_millis(100));
        if let Ok(response) = client.get(&url).send() {
            if response.status().is_success() {
                let body: serde_json::Value = response.json().unwrap();
                assert_eq!(body["status"], "ok");
                healthy = true;
                break;
            }
        }
    }
    child.kill().unwrap();
    let _ = child.wait();
    assert!(healthy, "health endpoint never came up");
}
