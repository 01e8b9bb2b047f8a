//! Operator entry points for the discovery system. One binary, five
//! subcommands: serve the virtual lab, execute a configured run, compare
//! completed runs, analyze a log, and replay a log into its summary.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use helixlab_agents::ops::render_analysis;
use helixlab_core::analysis::{analyze, ExperimentRecord};
use helixlab_core::default_nanohelix_space;
use helixlab_core::surrogate::SurrogateConfig;
use helixlab_orchestrator::log::EventKind;
use helixlab_orchestrator::{
    compare_runs, execute, read_log, replay, stored_summary, to_csv, to_table, RunConfig,
    RunError, RunSummary,
};

#[derive(Parser)]
#[command(name = "helixlab", version, about = "Nanohelix discovery loop and virtual laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the virtual laboratory over HTTP until interrupted
    #[command(name = "serve-lab")]
    ServeLab {
        #[arg(long, default_value_t = 8731)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        /// Gaussian noise stddev added to responses (0 = deterministic)
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Noise seed (only used when --noise > 0)
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Execute a run described by a JSON config file
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Replace the config's seed
        #[arg(long)]
        seed_override: Option<u64>,
        /// Replace the config's mode (prim, vanilla_agent, vanilla_mas)
        #[arg(long)]
        mode_override: Option<String>,
    },
    /// Aggregate completed run logs into a comparison table
    Compare {
        /// Glob matching run log files
        #[arg(long)]
        logs: String,
        /// CSV output path
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the analysis toolkit over a completed log
    Analyze {
        #[arg(long)]
        log: PathBuf,
        /// Comma-separated variable names (default: every dim)
        #[arg(long)]
        variables: Option<String>,
        /// Polynomial fit degree
        #[arg(long, default_value_t = 2)]
        degree: usize,
        /// Also report the exploration rate on z-scored coordinates
        #[arg(long)]
        standardized_eps: bool,
        /// Where to write the convergence curve
        #[arg(long, default_value = "convergence.csv")]
        out: PathBuf,
    },
    /// Recompute a summary from a log and check it against summary.json
    Replay {
        #[arg(long)]
        log: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ServeLab {
            port,
            bind,
            noise,
            seed,
        } => serve_lab(&bind, port, noise, seed),
        Command::Run {
            config,
            seed_override,
            mode_override,
        } => run(&config, seed_override, mode_override.as_deref()),
        Command::Compare { logs, out } => compare(&logs, &out),
        Command::Analyze {
            log,
            variables,
            degree,
            standardized_eps,
            out,
        } => analyze_log(&log, variables.as_deref(), degree, standardized_eps, &out),
        Command::Replay { log } => replay_log(&log),
    }
}

fn serve_lab(bind: &str, port: u16, noise: f64, seed: u64) -> ExitCode {
    let config = SurrogateConfig {
        noise_stddev: noise,
        seed,
    };
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("failed to start runtime: {e}");
            return ExitCode::FAILURE;
        }
    };
    let result = runtime.block_on(async {
        let (tx, rx) = tokio::sync::oneshot::channel();
        tokio::spawn(async move {
            let _ = tokio::signal::ctrl_c().await;
            let _ = tx.send(());
        });
        eprintln!("serving virtual lab on http://{bind}:{port}");
        helixlab_virtlab::serve(bind, port, config, Some(rx)).await
    });
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}

fn run(config_path: &Path, seed_override: Option<u64>, mode_override: Option<&str>) -> ExitCode {
    let mut config = match RunConfig::from_file(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    if let Some(mode) = mode_override {
        match mode.parse() {
            Ok(mode) => config.mode = mode,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
        }
        if let Err(e) = config.validate() {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    }
    match execute(&config) {
        Ok(summary) => {
            println!("{}", summary.summary_line());
            ExitCode::SUCCESS
        }
        Err(e @ RunError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}

fn compare(pattern: &str, out: &Path) -> ExitCode {
    let paths = match glob::glob(pattern) {
        Ok(paths) => paths,
        Err(e) => {
            eprintln!("bad glob `{pattern}`: {e}");
            return ExitCode::from(2);
        }
    };
    let mut summaries: Vec<RunSummary> = Vec::new();
    let mut skipped = 0usize;
    for entry in paths {
        let path = match entry {
            Ok(p) => p,
            Err(e) => {
                eprintln!("{e}");
                continue;
            }
        };
        match replay(&path) {
            Ok(summary) => summaries.push(summary),
            Err(e) => {
                eprintln!("skipping {}: {e}", path.display());
                skipped += 1;
            }
        }
    }
    if summaries.is_empty() {
        eprintln!("no completed logs match `{pattern}` ({skipped} skipped)");
        return ExitCode::FAILURE;
    }
    let rows = match compare_runs(&summaries) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    let csv = to_csv(&rows);
    if let Err(e) = std::fs::write(out, &csv) {
        eprintln!("cannot write {}: {e}", out.display());
        return ExitCode::FAILURE;
    }
    print!("{}", to_table(&rows));
    ExitCode::SUCCESS
}

/// Evaluation records of a completed log, in step order.
fn records_of_log(path: &Path) -> Result<Vec<ExperimentRecord>, String> {
    // replay validates completeness (run_start + run_end)
    replay(path).map_err(|e| e.to_string())?;
    let lines = read_log(path).map_err(|e| e.to_string())?;
    let mut records = Vec::new();
    for line in &lines {
        if line.event == EventKind::Evaluation {
            let payload: helixlab_orchestrator::log::EvaluationEvent =
                serde_json::from_value(line.payload.clone()).map_err(|e| e.to_string())?;
            records.push(ExperimentRecord {
                params: payload.parameters,
                g_factor: payload.g_factor,
                outer_iteration: line.t,
                step: payload.step,
            });
        }
    }
    records.sort_by_key(|r| r.step);
    Ok(records)
}

fn analyze_log(
    log: &Path,
    variables: Option<&str>,
    degree: usize,
    standardized_eps: bool,
    out: &Path,
) -> ExitCode {
    let records = match records_of_log(log) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    let variables: Vec<String> = match variables {
        Some(csv) => csv.split(',').map(|s| s.trim().to_string()).collect(),
        None => default_nanohelix_space()
            .dims()
            .iter()
            .map(|d| d.name.clone())
            .collect(),
    };
    let report = match analyze(&records, &variables, degree) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    println!("{}", render_analysis(&report));
    if standardized_eps {
        let conditions: Vec<_> = records.iter().map(|r| r.params.clone()).collect();
        let value = helixlab_core::analysis::exploration_rate_standardized(&conditions)
            .map_or_else(|_| "n/a".to_string(), |v| v.to_string());
        println!("Exploration rate (z-scored coordinates): {value}");
    }

    let mut csv = String::from("step,g,running_best\n");
    let mut running = f64::NEG_INFINITY;
    for record in &records {
        running = running.max(record.g_factor);
        csv.push_str(&format!("{},{},{}\n", record.step, record.g_factor, running));
    }
    if let Err(e) = std::fs::write(out, csv) {
        eprintln!("cannot write {}: {e}", out.display());
        return ExitCode::FAILURE;
    }
    println!("wrote {}", out.display());
    ExitCode::SUCCESS
}

fn replay_log(log: &Path) -> ExitCode {
    let recomputed = match replay(log) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    println!("{}", recomputed.summary_line());

    // check against summary.json next to the log when present
    let summary_path = log
        .parent()
        .map(|dir| dir.join("summary.json"))
        .filter(|p| p.is_file());
    if let Some(path) = summary_path {
        let stored: Result<RunSummary, _> = std::fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|text| serde_json::from_str(&text).map_err(|e| e.to_string()));
        match stored {
            Ok(stored) if stored == recomputed => {
                println!("replay matches {}", path.display());
                ExitCode::SUCCESS
            }
            Ok(_) => {
                eprintln!("replay differs from {}", path.display());
                ExitCode::FAILURE
            }
            Err(e) => {
                eprintln!("cannot read {}: {e}", path.display());
                ExitCode::FAILURE
            }
        }
    } else {
        // no summary.json: still cross-check the log's own run_end payload
        if let Ok(lines) = read_log(log) {
            if let Some(stored) = stored_summary(&lines) {
                if stored != recomputed {
                    eprintln!("replay differs from the run_end event");
                    return ExitCode::FAILURE;
                }
            }
        }
        ExitCode::SUCCESS
    }
}
