//! The discovery loop and its two ablation baselines, driven as a fixed
//! deterministic state machine: clarify, search literature, hypothesize,
//! extract variables, optimize, analyze, report, repeat. Every step appends
//! a typed event to the run log before the run moves on.

use std::cell::RefCell;
use std::path::Path;

use serde_json::json;

use helixlab_agents::{search_literature, Agents, Backend};
use helixlab_agents::{ResearchConstraints, ResearchGoal};
use helixlab_core::analysis::{analyze, ExperimentRecord};
use helixlab_core::optimizer::{mcts_optimize, EvalError, MCTSConfig, OptimizationTrace};
use helixlab_core::space::{ParameterSpace, ParameterVector};
use helixlab_core::surrogate::Surrogate;
use helixlab_core::default_nanohelix_space;
use helixlab_virtlab::LabClient;

use crate::config::{budget_shares, derive_seed, LabConfig, RunConfig, RunMode};
use crate::error::RunError;
use crate::log::{EvaluationEvent, EventKind, RunLogWriter, RunStartEvent, LOG_FILE};
use crate::state::{summarize, LoopState, RunSummary};

/// Where surrogate evaluations come from during a run.
enum Lab {
    InProcess(Surrogate),
    Remote(LabClient),
}

impl Lab {
    fn from_config(config: &LabConfig) -> Result<Self, RunError> {
        match config {
            LabConfig::InProcess { surrogate } => Ok(Self::InProcess(
                Surrogate::new(surrogate.clone()).map_err(RunError::at("run_start"))?,
            )),
            LabConfig::Endpoint { url } => Ok(Self::Remote(LabClient::new(url))),
        }
    }

    fn evaluate(&self, vec: &ParameterVector) -> Result<f64, EvalError> {
        match self {
            Self::InProcess(surrogate) => Ok(surrogate.evaluate(vec)?.g_factor),
            Self::Remote(client) => Ok(client.evaluate(vec)?.g_factor),
        }
    }
}

/// Executes `config` and returns the summary. Dispatches on mode.
pub fn execute(config: &RunConfig) -> Result<RunSummary, RunError> {
    execute_with_transcript(config).map(|(summary, _)| summary)
}

/// [`execute`], also returning the outbound prompt transcript (scripted
/// backends record every message that went out; live backends record
/// nothing).
pub fn execute_with_transcript(
    config: &RunConfig,
) -> Result<(RunSummary, Vec<helixlab_agents::TranscriptEntry>), RunError> {
    config.validate()?;
    match config.mode {
        RunMode::Prim => run_loop(config, true),
        RunMode::VanillaMas => run_loop(config, false),
        RunMode::VanillaAgent => run_single_search(config).map(|s| (s, Vec::new())),
    }
}

/// The full loop (mode = prim).
pub fn run_prim(config: &RunConfig) -> Result<RunSummary, RunError> {
    expect_mode(config, RunMode::Prim)?;
    execute(config)
}

/// No language agents at all: one MCTS over all dims with the full budget.
pub fn run_vanilla_agent(config: &RunConfig) -> Result<RunSummary, RunError> {
    expect_mode(config, RunMode::VanillaAgent)?;
    execute(config)
}

/// The loop with the Hypothesis Agent bypassed: every iteration searches
/// all dims; literature and reports still run but steer nothing.
pub fn run_vanilla_mas(config: &RunConfig) -> Result<RunSummary, RunError> {
    expect_mode(config, RunMode::VanillaMas)?;
    execute(config)
}

fn expect_mode(config: &RunConfig, expected: RunMode) -> Result<(), RunError> {
    if config.mode != expected {
        return Err(RunError::Config(format!(
            "expected mode {}, config says {}",
            expected.as_str(),
            config.mode.as_str()
        )));
    }
    Ok(())
}

struct RunContext {
    writer: RunLogWriter,
    global_step: u64,
}

fn open_run(config: &RunConfig) -> Result<RefCell<RunContext>, RunError> {
    std::fs::create_dir_all(&config.output_dir)?;
    let writer = RunLogWriter::create(&config.output_dir.join(LOG_FILE))?;
    let context = RefCell::new(RunContext {
        writer,
        global_step: 0,
    });
    context.borrow_mut().writer.append(
        EventKind::RunStart,
        0,
        &RunStartEvent {
            mode: config.mode,
            seed: config.seed,
            outer_iterations: config.outer_iterations,
            total_budget: config.mcts.iterations as u64,
            goal: config.goal.clone(),
            constraints: config.constraints.clone(),
        },
    )?;
    Ok(context)
}

/// Runs one MCTS burst, logging every evaluation as it happens, and turns
/// the trace into experiment records.
fn optimize_and_log(
    context: &RefCell<RunContext>,
    lab: &Lab,
    space: &ParameterSpace,
    frozen: &ParameterVector,
    search_dims: &[String],
    mcts: &MCTSConfig,
    t: u32,
) -> Result<(Vec<ExperimentRecord>, OptimizationTrace), RunError> {
    let step_base = context.borrow().global_step;
    let evaluate = |vec: &ParameterVector| -> Result<f64, EvalError> {
        let g = lab.evaluate(vec)?;
        let mut ctx = context.borrow_mut();
        let step = ctx.global_step;
        ctx.writer
            .append(
                EventKind::Evaluation,
                t,
                &EvaluationEvent {
                    step,
                    parameters: vec.clone(),
                    g_factor: g,
                },
            )
            .map_err(|e| -> EvalError { Box::new(e) })?;
        ctx.global_step += 1;
        Ok(g)
    };
    let trace = mcts_optimize(space, frozen, search_dims, evaluate, mcts)
        .map_err(RunError::at("evaluation"))?;
    let records = trace
        .evaluations
        .iter()
        .map(|e| ExperimentRecord {
            params: e.parameters.clone(),
            g_factor: e.g_factor,
            outer_iteration: t,
            step: step_base + e.step as u64,
        })
        .collect();
    Ok((records, trace))
}

fn finish_run(
    config: &RunConfig,
    context: &RefCell<RunContext>,
    history: &[ExperimentRecord],
) -> Result<RunSummary, RunError> {
    let summary = summarize(config.mode, config.seed, history).ok_or_else(|| {
        RunError::Config("run produced no evaluations".into())
    })?;
    context
        .borrow_mut()
        .writer
        .append(EventKind::RunEnd, config.outer_iterations, &summary)?;
    write_summary_file(&config.output_dir, &summary)?;
    Ok(summary)
}

fn write_summary_file(dir: &Path, summary: &RunSummary) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    std::fs::write(dir.join("summary.json"), text)?;
    Ok(())
}

/// vanilla_agent: the whole budget in one search over every dimension.
fn run_single_search(config: &RunConfig) -> Result<RunSummary, RunError> {
    let context = open_run(config)?;
    let lab = Lab::from_config(&config.lab)?;
    let space = default_nanohelix_space();
    let all_dims: Vec<String> = space.dims().iter().map(|d| d.name.clone()).collect();
    let mcts = MCTSConfig {
        iterations: config.mcts.iterations,
        exploration_constant: config.mcts.exploration_constant,
        max_depth: config.mcts.max_depth,
        seed: derive_seed(config.seed, 1),
        initial_sample: None,
    };
    let (records, _) = optimize_and_log(
        &context,
        &lab,
        &space,
        &ParameterVector::new(),
        &all_dims,
        &mcts,
        1,
    )?;
    finish_run(config, &context, &records)
}

/// The shared loop body for prim (with hypotheses) and vanilla_mas
/// (hypothesis phase bypassed).
fn run_loop(
    config: &RunConfig,
    with_hypotheses: bool,
) -> Result<(RunSummary, Vec<helixlab_agents::TranscriptEntry>), RunError> {
    let context = open_run(config)?;
    let lab = Lab::from_config(&config.lab)?;
    let space = default_nanohelix_space();
    let all_dims: Vec<String> = space.dims().iter().map(|d| d.name.clone()).collect();

    let backend_config = config
        .backend
        .as_ref()
        .expect("validated: backend present");
    let literature_source = config
        .literature_source
        .as_ref()
        .expect("validated: literature source present");
    let agents = Agents::new(
        Backend::from_config(backend_config).map_err(RunError::at("run_start"))?,
    );

    let mut state = LoopState::new(
        ResearchGoal::new(&config.goal),
        ResearchConstraints::new(&config.constraints),
    );
    let shares = budget_shares(config.mcts.iterations, config.outer_iterations);

    for t in 1..=config.outer_iterations {
        state.t = t;

        if t == 1 {
            state.goal = agents
                .clarify_goal(&state.goal, t)
                .map_err(RunError::at("goal_clarified"))?;
            context.borrow_mut().writer.append(
                EventKind::GoalClarified,
                t,
                &json!({"raw": state.goal.raw, "clarified": state.goal.clarified}),
            )?;

            state.constraints = agents
                .clarify_constraints(&state.constraints, t)
                .map_err(RunError::at("constraints_clarified"))?;
            context.borrow_mut().writer.append(
                EventKind::ConstraintsClarified,
                t,
                &json!({"raw": state.constraints.raw, "clarified": state.constraints.clarified}),
            )?;

            let query = agents
                .build_search_query(&state.goal, &state.constraints, t)
                .map_err(RunError::at("query_built"))?;
            context
                .borrow_mut()
                .writer
                .append(EventKind::QueryBuilt, t, &json!({"query": query}))?;

            let entries = search_literature(&query, literature_source)
                .map_err(RunError::at("literature"))?;
            let insights = agents
                .summarize_literature(&entries, t)
                .map_err(RunError::at("literature"))?;
            context.borrow_mut().writer.append(
                EventKind::Literature,
                t,
                &json!({"papers": insights.papers, "digest": insights.digest}),
            )?;
            state.insights = Some(insights);
        }

        let (search_dims, frozen, initial_sample) = if with_hypotheses {
            let insights = state.insights.clone().expect("set at t = 1");
            let mut hypothesis = if t == 1 {
                agents
                    .generate_hypothesis(&state.goal, &state.constraints, &insights, &space, t)
                    .map_err(RunError::at("hypothesis"))?
            } else {
                let report = state.reports.last().expect("report from previous iteration");
                agents
                    .refine_hypothesis(report, &space, t)
                    .map_err(RunError::at("hypothesis"))?
            };
            context.borrow_mut().writer.append(
                EventKind::Hypothesis,
                t,
                &json!({"statement": hypothesis.statement}),
            )?;

            let (variables, values) = agents
                .extract_experiment_variables(&hypothesis.statement, &space, t)
                .map_err(RunError::at("variables"))?;
            context.borrow_mut().writer.append(
                EventKind::Variables,
                t,
                &json!({"variables": variables, "values": values}),
            )?;
            hypothesis.variables = variables.clone();
            hypothesis.initial_values = values.clone();

            // non-searched dims freeze at the best-known point (midpoints
            // before any evidence exists)
            let base = state
                .best
                .as_ref()
                .map(|(params, _)| params.clone())
                .unwrap_or_else(|| space.midpoints());
            let mut frozen = ParameterVector::new();
            for dim in space.dims() {
                if !variables.contains(&dim.name) {
                    frozen.set(&dim.name, base.get(&dim.name).expect("base is complete"));
                }
            }
            // the hypothesis point seeds the first simulation
            let mut point = frozen.clone();
            for (name, value) in variables.iter().zip(&values) {
                point.set(name, *value);
            }
            let point = space.clamp(&point).map_err(RunError::at("variables"))?;
            state.hypothesis = Some(hypothesis);
            (variables, frozen, Some(point))
        } else {
            (all_dims.clone(), ParameterVector::new(), None)
        };

        let mcts = MCTSConfig {
            iterations: shares[(t - 1) as usize],
            exploration_constant: config.mcts.exploration_constant,
            max_depth: config.mcts.max_depth,
            seed: derive_seed(config.seed, t),
            initial_sample,
        };
        let (records, _) =
            optimize_and_log(&context, &lab, &space, &frozen, &search_dims, &mcts, t)?;
        state.record(records);

        let analysis = analyze(&state.history, &search_dims, 2)
            .map_err(RunError::at("analysis"))?;
        context
            .borrow_mut()
            .writer
            .append(EventKind::Analysis, t, &analysis)?;

        let report = agents
            .write_report(
                &state.goal,
                &state.constraints,
                state.insights.as_ref().expect("set at t = 1"),
                state.hypothesis.as_ref().filter(|_| with_hypotheses),
                &analysis,
                t,
            )
            .map_err(RunError::at("report"))?;
        let file = format!("report_t{t}.md");
        std::fs::write(config.output_dir.join(&file), &report)?;
        context.borrow_mut().writer.append(
            EventKind::Report,
            t,
            &json!({"file": file, "markdown": report}),
        )?;
        state.reports.push(report);
    }

    let summary = finish_run(config, &context, &state.history)?;
    Ok((summary, agents.transcript()))
}
