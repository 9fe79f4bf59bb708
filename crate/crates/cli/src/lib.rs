//! The `colorgrid` command: evaluate baselines, record and replay episodes,
//! and measure engine throughput.

mod settings;

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::thread;
use std::time::{Duration, Instant};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use colorgrid::harness::{make_team, Team, VecEnv};
use colorgrid::trajectory::{record_episode, render_ascii, replay, TrajectoryRecord};
use colorgrid::{evaluate, EvalSpec, PolicyKind};
use serde::Serialize;
use serde_json::json;

pub use settings::{CommandDefaults, Overrides, RunSpec};

/// Bad flags or config values. Exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "colorgrid", version, about = "ColorGrid environment: baselines, replays and benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a leader/follower pair over seeded batches of environments.
    Evaluate(RunArgs),
    /// Run one episode, optionally recording it.
    Run(RunArgs),
    /// Render a recorded trajectory as ASCII frames.
    Replay(ReplayArgs),
    /// Measure environment steps per second.
    Bench(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub overrides: Overrides,
    /// Write the trajectory of the first episode to this file.
    #[arg(long, value_name = "PATH")]
    pub record: Option<PathBuf>,
    /// Write JSON-lines output here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Trajectory file written by `run --record`.
    #[arg(long, value_name = "PATH")]
    pub replay: PathBuf,
    /// Print only the frame after this many steps (0 is the initial state).
    #[arg(long)]
    pub step: Option<usize>,
    /// Pause between frames, for terminal playback.
    #[arg(long = "delay-ms", default_value_t = 0)]
    pub delay_ms: u64,
    /// Highlight goal-colored blocks with ANSI reverse video.
    #[arg(long)]
    pub color: bool,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Run(args) => cmd_run(args),
        Command::Replay(args) => cmd_replay(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(out: &mut dyn Write, record: &impl Serialize) -> anyhow::Result<()> {
    serde_json::to_writer(&mut *out, record)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct Header<'a> {
    record: &'static str,
    command: &'static str,
    version: &'static str,
    #[serde(flatten)]
    spec: &'a RunSpec,
}

fn start(command: &'static str, args: &RunArgs, defaults: CommandDefaults) -> anyhow::Result<(RunSpec, Box<dyn Write>)> {
    let spec = RunSpec::resolve(args.overrides.clone(), defaults)?;
    if spec.seed_from_entropy {
        eprintln!("seed: {} (drawn from entropy; pass --seed {} to reproduce)", spec.seed, spec.seed);
    }
    let mut out = output(&args.out)?;
    emit(&mut out, &Header { record: "header", command, version: env!("CARGO_PKG_VERSION"), spec: &spec })?;
    Ok((spec, out))
}

pub fn cmd_evaluate(args: RunArgs) -> anyhow::Result<()> {
    let defaults =
        CommandDefaults { leader: PolicyKind::AStarLeader, follower: PolicyKind::AStarCopier, horizon: 128, envs: 16 };
    let (spec, mut out) = start("evaluate", &args, defaults)?;
    let eval = EvalSpec { n_envs: spec.envs, horizon: spec.horizon, n_seeds: spec.seeds, base_seed: spec.seed };
    let report = evaluate(&spec.config, spec.leader, spec.follower, eval)?;
    if let Some(path) = &args.record {
        // The first evaluated episode, re-run with full recording.
        let first = &report.episodes[0];
        let mut cfg = colorgrid::EnvConfig { seed: first.seed, ..spec.config.clone() };
        cfg.shaping.annealing = None;
        let mut team = make_team(&cfg, spec.leader, spec.follower, first.seed);
        let (record, _) = record_episode(&cfg, &mut team, spec.horizon, 0)?;
        record.save(path).with_context(|| format!("writing {}", path.display()))?;
    }
    emit(
        &mut out,
        &json!({
            "record": "summary",
            "episodes": report.episodes.len(),
            "mean_sum_reward": report.mean_sum_reward,
            "std_sum_reward": report.std_sum_reward,
            "mean_per_agent_reward": report.mean_per_agent_reward,
            "mean_goal_collections": report.mean_goal_collections,
            "mean_incorrect_collections": report.mean_incorrect_collections,
            "mean_goal_switches": report.mean_goal_switches,
        }),
    )?;
    out.flush()?;
    Ok(())
}

pub fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let defaults =
        CommandDefaults { leader: PolicyKind::AStarLeader, follower: PolicyKind::AStarCopier, horizon: 128, envs: 1 };
    let (spec, mut out) = start("run", &args, defaults)?;
    let mut team = make_team(&spec.config, spec.leader, spec.follower, spec.seed);
    let (record, metrics) = record_episode(&spec.config, &mut team, spec.horizon, 0)?;
    if let Some(path) = &args.record {
        record.save(path).with_context(|| format!("writing {}", path.display()))?;
    }
    emit(&mut out, &json!({ "record": "summary", "metrics": metrics }))?;
    out.flush()?;
    Ok(())
}

pub fn cmd_replay(args: ReplayArgs) -> anyhow::Result<()> {
    let record = TrajectoryRecord::load(&args.replay).with_context(|| format!("loading {}", args.replay.display()))?;
    let states = replay(&record)?;
    let horizon = record.steps.len();
    if let Some(step) = args.step {
        if step > horizon {
            return Err(UsageError(format!("--step {step} is past the recorded horizon {horizon}")).into());
        }
    }
    let mut out = io::stdout().lock();
    emit(
        &mut out,
        &json!({
            "record": "header",
            "command": "replay",
            "file": args.replay,
            "seed": record.header.config.seed,
            "config": record.header.config,
            "policies": record.header.policies,
            "horizon": horizon,
        }),
    )?;
    // Frame t is the state after t steps; playback shows frames 1..=horizon.
    let frames: Vec<usize> = match args.step {
        Some(s) => vec![s],
        None => (1..=horizon).collect(),
    };
    for (i, &t) in frames.iter().enumerate() {
        if i > 0 && args.delay_ms > 0 {
            thread::sleep(Duration::from_millis(args.delay_ms));
        }
        write!(out, "{}", render_ascii(&states[t], args.color))?;
        writeln!(out)?;
        out.flush()?;
    }
    Ok(())
}

pub fn cmd_bench(args: RunArgs) -> anyhow::Result<()> {
    let defaults =
        CommandDefaults { leader: PolicyKind::Random, follower: PolicyKind::Random, horizon: 10_000, envs: 1 };
    let (spec, mut out) = start("bench", &args, defaults)?;
    let mut venv = VecEnv::new(&spec.config, spec.envs, spec.seed)?;
    let mut teams: Vec<Team> = venv
        .envs()
        .iter()
        .map(|env| make_team(&spec.config, spec.leader, spec.follower, env.config().seed))
        .collect();
    let started = Instant::now();
    for _ in 0..spec.horizon {
        venv.step_policies(&mut teams)?;
    }
    let secs = started.elapsed().as_secs_f64();
    let total = (spec.envs * spec.horizon) as f64;
    emit(
        &mut out,
        &json!({
            "record": "summary",
            "envs": spec.envs,
            "steps_per_env": spec.horizon,
            "seconds": secs,
            "steps_per_second": total / secs,
            "steps_per_second_per_env": total / secs / spec.envs as f64,
        }),
    )?;
    out.flush()?;
    Ok(())
}
