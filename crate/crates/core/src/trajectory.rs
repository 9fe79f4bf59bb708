//! Episode recording, bit-exact replay and ASCII rendering.
//!
//! # File format
//!
//! UTF-8, one JSON object per line.
//!
//! Line 1 is the header:
//!
//! - `format`: always `"colorgrid-trajectory"`
//! - `version`: format version, currently `1`
//! - `config`: the full [`EnvConfig`], including `seed`
//! - `global_timestep_start`: global timestep of the first step (annealing input)
//! - `policies`: policy name per agent slot, leaders first
//! - `horizon`: number of step lines that follow
//! - `initial`: `{goal, positions, hash}` of the state after reset
//!
//! Each following line is one step:
//!
//! - `t`: episode step index, starting at 0
//! - `actions`: `"up" | "down" | "left" | "right"` per agent
//! - `collections`: `{agent, cell, color, was_goal, respawned_at}` objects
//! - `goal`, `goal_switched`: goal after the step and whether it changed
//! - `positions`: agent cells after the step
//! - `base_rewards`, `shaped_rewards`: per agent
//! - `hash`: 16 hex digits of [`GridState::state_hash`] after the step
//!
//! Replay needs only the config, seed and actions; every other field is
//! checked against the re-simulated state.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::EnvConfig;
use crate::env::{Collection, ColorGrid, EnvError, GridState, StepOutcome};
use crate::harness::{team_actions, EpisodeMetrics, Team};
use crate::types::{Action, BlockColor, Cell};

pub const FORMAT: &str = "colorgrid-trajectory";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("trajectory file is empty")]
    Empty,
    #[error("bad header at byte {offset}: {message}")]
    Header { offset: usize, message: String },
    #[error("unsupported trajectory version {found} (supported: {supported})")]
    Version { found: u64, supported: u32 },
    #[error("bad entry for step {step} at byte {offset}: {message}")]
    Entry { step: usize, offset: usize, message: String },
    #[error("truncated trajectory: header promises {expected} steps, found {found} (file ends at byte {offset})")]
    Truncated { expected: usize, found: usize, offset: usize },
    #[error("replay diverged at step {step}: {field} differs from the record")]
    Divergence { step: usize, field: &'static str },
    #[error(transparent)]
    Env(#[from] EnvError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub goal: BlockColor,
    pub positions: Vec<Cell>,
    pub hash: String,
}

impl Snapshot {
    fn of(state: &GridState) -> Self {
        Snapshot { goal: state.goal(), positions: state.agents().to_vec(), hash: hex_hash(state) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    pub format: String,
    pub version: u32,
    pub config: EnvConfig,
    pub global_timestep_start: u64,
    pub policies: Vec<String>,
    pub horizon: usize,
    pub initial: Snapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEntry {
    pub t: usize,
    pub actions: Vec<Action>,
    pub collections: Vec<Collection>,
    pub goal: BlockColor,
    pub goal_switched: bool,
    pub positions: Vec<Cell>,
    pub base_rewards: Vec<f64>,
    pub shaped_rewards: Vec<f64>,
    pub hash: String,
}

impl StepEntry {
    fn new(t: usize, actions: Vec<Action>, out: &StepOutcome, state: &GridState) -> Self {
        StepEntry {
            t,
            actions,
            collections: out.collections.clone(),
            goal: state.goal(),
            goal_switched: out.goal_switched,
            positions: state.agents().to_vec(),
            base_rewards: out.base_rewards.clone(),
            shaped_rewards: out.shaped_rewards.clone(),
            hash: hex_hash(state),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub header: TrajectoryHeader,
    pub steps: Vec<StepEntry>,
}

pub fn hex_hash(state: &GridState) -> String {
    format!("{:016x}", state.state_hash())
}

/// Runs `team` for `horizon` steps on a fresh environment seeded with
/// `config.seed`, recording every step.
pub fn record_episode(
    config: &EnvConfig,
    team: &mut Team,
    horizon: usize,
    global_timestep_start: u64,
) -> Result<(TrajectoryRecord, EpisodeMetrics), EnvError> {
    let mut env = ColorGrid::new(config.clone())?;
    for p in team.iter_mut() {
        p.reset();
    }
    let header = TrajectoryHeader {
        format: FORMAT.to_string(),
        version: VERSION,
        config: config.clone(),
        global_timestep_start,
        policies: team.iter().map(|p| p.name().to_string()).collect(),
        horizon,
        initial: Snapshot::of(env.state()),
    };
    let mut metrics = EpisodeMetrics::new(config.seed, env.num_agents());
    let mut steps = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let actions = team_actions(&env, team);
        let out = env.step(&actions, global_timestep_start + t as u64)?;
        metrics.record(&out);
        steps.push(StepEntry::new(t, actions, &out, env.state()));
    }
    Ok((TrajectoryRecord { header, steps }, metrics))
}

impl TrajectoryRecord {
    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        serde_json::to_writer(&mut w, &self.header)?;
        w.write_all(b"\n")?;
        for s in &self.steps {
            serde_json::to_writer(&mut w, s)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(io::BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TrajectoryError> {
        let bytes = std::fs::read(path)?;
        Self::parse(&bytes)
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, TrajectoryError> {
        let mut lines = Lines { bytes, pos: 0 };
        let (offset, header_line) = lines.next().ok_or(TrajectoryError::Empty)?;
        let header = parse_header(header_line, offset)?;

        let mut steps = Vec::with_capacity(header.horizon);
        for (offset, line) in lines.by_ref() {
            let step = steps.len();
            let entry: StepEntry = serde_json::from_slice(line).map_err(|e| TrajectoryError::Entry {
                step,
                offset,
                message: e.to_string(),
            })?;
            if entry.t != step {
                return Err(TrajectoryError::Entry {
                    step,
                    offset,
                    message: format!("step index {} out of sequence", entry.t),
                });
            }
            if entry.actions.len() != header.config.num_agents() {
                return Err(TrajectoryError::Entry {
                    step,
                    offset,
                    message: format!(
                        "{} actions for {} agents",
                        entry.actions.len(),
                        header.config.num_agents()
                    ),
                });
            }
            steps.push(entry);
        }
        if steps.len() != header.horizon {
            return Err(TrajectoryError::Truncated {
                expected: header.horizon,
                found: steps.len(),
                offset: bytes.len(),
            });
        }
        Ok(TrajectoryRecord { header, steps })
    }
}

fn parse_header(line: &[u8], offset: usize) -> Result<TrajectoryHeader, TrajectoryError> {
    let bad = |message: String| TrajectoryError::Header { offset, message };
    let value: serde_json::Value = serde_json::from_slice(line).map_err(|e| bad(e.to_string()))?;
    if value.get("format").and_then(|f| f.as_str()) != Some(FORMAT) {
        return Err(bad(format!("missing or wrong format tag (expected \"{FORMAT}\")")));
    }
    let version = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| bad("missing version".into()))?;
    if version != u64::from(VERSION) {
        return Err(TrajectoryError::Version { found: version, supported: VERSION });
    }
    serde_json::from_value(value).map_err(|e| bad(e.to_string()))
}

/// Non-empty lines with their starting byte offsets.
struct Lines<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Iterator for Lines<'a> {
    type Item = (usize, &'a [u8]);

    fn next(&mut self) -> Option<Self::Item> {
        while self.pos < self.bytes.len() {
            let start = self.pos;
            let rest = &self.bytes[start..];
            let len = rest.iter().position(|&b| b == b'\n').unwrap_or(rest.len());
            self.pos = start + len + 1;
            let line = &rest[..len];
            let line = line.strip_suffix(b"\r").unwrap_or(line);
            if !line.iter().all(u8::is_ascii_whitespace) {
                return Some((start, line));
            }
        }
        None
    }
}

/// Re-simulates a record from its config, seed and actions. Returns the state
/// after reset followed by the state after every step; fails at the first
/// step whose recorded fields disagree with the simulation.
pub fn replay(record: &TrajectoryRecord) -> Result<Vec<GridState>, TrajectoryError> {
    let header = &record.header;
    let mut env = ColorGrid::new(header.config.clone())?;
    let initial = Snapshot::of(env.state());
    if initial.positions != header.initial.positions {
        return Err(TrajectoryError::Divergence { step: 0, field: "initial positions" });
    }
    if initial.goal != header.initial.goal {
        return Err(TrajectoryError::Divergence { step: 0, field: "initial goal" });
    }
    if initial.hash != header.initial.hash {
        return Err(TrajectoryError::Divergence { step: 0, field: "initial hash" });
    }
    let mut states = Vec::with_capacity(record.steps.len() + 1);
    states.push(env.state().clone());
    for entry in &record.steps {
        let step = entry.t;
        let out = env.step(&entry.actions, header.global_timestep_start + step as u64)?;
        let s = env.state();
        let check = |ok: bool, field: &'static str| {
            if ok {
                Ok(())
            } else {
                Err(TrajectoryError::Divergence { step, field })
            }
        };
        check(s.agents() == entry.positions.as_slice(), "positions")?;
        check(out.collections == entry.collections, "collections")?;
        check(s.goal() == entry.goal && out.goal_switched == entry.goal_switched, "goal")?;
        check(out.base_rewards == entry.base_rewards, "base rewards")?;
        check(out.shaped_rewards == entry.shaped_rewards, "shaped rewards")?;
        check(hex_hash(s) == entry.hash, "state hash")?;
        states.push(s.clone());
    }
    Ok(states)
}

/// One frame: a status line, then one character per cell: `L`/`F` for
/// leaders/followers, a color digit for blocks, `.` for empty. With `ansi`,
/// goal-colored blocks are shown in reverse video.
pub fn render_ascii(state: &GridState, ansi: bool) -> String {
    let mut out = String::with_capacity((state.width() + 1) * (state.height() + 1) + 32);
    let _ = writeln!(out, "t={} goal={}", state.timestep(), state.goal());
    for row in 0..state.height() {
        for col in 0..state.width() {
            let cell = Cell::new(row, col);
            match (state.agent_at(cell), state.block_at(cell)) {
                (Some(i), _) => out.push(if i < state.num_leaders() { 'L' } else { 'F' }),
                (None, Some(c)) if ansi && c == state.goal() => {
                    let _ = write!(out, "\x1b[7m{c}\x1b[0m");
                }
                (None, Some(c)) => {
                    let _ = write!(out, "{c}");
                }
                (None, None) => out.push('.'),
            }
        }
        out.push('\n');
    }
    out
}
