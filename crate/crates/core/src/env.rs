//! World state and the single-step transition.
//!
//! One step resolves in a fixed order: simultaneous movement with
//! leader-priority conflict resolution, block collection, respawn of every
//! collected block, the goal-switch draw, then the timestep increment.

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, EnvConfig};
use crate::observation::{self, Observation};
use crate::rng::{self, Rng, Stream};
use crate::shaping::{self, Role};
use crate::types::{Action, BlockColor, Cell, NUM_COLORS};

#[derive(Debug, Error)]
pub enum EnvError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("expected {expected} actions, got {got}")]
    ActionCount { expected: usize, got: usize },
    #[error("no empty cell left to respawn a block")]
    NoEmptyCell,
    #[error("invalid state: {0}")]
    InvalidState(String),
}

/// One block pickup during a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collection {
    pub agent: usize,
    pub cell: Cell,
    pub color: BlockColor,
    /// Judged against the goal in force while the agent moved.
    pub was_goal: bool,
    /// Where the replacement block of the same color appeared.
    pub respawned_at: Cell,
}

/// Result of the per-step goal draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoalDraw {
    /// The goal was redrawn (possibly to the same color).
    pub resampled: bool,
    /// The goal color actually changed.
    pub changed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Block-collection reward per agent, after annealing, before shaping.
    pub base_rewards: Vec<f64>,
    pub distance_terms: Vec<f64>,
    pub field_terms: Vec<f64>,
    /// `base + distance + field` per agent.
    pub shaped_rewards: Vec<f64>,
    /// Sum of the shaped per-agent terms; every agent receives this signal.
    pub shared_reward: f64,
    pub collections: Vec<Collection>,
    pub goal_resampled: bool,
    pub goal_switched: bool,
    pub new_goal: BlockColor,
    pub anneal_coefficient: f64,
}

impl StepOutcome {
    /// Sum of unshaped block rewards over agents.
    pub fn base_shared(&self) -> f64 {
        self.base_rewards.iter().sum()
    }
}

const EMPTY: u8 = 0;

#[inline]
fn encode_block(color: BlockColor) -> u8 {
    color.index() as u8 + 1
}

#[inline]
fn decode_block(raw: u8) -> Option<BlockColor> {
    raw.checked_sub(1).and_then(BlockColor::new)
}

/// Complete world state. Agents are stored leaders first.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    width: usize,
    height: usize,
    blocks: Vec<u8>,
    agents: Vec<Cell>,
    num_leaders: usize,
    goal: BlockColor,
    timestep: u64,
    color_counts: [usize; NUM_COLORS],
    respawn_rng: Rng,
    goal_rng: Rng,
}

impl GridState {
    /// Fresh episode: blocks split evenly among the colors and placed in
    /// distinct uniform cells, agents on distinct uniform empty cells, goal
    /// uniform over the colors.
    pub fn reset(cfg: &EnvConfig, seed: u64) -> Result<Self, EnvError> {
        cfg.validate()?;
        let cells = cfg.cells();
        let total = cfg.total_blocks();
        let per_color = total / NUM_COLORS;
        let n_agents = cfg.num_agents();

        let mut placement = rng::stream(seed, Stream::Placement);
        let picks = index::sample(&mut placement, cells, total + n_agents);

        let mut blocks = vec![EMPTY; cells];
        let mut agents = Vec::with_capacity(n_agents);
        for (i, idx) in picks.into_iter().enumerate() {
            if i < total {
                blocks[idx] = (i / per_color) as u8 + 1;
            } else {
                agents.push(Cell::new(idx / cfg.width, idx % cfg.width));
            }
        }

        let mut goal_rng = rng::stream(seed, Stream::Goal);
        let goal = BlockColor::ALL[goal_rng.gen_range(0..NUM_COLORS)];

        Ok(GridState {
            width: cfg.width,
            height: cfg.height,
            blocks,
            agents,
            num_leaders: cfg.num_leaders,
            goal,
            timestep: 0,
            color_counts: [per_color; NUM_COLORS],
            respawn_rng: rng::stream(seed, Stream::Respawn),
            goal_rng,
        })
    }

    /// Builds a state from an explicit layout, with random streams seeded by
    /// `seed`. `blocks` is row-major.
    pub fn from_parts(
        width: usize,
        height: usize,
        blocks: &[Option<BlockColor>],
        agents: Vec<Cell>,
        num_leaders: usize,
        goal: BlockColor,
        seed: u64,
    ) -> Result<Self, EnvError> {
        if blocks.len() != width * height {
            return Err(EnvError::InvalidState(format!(
                "{} block entries for a {width}x{height} grid",
                blocks.len()
            )));
        }
        if num_leaders > agents.len() {
            return Err(EnvError::InvalidState("more leaders than agents".into()));
        }
        let mut raw = vec![EMPTY; width * height];
        let mut color_counts = [0; NUM_COLORS];
        for (slot, b) in raw.iter_mut().zip(blocks) {
            if let Some(c) = b {
                *slot = encode_block(*c);
                color_counts[c.index()] += 1;
            }
        }
        for (i, a) in agents.iter().enumerate() {
            if a.row >= height || a.col >= width {
                return Err(EnvError::InvalidState(format!("agent {i} at {a} is off the grid")));
            }
            if raw[a.row * width + a.col] != EMPTY {
                return Err(EnvError::InvalidState(format!("agent {i} at {a} stands on a block")));
            }
            if agents[..i].contains(a) {
                return Err(EnvError::InvalidState(format!("two agents share {a}")));
            }
        }
        Ok(GridState {
            width,
            height,
            blocks: raw,
            agents,
            num_leaders,
            goal,
            timestep: 0,
            color_counts,
            respawn_rng: rng::stream(seed, Stream::Respawn),
            goal_rng: rng::stream(seed, Stream::Goal),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn goal(&self) -> BlockColor {
        self.goal
    }

    pub fn timestep(&self) -> u64 {
        self.timestep
    }

    pub fn agents(&self) -> &[Cell] {
        &self.agents
    }

    pub fn num_leaders(&self) -> usize {
        self.num_leaders
    }

    pub fn role(&self, agent: usize) -> Role {
        if agent < self.num_leaders {
            Role::Leader
        } else {
            Role::Follower
        }
    }

    #[inline]
    fn index_of(&self, cell: Cell) -> usize {
        cell.row * self.width + cell.col
    }

    fn cell_of(&self, index: usize) -> Cell {
        Cell::new(index / self.width, index % self.width)
    }

    #[inline]
    pub fn block_at(&self, cell: Cell) -> Option<BlockColor> {
        decode_block(self.blocks[self.index_of(cell)])
    }

    pub fn agent_at(&self, cell: Cell) -> Option<usize> {
        self.agents.iter().position(|&a| a == cell)
    }

    /// No block and no agent.
    pub fn is_empty(&self, cell: Cell) -> bool {
        self.blocks[self.index_of(cell)] == EMPTY && self.agent_at(cell).is_none()
    }

    /// Block cells of every color in scan order.
    pub fn block_cells(&self) -> impl Iterator<Item = (Cell, BlockColor)> + '_ {
        self.blocks
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| decode_block(b).map(|c| (self.cell_of(i), c)))
    }

    /// Tracked per-color block counts.
    pub fn color_counts(&self) -> [usize; NUM_COLORS] {
        self.color_counts
    }

    /// Per-color counts recomputed from the grid itself.
    pub fn count_blocks(&self) -> [usize; NUM_COLORS] {
        let mut counts = [0; NUM_COLORS];
        for &b in &self.blocks {
            if let Some(c) = decode_block(b) {
                counts[c.index()] += 1;
            }
        }
        counts
    }

    pub fn empty_cell_count(&self) -> usize {
        self.width * self.height - self.color_counts.iter().sum::<usize>() - self.agents.len()
    }

    /// Respawn stream, exposed so an external reference model can mirror draws.
    pub fn respawn_rng(&self) -> &Rng {
        &self.respawn_rng
    }

    pub fn goal_rng(&self) -> &Rng {
        &self.goal_rng
    }

    /// Places one block of `color` on a cell drawn uniformly from the cells
    /// holding neither a block nor an agent. The draw is an index into those
    /// cells in scan order.
    pub fn respawn_block(&mut self, color: BlockColor) -> Result<Cell, EnvError> {
        let n_empty = self.empty_cell_count();
        if n_empty == 0 {
            return Err(EnvError::NoEmptyCell);
        }
        let mut k = self.respawn_rng.gen_range(0..n_empty);
        for i in 0..self.blocks.len() {
            if self.blocks[i] != EMPTY {
                continue;
            }
            let cell = self.cell_of(i);
            if self.agents.contains(&cell) {
                continue;
            }
            if k == 0 {
                self.blocks[i] = encode_block(color);
                self.color_counts[color.index()] += 1;
                return Ok(cell);
            }
            k -= 1;
        }
        Err(EnvError::InvalidState("tracked block counts disagree with the grid".into()))
    }

    /// With probability `resample_probability`, redraws the goal uniformly
    /// from all colors.
    pub fn maybe_switch_goal(&mut self, resample_probability: f64) -> GoalDraw {
        if !self.goal_rng.gen_bool(resample_probability) {
            return GoalDraw { resampled: false, changed: false };
        }
        let next = BlockColor::ALL[self.goal_rng.gen_range(0..NUM_COLORS)];
        let changed = next != self.goal;
        self.goal = next;
        GoalDraw { resampled: true, changed }
    }

    /// Cell each agent ends up in. Moves off the grid or into a cell occupied
    /// by another agent at the start of the step are blocked; when several
    /// agents target the same cell the lowest index (leaders first) wins.
    fn resolve_moves(&self, actions: &[Action], out: &mut Vec<Cell>) {
        out.clear();
        for (i, (&from, &action)) in self.agents.iter().zip(actions).enumerate() {
            let to = match from.step(action, self.height, self.width) {
                Some(to) if !self.agents.contains(&to) && !out[..i].contains(&to) => to,
                _ => from,
            };
            out.push(to);
        }
    }

    /// Advances one step. `global_timestep` drives penalty annealing and
    /// timed shaping; it is not the episode timestep.
    pub fn step(
        &mut self,
        cfg: &EnvConfig,
        actions: &[Action],
        global_timestep: u64,
    ) -> Result<StepOutcome, EnvError> {
        let n = self.agents.len();
        if actions.len() != n {
            return Err(EnvError::ActionCount { expected: n, got: actions.len() });
        }
        let coeff = shaping::anneal_coefficient(global_timestep, &cfg.shaping);

        let mut targets = Vec::with_capacity(n);
        self.resolve_moves(actions, &mut targets);

        let mut base_rewards = vec![0.0; n];
        let mut pending = Vec::new();
        for (i, &to) in targets.iter().enumerate() {
            if to == self.agents[i] {
                continue;
            }
            self.agents[i] = to;
            let idx = self.index_of(to);
            if let Some(color) = decode_block(self.blocks[idx]) {
                self.blocks[idx] = EMPTY;
                self.color_counts[color.index()] -= 1;
                base_rewards[i] = shaping::base_reward(color, self.goal, cfg, coeff);
                pending.push((i, to, color));
            }
        }

        let mut collections = Vec::with_capacity(pending.len());
        for (agent, cell, color) in pending {
            let respawned_at = self.respawn_block(color)?;
            collections.push(Collection {
                agent,
                cell,
                color,
                was_goal: color == self.goal,
                respawned_at,
            });
        }

        let distance_terms = self.distance_terms(cfg, global_timestep);
        let field_terms: Vec<f64> = match cfg.shaping.potential_field {
            Some(field) => {
                let scale = field.resolved_scale(cfg);
                self.agents
                    .iter()
                    .map(|&a| shaping::field_value(self, a, field.radius, scale))
                    .collect()
            }
            None => vec![0.0; n],
        };

        let shaped_rewards: Vec<f64> = (0..n)
            .map(|i| base_rewards[i] + distance_terms[i] + field_terms[i])
            .collect();
        let shared_reward = shaped_rewards.iter().sum();

        let draw = self.maybe_switch_goal(cfg.goal_resample_probability);
        self.timestep += 1;

        Ok(StepOutcome {
            base_rewards,
            distance_terms,
            field_terms,
            shaped_rewards,
            shared_reward,
            collections,
            goal_resampled: draw.resampled,
            goal_switched: draw.changed,
            new_goal: self.goal,
            anneal_coefficient: coeff,
        })
    }

    /// Each agent of the penalised role is measured against the nearest agent
    /// of the other role.
    fn distance_terms(&self, cfg: &EnvConfig, global_timestep: u64) -> Vec<f64> {
        let n = self.agents.len();
        let mut terms = vec![0.0; n];
        let Some(d) = cfg.shaping.distance else {
            return terms;
        };
        if d.until.is_some_and(|until| global_timestep >= until) {
            return terms;
        }
        for (i, term) in terms.iter_mut().enumerate() {
            if self.role(i) != d.applies_to {
                continue;
            }
            let me = self.agents[i];
            let nearest = (0..n)
                .filter(|&j| self.role(j) != d.applies_to)
                .map(|j| self.agents[j])
                .min_by_key(|&other| me.manhattan(other));
            if let Some(other) = nearest {
                let (leader, follower) = match d.applies_to {
                    Role::Leader => (me, other),
                    Role::Follower => (other, me),
                };
                *term = shaping::distance_penalty(leader, follower, &d);
            }
        }
        terms
    }

    /// FNV-1a digest of everything that determines the future of the episode:
    /// layout, agents, goal, timestep and random stream positions.
    pub fn state_hash(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write_u64(self.width as u64);
        h.write_u64(self.height as u64);
        h.write(&self.blocks);
        for a in &self.agents {
            h.write_u64(a.row as u64);
            h.write_u64(a.col as u64);
        }
        h.write_u64(self.num_leaders as u64);
        h.write_u64(self.goal.index() as u64);
        h.write_u64(self.timestep);
        h.write(&self.respawn_rng.get_word_pos().to_le_bytes());
        h.write(&self.goal_rng.get_word_pos().to_le_bytes());
        h.finish()
    }
}

struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    fn write_u64(&mut self, v: u64) {
        self.write(&v.to_le_bytes());
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// An environment instance: a validated config plus its live state.
#[derive(Debug, Clone)]
pub struct ColorGrid {
    config: EnvConfig,
    state: GridState,
}

impl ColorGrid {
    /// Validates `config` and resets with `config.seed`.
    pub fn new(config: EnvConfig) -> Result<Self, EnvError> {
        let state = GridState::reset(&config, config.seed)?;
        Ok(ColorGrid { config, state })
    }

    pub fn reset(&mut self, seed: u64) {
        self.state = GridState::reset(&self.config, seed).expect("config validated at construction");
    }

    pub fn step(&mut self, actions: &[Action], global_timestep: u64) -> Result<StepOutcome, EnvError> {
        self.state.step(&self.config, actions, global_timestep)
    }

    pub fn observe(&self, agent: usize) -> Observation {
        observation::encode(&self.state, agent, &self.config)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn state(&self) -> &GridState {
        &self.state
    }

    pub fn num_agents(&self) -> usize {
        self.state.agents.len()
    }
}
