//! Scripted baseline policies: the A* leader, the A* copying follower and a
//! uniform random policy.
//!
//! The planners treat blocks of any non-target color and the other agents
//! as walls, and replan from scratch every step.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;

use crate::env::GridState;
use crate::pathfinding::{astar_path, Path};
use crate::rng::Rng;
use crate::types::{Action, BlockColor, Cell};

/// A per-episode policy for one agent slot. Implementations may keep memory
/// between calls; [`Policy::reset`] clears it at episode start.
pub trait Policy: Send {
    fn name(&self) -> &'static str;

    fn reset(&mut self) {}

    fn act(&mut self, state: &GridState, agent: usize) -> Action;
}

/// Shortest path for `agent` to the nearest block of `color`.
pub fn plan_to_color(state: &GridState, agent: usize, color: BlockColor) -> Option<Path> {
    let me = state.agents()[agent];
    let targets: Vec<Cell> = state
        .block_cells()
        .filter(|&(_, c)| c == color)
        .map(|(cell, _)| cell)
        .collect();
    astar_path(state.height(), state.width(), me, &targets, |cell| {
        state.block_at(cell).is_some_and(|c| c != color)
            || state.agent_at(cell).is_some_and(|j| j != agent)
    })
}

fn first_move(state: &GridState, agent: usize, path: &Path) -> Option<Action> {
    path.first_step().and_then(|next| state.agents()[agent].direction_to(next))
}

/// Step to an adjacent cell holding no block and no agent, preferring Up,
/// Down, Left, Right. With none available, pick a move that is blocked (off
/// the grid or into an agent) so the agent stays put; failing that, Up.
pub fn wander_act(state: &GridState, agent: usize) -> Action {
    let me = state.agents()[agent];
    let (h, w) = (state.height(), state.width());
    Action::ALL
        .into_iter()
        .find(|&a| me.step(a, h, w).is_some_and(|n| state.is_empty(n)))
        .or_else(|| {
            Action::ALL.into_iter().find(|&a| match me.step(a, h, w) {
                None => true,
                Some(n) => state.agent_at(n).is_some(),
            })
        })
        .unwrap_or(Action::Up)
}

/// First move toward the nearest current-goal block, or [`wander_act`] when
/// none is reachable.
pub fn astar_leader_act(state: &GridState, agent: usize) -> Action {
    plan_to_color(state, agent, state.goal())
        .and_then(|p| first_move(state, agent, &p))
        .unwrap_or_else(|| wander_act(state, agent))
}

/// What the copying follower has inferred from watching the leader.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FollowerBelief {
    /// Color of the leader's most recent collection.
    pub believed_goal: Option<BlockColor>,
    pub last_leader_position: Option<Cell>,
    /// Block colors around the leader when last seen, indexed by action.
    last_leader_neighbors: [Option<BlockColor>; 4],
}

impl FollowerBelief {
    /// Folds in the current state. A leader that moved onto a cell which held
    /// a block at the previous observation collected that block.
    pub fn observe(&mut self, state: &GridState, leader: usize) {
        let now = state.agents()[leader];
        if let Some(prev) = self.last_leader_position {
            if let Some(dir) = prev.direction_to(now) {
                if let Some(color) = self.last_leader_neighbors[dir.index()] {
                    self.believed_goal = Some(color);
                }
            }
        }
        self.last_leader_position = Some(now);
        for a in Action::ALL {
            self.last_leader_neighbors[a.index()] =
                now.step(a, state.height(), state.width()).and_then(|n| state.block_at(n));
        }
    }
}

/// Copying follower: wander until the leader collects something, then route
/// greedily to the nearest block of the leader's last collected color.
/// Watches the first leader.
pub fn astar_follower_act(state: &GridState, agent: usize, belief: &FollowerBelief) -> (Action, FollowerBelief) {
    let mut next = belief.clone();
    next.observe(state, 0);
    let action = next
        .believed_goal
        .and_then(|color| plan_to_color(state, agent, color))
        .and_then(|p| first_move(state, agent, &p))
        .unwrap_or_else(|| wander_act(state, agent));
    (action, next)
}

pub fn random_act(rng: &mut impl rand::Rng) -> Action {
    Action::ALL[rng.gen_range(0..Action::ALL.len())]
}

#[derive(Debug, Clone, Default)]
pub struct AStarLeader;

impl Policy for AStarLeader {
    fn name(&self) -> &'static str {
        "astar_leader"
    }

    fn act(&mut self, state: &GridState, agent: usize) -> Action {
        astar_leader_act(state, agent)
    }
}

#[derive(Debug, Clone, Default)]
pub struct AStarCopier {
    belief: FollowerBelief,
}

impl AStarCopier {
    pub fn belief(&self) -> &FollowerBelief {
        &self.belief
    }
}

impl Policy for AStarCopier {
    fn name(&self) -> &'static str {
        "astar_copier"
    }

    fn reset(&mut self) {
        self.belief = FollowerBelief::default();
    }

    fn act(&mut self, state: &GridState, agent: usize) -> Action {
        let (action, belief) = astar_follower_act(state, agent, &self.belief);
        self.belief = belief;
        action
    }
}

#[derive(Debug, Clone)]
pub struct RandomPolicy {
    seed: u64,
    rng: Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        RandomPolicy { seed, rng: Rng::seed_from_u64(seed) }
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> &'static str {
        "random"
    }

    fn reset(&mut self) {
        self.rng = Rng::seed_from_u64(self.seed);
    }

    fn act(&mut self, _state: &GridState, _agent: usize) -> Action {
        random_act(&mut self.rng)
    }
}

/// Policy names accepted on the command line and in trajectory headers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    AStarLeader,
    AStarCopier,
    Random,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::AStarLeader, PolicyKind::AStarCopier, PolicyKind::Random];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::AStarLeader => "astar_leader",
            PolicyKind::AStarCopier => "astar_copier",
            PolicyKind::Random => "random",
        }
    }

    /// `seed` only matters for stochastic policies.
    pub fn build(self, seed: u64) -> Box<dyn Policy> {
        match self {
            PolicyKind::AStarLeader => Box::new(AStarLeader),
            PolicyKind::AStarCopier => Box::new(AStarCopier::default()),
            PolicyKind::Random => Box::new(RandomPolicy::new(seed)),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown policy '{s}' (expected one of: astar_leader, astar_copier, random)"))
    }
}
