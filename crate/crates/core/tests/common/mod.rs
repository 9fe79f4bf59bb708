//! Independent oracles shared by the integration and acceptance suites.
//!
//! `RefSim` is a deliberately naive re-implementation of the transition rules
//! on nested vectors. It shares nothing with the engine except the random
//! streams it is handed at construction and the draw protocol (an index into
//! the scan-ordered empty cells for respawn, a Bernoulli then a uniform color
//! for the goal).

#![allow(dead_code)]

use std::collections::VecDeque;

use colorgrid::rng::Rng;
use colorgrid::{Action, BlockColor, Cell, EnvConfig, GridState};
use rand::Rng as _;

#[derive(Debug, Clone, PartialEq)]
pub struct RefCollection {
    pub agent: usize,
    pub cell: (usize, usize),
    pub color: usize,
    pub respawned_at: (usize, usize),
}

#[derive(Clone)]
pub struct RefSim {
    pub h: usize,
    pub w: usize,
    pub grid: Vec<Vec<Option<usize>>>,
    pub agents: Vec<(usize, usize)>,
    pub goal: usize,
    pub t: u64,
    respawn: Rng,
    goal_rng: Rng,
}

impl RefSim {
    pub fn mirror(state: &GridState) -> Self {
        let (h, w) = (state.height(), state.width());
        let grid = (0..h)
            .map(|r| (0..w).map(|c| state.block_at(Cell::new(r, c)).map(|b| b.index())).collect())
            .collect();
        RefSim {
            h,
            w,
            grid,
            agents: state.agents().iter().map(|a| (a.row, a.col)).collect(),
            goal: state.goal().index(),
            t: state.timestep(),
            respawn: state.respawn_rng().clone(),
            goal_rng: state.goal_rng().clone(),
        }
    }

    /// Returns per-agent base rewards and the collections, with no annealing.
    pub fn step(&mut self, cfg: &EnvConfig, actions: &[Action]) -> (Vec<f64>, Vec<RefCollection>) {
        let old = self.agents.clone();
        let mut new: Vec<(usize, usize)> = Vec::new();
        for (i, a) in actions.iter().enumerate() {
            let (r, c) = old[i];
            let (dr, dc): (i64, i64) = match a {
                Action::Up => (-1, 0),
                Action::Down => (1, 0),
                Action::Left => (0, -1),
                Action::Right => (0, 1),
            };
            let nr = r as i64 + dr;
            let nc = c as i64 + dc;
            let mut dest = (r, c);
            if nr >= 0 && nc >= 0 && (nr as usize) < self.h && (nc as usize) < self.w {
                let cand = (nr as usize, nc as usize);
                let occupied = old.contains(&cand);
                let claimed = new.iter().enumerate().any(|(j, &d)| d == cand && d != old[j]);
                if !occupied && !claimed {
                    dest = cand;
                }
            }
            new.push(dest);
        }
        self.agents = new;

        let mut rewards = vec![0.0; actions.len()];
        let mut picked = Vec::new();
        for i in 0..actions.len() {
            if self.agents[i] == old[i] {
                continue;
            }
            let (r, c) = self.agents[i];
            if let Some(color) = self.grid[r][c].take() {
                rewards[i] = if color == self.goal { cfg.reward_goal } else { cfg.reward_incorrect };
                picked.push((i, (r, c), color));
            }
        }
        let mut collections = Vec::new();
        for (agent, cell, color) in picked {
            let mut empties = Vec::new();
            for r in 0..self.h {
                for c in 0..self.w {
                    if self.grid[r][c].is_none() && !self.agents.contains(&(r, c)) {
                        empties.push((r, c));
                    }
                }
            }
            let k = self.respawn.gen_range(0..empties.len());
            let at = empties[k];
            self.grid[at.0][at.1] = Some(color);
            collections.push(RefCollection { agent, cell, color, respawned_at: at });
        }
        if self.goal_rng.gen_bool(cfg.goal_resample_probability) {
            self.goal = self.goal_rng.gen_range(0..3usize);
        }
        self.t += 1;
        (rewards, collections)
    }

    /// Compares every observable field with the engine state.
    pub fn matches(&self, state: &GridState) -> Result<(), String> {
        for r in 0..self.h {
            for c in 0..self.w {
                let engine = state.block_at(Cell::new(r, c)).map(|b| b.index());
                if engine != self.grid[r][c] {
                    return Err(format!("block at ({r},{c}): engine {engine:?}, reference {:?}", self.grid[r][c]));
                }
            }
        }
        let positions: Vec<(usize, usize)> = state.agents().iter().map(|a| (a.row, a.col)).collect();
        if positions != self.agents {
            return Err(format!("agents: engine {positions:?}, reference {:?}", self.agents));
        }
        if state.goal().index() != self.goal {
            return Err(format!("goal: engine {}, reference {}", state.goal(), self.goal));
        }
        if state.timestep() != self.t {
            return Err("timestep".into());
        }
        Ok(())
    }
}

pub fn collections_match(engine: &[colorgrid::Collection], reference: &[RefCollection]) -> bool {
    engine.len() == reference.len()
        && engine.iter().zip(reference).all(|(e, r)| {
            e.agent == r.agent
                && (e.cell.row, e.cell.col) == r.cell
                && e.color.index() == r.color
                && (e.respawned_at.row, e.respawned_at.col) == r.respawned_at
        })
}

/// Breadth-first shortest distance to any target; targets are always enterable.
pub fn bfs_distance(
    h: usize,
    w: usize,
    start: Cell,
    targets: &[Cell],
    blocked: &dyn Fn(Cell) -> bool,
) -> Option<usize> {
    let is_target = |c: Cell| targets.contains(&c);
    let mut dist = vec![vec![usize::MAX; w]; h];
    let mut queue = VecDeque::new();
    dist[start.row][start.col] = 0;
    queue.push_back(start);
    while let Some(cur) = queue.pop_front() {
        let d = dist[cur.row][cur.col];
        if is_target(cur) {
            return Some(d);
        }
        let neighbors = [
            (cur.row.wrapping_sub(1), cur.col),
            (cur.row + 1, cur.col),
            (cur.row, cur.col.wrapping_sub(1)),
            (cur.row, cur.col + 1),
        ];
        for (r, c) in neighbors {
            if r >= h || c >= w {
                continue;
            }
            let n = Cell::new(r, c);
            if dist[r][c] != usize::MAX || (blocked(n) && !is_target(n)) {
                continue;
            }
            dist[r][c] = d + 1;
            queue.push_back(n);
        }
    }
    None
}

/// Small-grid config with enough blocks to collide often.
pub fn small_config(size: usize, density: f64, p: f64) -> EnvConfig {
    EnvConfig {
        width: size,
        height: size,
        block_density: density,
        goal_resample_probability: p,
        ..EnvConfig::default().with_preset(colorgrid::RewardPreset::Neutral)
    }
}

pub fn color(i: usize) -> BlockColor {
    BlockColor::ALL[i]
}

/// Runs A* on one walled instance and checks length against BFS and the
/// path's validity.
pub fn check_astar_instance(h: usize, w: usize, walls: &[bool], start: Cell, targets: &[Cell]) -> Result<(), String> {
    let blocked = |c: Cell| walls[c.row * w + c.col];
    let expected = bfs_distance(h, w, start, targets, &blocked);
    let got = colorgrid::pathfinding::astar_path(h, w, start, targets, blocked);
    if got.as_ref().map(|p| p.len()) != expected {
        return Err(format!(
            "start {start} targets {targets:?}: A* {:?}, BFS {expected:?}",
            got.map(|p| p.len())
        ));
    }
    if let Some(p) = got {
        let mut prev = start;
        for &s in &p.steps {
            if prev.manhattan(s) != 1 || (blocked(s) && !targets.contains(&s)) {
                return Err(format!("start {start}: invalid step {prev} -> {s}"));
            }
            prev = s;
        }
        if !targets.contains(&prev) {
            return Err(format!("start {start}: path ends off-target at {prev}"));
        }
    }
    Ok(())
}
