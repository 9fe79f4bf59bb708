//! Per-agent tensor view of a state.
//!
//! Layout is `(plane, row, col)`, row-major, one byte per cell:
//!
//! | plane | content                                   |
//! |-------|-------------------------------------------|
//! | 0..3  | blocks of color 0, 1, 2                   |
//! | 3     | leader positions (or self, relative mode)  |
//! | 4     | follower positions (or others)            |
//!
//! With a view radius the planes are an egocentric `(2r+1)` square crop;
//! cells outside the grid read as zero.

use crate::config::EnvConfig;
use crate::env::GridState;
use crate::shaping::Role;
use crate::types::{BlockColor, Cell, NUM_COLORS};

pub const NUM_PLANES: usize = NUM_COLORS + 2;
const SELF_PLANE: usize = NUM_COLORS;
const OTHER_PLANE: usize = NUM_COLORS + 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub height: usize,
    pub width: usize,
    /// `NUM_PLANES * height * width` binary values.
    pub planes: Vec<u8>,
    /// One-hot goal, or all zeros for a follower in asymmetric mode.
    pub goal_vector: [u8; NUM_COLORS],
    /// True goal index; only for auxiliary supervision.
    pub goal_label: u8,
}

impl Observation {
    pub fn shape(&self) -> (usize, usize, usize) {
        (NUM_PLANES, self.height, self.width)
    }

    pub fn plane(&self, p: usize) -> &[u8] {
        let n = self.height * self.width;
        &self.planes[p * n..(p + 1) * n]
    }

    #[inline]
    pub fn get(&self, plane: usize, row: usize, col: usize) -> u8 {
        self.planes[(plane * self.height + row) * self.width + col]
    }

    /// Planes followed by the goal vector, as `f32`.
    pub fn to_f32(&self) -> Vec<f32> {
        self.planes
            .iter()
            .chain(self.goal_vector.iter())
            .map(|&v| f32::from(v))
            .collect()
    }
}

pub fn encode(state: &GridState, agent: usize, cfg: &EnvConfig) -> Observation {
    assert!(agent < state.agents().len(), "agent index {agent} out of range");
    let me = state.agents()[agent];
    let (height, width, origin) = match cfg.observation.view_radius {
        None => (state.height(), state.width(), None),
        Some(r) => {
            let side = 2 * r + 1;
            let origin = (me.row as isize - r as isize, me.col as isize - r as isize);
            (side, side, Some(origin))
        }
    };
    let n = height * width;
    let mut planes = vec![0u8; NUM_PLANES * n];

    // Grid cell -> local (row, col) if visible.
    let local = |cell: Cell| -> Option<(usize, usize)> {
        match origin {
            None => Some((cell.row, cell.col)),
            Some((r0, c0)) => {
                let r = cell.row as isize - r0;
                let c = cell.col as isize - c0;
                (r >= 0 && c >= 0 && (r as usize) < height && (c as usize) < width)
                    .then_some((r as usize, c as usize))
            }
        }
    };

    for (cell, color) in state.block_cells() {
        if let Some((r, c)) = local(cell) {
            planes[color.index() * n + r * width + c] = 1;
        }
    }
    for (i, &pos) in state.agents().iter().enumerate() {
        let plane = if cfg.observation.relative_roles {
            if i == agent {
                SELF_PLANE
            } else {
                OTHER_PLANE
            }
        } else {
            match state.role(i) {
                Role::Leader => SELF_PLANE,
                Role::Follower => OTHER_PLANE,
            }
        };
        if let Some((r, c)) = local(pos) {
            planes[plane * n + r * width + c] = 1;
        }
    }

    let goal = state.goal();
    let mut goal_vector = [0u8; NUM_COLORS];
    if !(cfg.asymmetric && state.role(agent) == Role::Follower) {
        goal_vector[goal.index()] = 1;
    }

    Observation { height, width, planes, goal_vector, goal_label: goal.index() as u8 }
}

/// Occupancy recovered from a full-view observation in absolute-role mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedOccupancy {
    /// Row-major block colors.
    pub blocks: Vec<Option<BlockColor>>,
    pub leaders: Vec<Cell>,
    pub followers: Vec<Cell>,
}

pub fn decode(obs: &Observation) -> DecodedOccupancy {
    let (h, w) = (obs.height, obs.width);
    let mut blocks = vec![None; h * w];
    let mut leaders = Vec::new();
    let mut followers = Vec::new();
    for row in 0..h {
        for col in 0..w {
            for color in BlockColor::ALL {
                if obs.get(color.index(), row, col) == 1 {
                    blocks[row * w + col] = Some(color);
                }
            }
            if obs.get(SELF_PLANE, row, col) == 1 {
                leaders.push(Cell::new(row, col));
            }
            if obs.get(OTHER_PLANE, row, col) == 1 {
                followers.push(Cell::new(row, col));
            }
        }
    }
    DecodedOccupancy { blocks, leaders, followers }
}
