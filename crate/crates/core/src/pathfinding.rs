//! Multi-target A* on the 4-connected grid.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::types::{Action, Cell};

/// A route from (but excluding) the start cell to a target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub steps: Vec<Cell>,
}

impl Path {
    /// Number of moves.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn first_step(&self) -> Option<Cell> {
        self.steps.first().copied()
    }

    pub fn target(&self) -> Option<Cell> {
        self.steps.last().copied()
    }
}

/// Shortest 4-connected path from `start` to the nearest of `targets`,
/// never entering a cell for which `is_obstacle` holds (targets are always
/// enterable). The heuristic is the Manhattan distance to the nearest target,
/// which is consistent on unit-cost grids.
///
/// Among equally near targets the first in (row, col) scan order wins, and
/// frontier ties pop in scan order, so results are fully deterministic.
pub fn astar_path(
    height: usize,
    width: usize,
    start: Cell,
    targets: &[Cell],
    is_obstacle: impl Fn(Cell) -> bool,
) -> Option<Path> {
    let cells = height * width;
    let idx = |c: Cell| c.row * width + c.col;
    let targets: Vec<Cell> = targets.iter().copied().filter(|t| t.row < height && t.col < width).collect();
    if targets.is_empty() || start.row >= height || start.col >= width {
        return None;
    }
    let mut is_target = vec![false; cells];
    for &t in &targets {
        is_target[idx(t)] = true;
    }
    let heuristic = |c: Cell| targets.iter().map(|&t| c.manhattan(t)).min().unwrap_or(0) as u32;

    let mut g = vec![u32::MAX; cells];
    let mut parent = vec![usize::MAX; cells];
    let mut closed = vec![false; cells];
    let mut heap = BinaryHeap::new();

    g[idx(start)] = 0;
    heap.push(Reverse((heuristic(start), start.row, start.col, 0u32)));

    let mut bound: Option<u32> = None;
    let mut reached: Vec<Cell> = Vec::new();

    while let Some(Reverse((f, row, col, cost))) = heap.pop() {
        if bound.is_some_and(|d| f > d) {
            break;
        }
        let cell = Cell::new(row, col);
        let i = idx(cell);
        if closed[i] || cost != g[i] {
            continue;
        }
        closed[i] = true;
        if is_target[i] {
            // Keep draining nodes at this cost so every equally near target is seen.
            bound.get_or_insert(cost);
            reached.push(cell);
            continue;
        }
        for action in Action::ALL {
            let Some(next) = cell.step(action, height, width) else {
                continue;
            };
            let j = idx(next);
            if closed[j] || (!is_target[j] && is_obstacle(next)) {
                continue;
            }
            let ng = cost + 1;
            if ng < g[j] {
                g[j] = ng;
                parent[j] = i;
                let nf = ng + heuristic(next);
                if bound.is_none_or(|d| nf <= d) {
                    heap.push(Reverse((nf, next.row, next.col, ng)));
                }
            }
        }
    }

    let goal = reached.into_iter().min()?;
    let mut steps = Vec::with_capacity(g[idx(goal)] as usize);
    let mut cur = idx(goal);
    let s = idx(start);
    while cur != s {
        steps.push(Cell::new(cur / width, cur % width));
        cur = parent[cur];
    }
    steps.reverse();
    Some(Path { steps })
}
