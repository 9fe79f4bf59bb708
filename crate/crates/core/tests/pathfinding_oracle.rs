mod common;

use colorgrid::agents::plan_to_color;
use colorgrid::rng::Rng;
use colorgrid::{Cell, EnvConfig, GridState};
use common::{bfs_distance, check_astar_instance};
use rand::{Rng as _, SeedableRng};

/// Every (start, target) pair on 5x5 grids across a spread of wall layouts.
#[test]
fn exhaustive_pairs_on_5x5() {
    let mut rng = Rng::seed_from_u64(5);
    for layout in 0..60 {
        let density = (layout % 6) as f64 * 0.1;
        let walls: Vec<bool> = (0..25).map(|_| rng.gen_bool(density)).collect();
        for s in 0..25 {
            if walls[s] {
                continue;
            }
            for t in 0..25 {
                check_astar_instance(5, 5, &walls, Cell::new(s / 5, s % 5), &[Cell::new(t / 5, t % 5)]).unwrap();
            }
        }
    }
}

#[test]
fn random_multi_target_8x8() {
    let mut rng = Rng::seed_from_u64(8);
    for _ in 0..500 {
        let walls: Vec<bool> = (0..64).map(|_| rng.gen_bool(0.3)).collect();
        let free: Vec<usize> = (0..64).filter(|&i| !walls[i]).collect();
        if free.is_empty() {
            continue;
        }
        let s = free[rng.gen_range(0..free.len())];
        let n_targets = rng.gen_range(1..5);
        let targets: Vec<Cell> = (0..n_targets)
            .map(|_| {
                let t = rng.gen_range(0..64);
                Cell::new(t / 8, t % 8)
            })
            .collect();
        check_astar_instance(8, 8, &walls, Cell::new(s / 8, s % 8), &targets).unwrap();
    }
}

/// Leader planning on full-size states agrees with BFS under the planner's
/// obstacle rules.
#[test]
fn leader_plans_on_32x32_are_optimal() {
    let cfg = EnvConfig { block_density: 0.3, ..Default::default() };
    for seed in 0..50 {
        let s = GridState::reset(&cfg, seed).unwrap();
        let goal = s.goal();
        let targets: Vec<Cell> = s.block_cells().filter(|&(_, c)| c == goal).map(|(c, _)| c).collect();
        let blocked = |c: Cell| s.block_at(c).is_some_and(|b| b != goal) || s.agent_at(c) == Some(1);
        let expected = bfs_distance(32, 32, s.agents()[0], &targets, &blocked);
        assert_eq!(plan_to_color(&s, 0, goal).map(|p| p.len()), expected);
    }
}
