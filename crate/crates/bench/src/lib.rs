//! Fixtures shared by the engine benchmarks.

use colorgrid::agents::random_act;
use colorgrid::rng::Rng;
use colorgrid::{Action, Cell, ColorGrid, EnvConfig};
use rand::{Rng as _, SeedableRng};

/// A default 32x32 environment advanced `warmup` random steps, so blocks
/// have respawned away from their initial layout.
pub fn warmed_env(seed: u64, warmup: usize) -> ColorGrid {
    let mut env = ColorGrid::new(EnvConfig { seed, ..Default::default() }).expect("default config is valid");
    let mut rng = Rng::seed_from_u64(seed);
    for _ in 0..warmup {
        env.step(&random_actions(&mut rng), 0).expect("two actions");
    }
    env
}

pub fn random_actions(rng: &mut Rng) -> [Action; 2] {
    [random_act(rng), random_act(rng)]
}

/// A `size`x`size` wall grid at `density` with a free start in one corner
/// and targets scattered over the far half.
pub fn maze(size: usize, density: f64, n_targets: usize, seed: u64) -> (Vec<bool>, Cell, Vec<Cell>) {
    let mut rng = Rng::seed_from_u64(seed);
    let mut walls: Vec<bool> = (0..size * size).map(|_| rng.gen_bool(density)).collect();
    walls[0] = false;
    let targets = (0..n_targets)
        .map(|_| Cell::new(rng.gen_range(size / 2..size), rng.gen_range(0..size)))
        .collect();
    (walls, Cell::new(0, 0), targets)
}
