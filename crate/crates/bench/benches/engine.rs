use std::hint::black_box;

use colorgrid::agents::astar_leader_act;
use colorgrid::harness::{env_seed, make_team, Team};
use colorgrid::observation::encode;
use colorgrid::pathfinding::astar_path;
use colorgrid::rng::Rng;
use colorgrid::{EnvConfig, PolicyKind, VecEnv};
use colorgrid_bench::{maze, random_actions, warmed_env};
use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use rand::SeedableRng;

fn step(c: &mut Criterion) {
    let mut g = c.benchmark_group("step");
    g.throughput(Throughput::Elements(1));
    g.bench_function("random_32x32", |b| {
        let mut env = warmed_env(1, 1000);
        let mut rng = Rng::seed_from_u64(2);
        b.iter(|| env.step(black_box(&random_actions(&mut rng)), 0).unwrap());
    });

    let cfg = EnvConfig::default();
    let n = 16;
    g.throughput(Throughput::Elements(n as u64));
    for (name, leader, follower) in [
        ("vec16_random", PolicyKind::Random, PolicyKind::Random),
        ("vec16_astar", PolicyKind::AStarLeader, PolicyKind::AStarCopier),
    ] {
        g.bench_function(name, |b| {
            let mut venv = VecEnv::new(&cfg, n, 3).unwrap();
            let mut teams: Vec<Team> = (0..n).map(|i| make_team(&cfg, leader, follower, env_seed(3, i))).collect();
            b.iter(|| venv.step_policies(&mut teams).unwrap());
        });
    }
    g.finish();
}

fn astar(c: &mut Criterion) {
    let mut g = c.benchmark_group("astar");
    for size in [8, 32] {
        let (walls, start, targets) = maze(size, 0.2, 4, size as u64);
        g.bench_function(format!("maze_{size}x{size}"), |b| {
            b.iter(|| astar_path(size, size, start, black_box(&targets), |c| walls[c.row * size + c.col]))
        });
    }
    let env = warmed_env(4, 500);
    g.bench_function("leader_plan_32x32", |b| b.iter(|| astar_leader_act(black_box(env.state()), 0)));
    g.finish();
}

fn observation(c: &mut Criterion) {
    let env = warmed_env(5, 1000);
    let mut g = c.benchmark_group("encode");
    g.bench_function("full_32x32", |b| b.iter(|| encode(black_box(env.state()), 0, env.config())));
    let cropped = EnvConfig {
        observation: colorgrid::ObservationConfig { view_radius: Some(5), ..Default::default() },
        ..env.config().clone()
    };
    g.bench_function("crop_r5", |b| b.iter(|| encode(black_box(env.state()), 1, &cropped)));
    g.finish();
}

criterion_group!(benches, step, astar, observation);
criterion_main!(benches);
