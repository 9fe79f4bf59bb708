//! Lockstep vectorized stepping and evaluation metrics.
//!
//! Environments are independent: each owns its state and random streams and
//! is stepped on the rayon pool. The global timestep (which drives penalty
//! annealing) advances by the number of environments per vector step.

use rayon::prelude::*;
use serde::Serialize;

use crate::agents::{Policy, PolicyKind};
use crate::config::EnvConfig;
use crate::env::{ColorGrid, EnvError, StepOutcome};
use crate::observation::Observation;
use crate::rng::derive_seed;
use crate::types::Action;

/// One policy per agent slot of an environment, leaders first.
pub type Team = Vec<Box<dyn Policy>>;

/// Seed of environment `index` in a batch seeded with `base_seed`. Depends
/// only on the index, so an environment behaves the same in any batch size.
pub fn env_seed(base_seed: u64, index: usize) -> u64 {
    derive_seed(base_seed, index as u64)
}

/// Seed for the policy driving `agent` in the environment seeded `env_seed`.
pub fn policy_seed(env_seed: u64, agent: usize) -> u64 {
    derive_seed(env_seed ^ 0x5A5A_5A5A_0000_0000, agent as u64)
}

/// Builds a team with `leader` in every leader slot and `follower` elsewhere.
pub fn make_team(cfg: &EnvConfig, leader: PolicyKind, follower: PolicyKind, env_seed: u64) -> Team {
    (0..cfg.num_agents())
        .map(|i| {
            let kind = if i < cfg.num_leaders { leader } else { follower };
            kind.build(policy_seed(env_seed, i))
        })
        .collect()
}

pub struct VecEnv {
    envs: Vec<ColorGrid>,
    global_timestep: u64,
}

impl VecEnv {
    pub fn new(config: &EnvConfig, n_envs: usize, base_seed: u64) -> Result<Self, EnvError> {
        let envs = (0..n_envs)
            .map(|i| ColorGrid::new(EnvConfig { seed: env_seed(base_seed, i), ..config.clone() }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VecEnv { envs, global_timestep: 0 })
    }

    pub fn from_envs(envs: Vec<ColorGrid>) -> Self {
        VecEnv { envs, global_timestep: 0 }
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    pub fn envs(&self) -> &[ColorGrid] {
        &self.envs
    }

    pub fn global_timestep(&self) -> u64 {
        self.global_timestep
    }

    pub fn set_global_timestep(&mut self, t: u64) {
        self.global_timestep = t;
    }

    /// Resets every environment with seeds derived from `base_seed`.
    pub fn reset(&mut self, base_seed: u64) {
        for (i, env) in self.envs.iter_mut().enumerate() {
            env.reset(env_seed(base_seed, i));
        }
    }

    pub fn observe_all(&self) -> Vec<Vec<Observation>> {
        self.envs
            .par_iter()
            .map(|env| (0..env.num_agents()).map(|a| env.observe(a)).collect())
            .collect()
    }

    pub fn step(&mut self, actions: &[Vec<Action>]) -> Result<Vec<StepOutcome>, EnvError> {
        if actions.len() != self.envs.len() {
            return Err(EnvError::ActionCount { expected: self.envs.len(), got: actions.len() });
        }
        let t = self.global_timestep;
        let out = self
            .envs
            .par_iter_mut()
            .zip(actions.par_iter())
            .map(|(env, a)| env.step(a, t))
            .collect::<Result<Vec<_>, _>>()?;
        self.global_timestep += self.envs.len() as u64;
        Ok(out)
    }

    /// Each team picks actions from its environment's current state, then all
    /// environments step.
    pub fn step_policies(&mut self, teams: &mut [Team]) -> Result<Vec<StepOutcome>, EnvError> {
        if teams.len() != self.envs.len() {
            return Err(EnvError::ActionCount { expected: self.envs.len(), got: teams.len() });
        }
        let t = self.global_timestep;
        let out = self
            .envs
            .par_iter_mut()
            .zip(teams.par_iter_mut())
            .map(|(env, team)| {
                let actions = team_actions(env, team);
                env.step(&actions, t)
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.global_timestep += self.envs.len() as u64;
        Ok(out)
    }
}

pub fn team_actions(env: &ColorGrid, team: &mut Team) -> Vec<Action> {
    team.iter_mut()
        .enumerate()
        .map(|(agent, p)| p.act(env.state(), agent))
        .collect()
}

/// Tallies over one fixed-horizon episode. `sum_reward` is the net unshaped
/// block reward summed over agents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeMetrics {
    pub seed: u64,
    pub steps: u64,
    pub sum_reward: f64,
    pub per_agent_reward: Vec<f64>,
    pub shaped_sum_reward: f64,
    pub goal_collections: u64,
    pub incorrect_collections: u64,
    pub per_agent_goal_collections: Vec<u64>,
    pub per_agent_incorrect_collections: Vec<u64>,
    pub goal_switches: u64,
}

impl EpisodeMetrics {
    pub fn new(seed: u64, n_agents: usize) -> Self {
        EpisodeMetrics {
            seed,
            steps: 0,
            sum_reward: 0.0,
            per_agent_reward: vec![0.0; n_agents],
            shaped_sum_reward: 0.0,
            goal_collections: 0,
            incorrect_collections: 0,
            per_agent_goal_collections: vec![0; n_agents],
            per_agent_incorrect_collections: vec![0; n_agents],
            goal_switches: 0,
        }
    }

    pub fn record(&mut self, out: &StepOutcome) {
        self.steps += 1;
        for (acc, r) in self.per_agent_reward.iter_mut().zip(&out.base_rewards) {
            *acc += r;
        }
        self.sum_reward += out.base_shared();
        self.shaped_sum_reward += out.shared_reward;
        for c in &out.collections {
            if c.was_goal {
                self.goal_collections += 1;
                self.per_agent_goal_collections[c.agent] += 1;
            } else {
                self.incorrect_collections += 1;
                self.per_agent_incorrect_collections[c.agent] += 1;
            }
        }
        self.goal_switches += u64::from(out.goal_switched);
    }
}

/// Runs one episode of `horizon` steps from the environment's current state.
pub fn run_episode(
    env: &mut ColorGrid,
    team: &mut Team,
    horizon: usize,
    global_timestep: u64,
) -> Result<EpisodeMetrics, EnvError> {
    for p in team.iter_mut() {
        p.reset();
    }
    let mut metrics = EpisodeMetrics::new(env.config().seed, env.num_agents());
    for t in 0..horizon {
        let actions = team_actions(env, team);
        let out = env.step(&actions, global_timestep + t as u64)?;
        metrics.record(&out);
    }
    Ok(metrics)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EvalSpec {
    pub n_envs: usize,
    pub horizon: usize,
    pub n_seeds: usize,
    pub base_seed: u64,
}

impl Default for EvalSpec {
    fn default() -> Self {
        EvalSpec { n_envs: 16, horizon: 128, n_seeds: 1, base_seed: 0 }
    }
}

/// Seed of evaluation batch `index`.
pub fn batch_seed(base_seed: u64, index: usize) -> u64 {
    derive_seed(base_seed ^ 0xB47C_4000_0000_0000, index as u64)
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub spec: EvalSpec,
    pub leader: String,
    pub follower: String,
    pub episodes: Vec<EpisodeMetrics>,
    pub mean_sum_reward: f64,
    /// Population standard deviation over all episodes.
    pub std_sum_reward: f64,
    pub mean_per_agent_reward: Vec<f64>,
    pub mean_goal_collections: f64,
    pub mean_incorrect_collections: f64,
    pub mean_goal_switches: f64,
}

impl EvalReport {
    fn from_episodes(spec: EvalSpec, leader: PolicyKind, follower: PolicyKind, episodes: Vec<EpisodeMetrics>) -> Self {
        let n = episodes.len().max(1) as f64;
        let mean = episodes.iter().map(|e| e.sum_reward).sum::<f64>() / n;
        let var = episodes.iter().map(|e| (e.sum_reward - mean).powi(2)).sum::<f64>() / n;
        let n_agents = episodes.first().map_or(0, |e| e.per_agent_reward.len());
        let mean_per_agent = (0..n_agents)
            .map(|a| episodes.iter().map(|e| e.per_agent_reward[a]).sum::<f64>() / n)
            .collect();
        let avg = |f: fn(&EpisodeMetrics) -> u64| episodes.iter().map(|e| f(e) as f64).sum::<f64>() / n;
        EvalReport {
            spec,
            leader: leader.name().to_string(),
            follower: follower.name().to_string(),
            mean_sum_reward: mean,
            std_sum_reward: var.sqrt(),
            mean_per_agent_reward: mean_per_agent,
            mean_goal_collections: avg(|e| e.goal_collections),
            mean_incorrect_collections: avg(|e| e.incorrect_collections),
            mean_goal_switches: avg(|e| e.goal_switches),
            episodes,
        }
    }
}

/// Runs `n_seeds` batches of `n_envs` environments for `horizon` steps.
/// Annealing is forced off, so incorrect blocks always cost the full penalty.
pub fn evaluate(
    config: &EnvConfig,
    leader: PolicyKind,
    follower: PolicyKind,
    spec: EvalSpec,
) -> Result<EvalReport, EnvError> {
    let mut cfg = config.clone();
    cfg.shaping.annealing = None;
    cfg.validate()?;
    let mut episodes = Vec::with_capacity(spec.n_seeds * spec.n_envs);
    for s in 0..spec.n_seeds {
        let base = batch_seed(spec.base_seed, s);
        let mut venv = VecEnv::new(&cfg, spec.n_envs, base)?;
        let mut teams: Vec<Team> = venv
            .envs()
            .iter()
            .map(|env| make_team(&cfg, leader, follower, env.config().seed))
            .collect();
        let mut metrics: Vec<EpisodeMetrics> = venv
            .envs()
            .iter()
            .map(|env| EpisodeMetrics::new(env.config().seed, cfg.num_agents()))
            .collect();
        for _ in 0..spec.horizon {
            let outs = venv.step_policies(&mut teams)?;
            for (m, o) in metrics.iter_mut().zip(&outs) {
                m.record(o);
            }
        }
        episodes.extend(metrics);
    }
    Ok(EvalReport::from_episodes(spec, leader, follower, episodes))
}
