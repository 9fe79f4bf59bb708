//! Resolution of run settings: built-in defaults, then a config file, then
//! command-line flags.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context;
use clap::Args;
use colorgrid::shaping::{AnnealSchedule, DistanceShaping, PotentialField};
use colorgrid::{EnvConfig, PolicyKind, RewardPreset};
use serde::Serialize;

use crate::UsageError;

/// Flags shared by every command that builds environments. Every field is
/// optional so that a config file can fill whatever the flags leave unset.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Flat `key = value` file; keys mirror the long flag names.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    /// Fraction of cells holding a block.
    #[arg(long)]
    pub density: Option<f64>,
    /// Reward table: optimistic, neutral or pessimistic.
    #[arg(long)]
    pub preset: Option<String>,
    /// Per-step goal resample probability.
    #[arg(long = "switch-prob")]
    pub switch_prob: Option<f64>,
    /// Hide the goal from followers.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub asymmetric: Option<bool>,
    /// Leader policy: astar_leader, astar_copier or random.
    #[arg(long)]
    pub leader: Option<String>,
    /// Follower policy: astar_leader, astar_copier or random.
    #[arg(long)]
    pub follower: Option<String>,
    /// Number of seed batches.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Parallel environments per batch.
    #[arg(long)]
    pub envs: Option<usize>,
    /// Steps per episode.
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long = "anneal-start")]
    pub anneal_start: Option<u64>,
    #[arg(long = "anneal-end")]
    pub anneal_end: Option<u64>,
    #[arg(long = "distance-threshold")]
    pub distance_threshold: Option<usize>,
    #[arg(long = "distance-penalty")]
    pub distance_penalty: Option<f64>,
    /// Enable the block potential field (radius 10).
    #[arg(long = "potential-field", num_args = 0..=1, default_missing_value = "true")]
    pub potential_field: Option<bool>,
    /// Master seed; drawn from entropy and printed when absent.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Overrides {
    /// Fields set in `self` win over those in `base`.
    fn over(self, base: Overrides) -> Overrides {
        macro_rules! pick {
            ($($f:ident),*) => { Overrides { $($f: self.$f.or(base.$f)),* } };
        }
        pick!(
            config, width, height, density, preset, switch_prob, asymmetric, leader, follower, seeds, envs,
            horizon, anneal_start, anneal_end, distance_threshold, distance_penalty, potential_field, seed
        )
    }

    /// Parses a config file. Blank lines and `#` comments are ignored.
    pub fn from_file(path: &Path) -> anyhow::Result<Overrides> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config file {}", path.display()))?;
        Overrides::parse_text(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())).into())
    }

    fn parse_text(text: &str) -> Result<Overrides, String> {
        fn val<T: FromStr>(key: &str, v: &str) -> Result<Option<T>, String> {
            v.parse().map(Some).map_err(|_| format!("invalid value '{v}' for '{key}'"))
        }
        let mut o = Overrides::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, v) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim().trim_matches('"')))
                .ok_or_else(|| format!("line {}: expected 'key = value'", n + 1))?;
            match key.replace('_', "-").as_str() {
                "width" => o.width = val(key, v)?,
                "height" => o.height = val(key, v)?,
                "density" => o.density = val(key, v)?,
                "preset" => o.preset = Some(v.to_string()),
                "switch-prob" => o.switch_prob = val(key, v)?,
                "asymmetric" => o.asymmetric = val(key, v)?,
                "leader" => o.leader = Some(v.to_string()),
                "follower" => o.follower = Some(v.to_string()),
                "seeds" => o.seeds = val(key, v)?,
                "envs" => o.envs = val(key, v)?,
                "horizon" => o.horizon = val(key, v)?,
                "anneal-start" => o.anneal_start = val(key, v)?,
                "anneal-end" => o.anneal_end = val(key, v)?,
                "distance-threshold" => o.distance_threshold = val(key, v)?,
                "distance-penalty" => o.distance_penalty = val(key, v)?,
                "potential-field" => o.potential_field = val(key, v)?,
                "seed" => o.seed = val(key, v)?,
                _ => return Err(format!("line {}: unknown key '{key}'", n + 1)),
            }
        }
        Ok(o)
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSpec {
    pub config: EnvConfig,
    pub preset: Option<RewardPreset>,
    #[serde(serialize_with = "policy_name")]
    pub leader: PolicyKind,
    #[serde(serialize_with = "policy_name")]
    pub follower: PolicyKind,
    pub seeds: usize,
    pub envs: usize,
    pub horizon: usize,
    pub seed: u64,
    /// True when the seed was drawn from entropy rather than given.
    pub seed_from_entropy: bool,
}

fn policy_name<S: serde::Serializer>(k: &PolicyKind, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(k.name())
}

/// Per-command fallbacks that differ from the environment defaults.
pub struct CommandDefaults {
    pub leader: PolicyKind,
    pub follower: PolicyKind,
    pub horizon: usize,
    pub envs: usize,
}

impl RunSpec {
    /// Merges `flags` over the config file (if any) over defaults and
    /// validates the result. Nothing is constructed on failure.
    pub fn resolve(flags: Overrides, defaults: CommandDefaults) -> anyhow::Result<RunSpec> {
        let file = match &flags.config {
            Some(path) => Overrides::from_file(path)?,
            None => Overrides::default(),
        };
        let o = flags.over(file);
        let usage = |msg: String| anyhow::Error::from(UsageError(msg));

        let preset = o.preset.as_deref().map(RewardPreset::from_str).transpose().map_err(usage)?;
        let leader = o.leader.as_deref().map(PolicyKind::from_str).transpose().map_err(usage)?;
        let follower = o.follower.as_deref().map(PolicyKind::from_str).transpose().map_err(usage)?;
        let horizon = o.horizon.unwrap_or(defaults.horizon);
        let envs = o.envs.unwrap_or(defaults.envs);
        let seeds = o.seeds.unwrap_or(1);
        for (name, v) in [("horizon", horizon), ("envs", envs), ("seeds", seeds)] {
            if v == 0 {
                return Err(usage(format!("--{name} must be at least 1")));
            }
        }

        let mut config = EnvConfig::default();
        if let Some(p) = preset {
            config = config.with_preset(p);
        }
        config.width = o.width.unwrap_or(config.width);
        config.height = o.height.unwrap_or(config.height);
        config.block_density = o.density.unwrap_or(config.block_density);
        config.goal_resample_probability = o.switch_prob.unwrap_or(config.goal_resample_probability);
        config.asymmetric = o.asymmetric.unwrap_or(false);
        if o.anneal_start.is_some() || o.anneal_end.is_some() {
            config.shaping.annealing = Some(AnnealSchedule {
                start: o.anneal_start.unwrap_or(AnnealSchedule::DEFAULT.start),
                end: o.anneal_end.unwrap_or(AnnealSchedule::DEFAULT.end),
            });
        }
        if o.distance_threshold.is_some() || o.distance_penalty.is_some() {
            let d = DistanceShaping::default();
            config.shaping.distance = Some(DistanceShaping {
                threshold: o.distance_threshold.unwrap_or(d.threshold),
                penalty: o.distance_penalty.unwrap_or(d.penalty),
                ..d
            });
        }
        if o.potential_field == Some(true) {
            config.shaping.potential_field = Some(PotentialField::default());
        }
        let (seed, seed_from_entropy) = match o.seed {
            Some(s) => (s, false),
            None => (rand::random(), true),
        };
        config.seed = seed;
        config.validate().map_err(|e| usage(e.to_string()))?;

        Ok(RunSpec {
            config,
            preset,
            leader: leader.unwrap_or(defaults.leader),
            follower: follower.unwrap_or(defaults.follower),
            seeds,
            envs,
            horizon,
            seed,
            seed_from_entropy,
        })
    }
}
