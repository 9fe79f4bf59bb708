//! Reward values, penalty annealing and the optional dense shaping terms.
//!
//! Shaping never feeds the headline metric: the environment reports base
//! (block-collection) rewards and each shaping term separately.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, EnvConfig};
use crate::env::GridState;
use crate::types::{BlockColor, Cell, NUM_COLORS};

/// Reward table presets, named by the sign of the expected value of
/// collecting a uniformly random block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardPreset {
    Optimistic,
    Neutral,
    Pessimistic,
}

impl RewardPreset {
    pub const ALL: [RewardPreset; 3] =
        [RewardPreset::Optimistic, RewardPreset::Neutral, RewardPreset::Pessimistic];

    /// `(goal reward, incorrect reward)`.
    pub fn rewards(self) -> (f64, f64) {
        match self {
            RewardPreset::Optimistic => (4.0, -1.0),
            RewardPreset::Neutral => (2.0, -1.0),
            RewardPreset::Pessimistic => (1.0, -1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RewardPreset::Optimistic => "optimistic",
            RewardPreset::Neutral => "neutral",
            RewardPreset::Pessimistic => "pessimistic",
        }
    }
}

impl fmt::Display for RewardPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RewardPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RewardPreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown preset '{s}' (expected one of: optimistic, neutral, pessimistic)"))
    }
}

/// Expected reward of picking up one block whose color is uniform over the
/// three colors.
pub fn expected_pickup_value(reward_goal: f64, reward_incorrect: f64) -> f64 {
    (reward_goal + 2.0 * reward_incorrect) / NUM_COLORS as f64
}

pub fn expected_random_pickup_value(preset: RewardPreset) -> f64 {
    let (goal, incorrect) = preset.rewards();
    expected_pickup_value(goal, incorrect)
}

/// Agent role; leaders always see the goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Leader,
    Follower,
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "leader" => Ok(Role::Leader),
            "follower" => Ok(Role::Follower),
            _ => Err(format!("unknown role '{s}' (expected leader or follower)")),
        }
    }
}

/// Linear ramp of the incorrect-block penalty over global training steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub start: u64,
    pub end: u64,
}

impl AnnealSchedule {
    pub const DEFAULT: AnnealSchedule = AnnealSchedule { start: 4_000_000, end: 10_000_000 };

    pub fn coefficient(&self, global_timestep: u64) -> f64 {
        if global_timestep < self.start {
            0.0
        } else if global_timestep >= self.end {
            1.0
        } else {
            (global_timestep - self.start) as f64 / (self.end - self.start) as f64
        }
    }
}

/// Constant penalty while the two roles are closer than `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceShaping {
    /// Manhattan distance; the penalty applies when strictly closer.
    pub threshold: usize,
    pub penalty: f64,
    pub applies_to: Role,
    /// Global timestep after which the term switches off.
    #[serde(default)]
    pub until: Option<u64>,
}

impl Default for DistanceShaping {
    fn default() -> Self {
        DistanceShaping { threshold: 10, penalty: 0.25, applies_to: Role::Follower, until: None }
    }
}

/// Inverse-distance field emitted by blocks: positive for the goal color,
/// negative otherwise, zero beyond `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialField {
    pub radius: usize,
    /// Explicit field scale. When absent the scale is chosen so the field can
    /// never exceed a tenth of the goal reward in magnitude.
    #[serde(default)]
    pub scale: Option<f64>,
}

impl Default for PotentialField {
    fn default() -> Self {
        PotentialField { radius: 10, scale: None }
    }
}

impl PotentialField {
    pub fn resolved_scale(&self, cfg: &EnvConfig) -> f64 {
        if let Some(k) = self.scale {
            return k;
        }
        // Incorrect blocks outnumber goal blocks two to one, so they bound |field|.
        let worst = worst_case_field_sum(self.radius, 2 * cfg.blocks_per_color());
        if worst == 0.0 {
            0.0
        } else {
            0.1 * cfg.reward_goal / worst
        }
    }
}

/// Largest value of `sum 1/d` over `max_blocks` distinct cells within
/// Manhattan radius `radius` of an agent on an unbounded grid. There are `4d`
/// cells at distance `d`, so the nearest rings are filled first.
pub fn worst_case_field_sum(radius: usize, max_blocks: usize) -> f64 {
    let mut remaining = max_blocks;
    let mut sum = 0.0;
    for d in 1..=radius {
        if remaining == 0 {
            break;
        }
        let take = remaining.min(4 * d);
        sum += take as f64 / d as f64;
        remaining -= take;
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ShapingConfig {
    pub annealing: Option<AnnealSchedule>,
    pub distance: Option<DistanceShaping>,
    pub potential_field: Option<PotentialField>,
}

/// Shaping schedules used to pre-train a follower with full goal information
/// before moving it to the asymmetric setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarmstartPreset {
    /// Distance penalty 0.25 below 10 cells for 20M steps, annealing 10M-20M.
    Short,
    /// Distance penalty 0.5 below 10 cells for 40M steps, annealing 4M-10M.
    Long,
}

impl ShapingConfig {
    pub fn warmstart(preset: WarmstartPreset) -> Self {
        let (penalty, until, annealing) = match preset {
            WarmstartPreset::Short => {
                (0.25, 20_000_000, AnnealSchedule { start: 10_000_000, end: 20_000_000 })
            }
            WarmstartPreset::Long => (0.5, 40_000_000, AnnealSchedule::DEFAULT),
        };
        ShapingConfig {
            annealing: Some(annealing),
            distance: Some(DistanceShaping {
                threshold: 10,
                penalty,
                applies_to: Role::Follower,
                until: Some(until),
            }),
            potential_field: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(a) = self.annealing {
            if a.start > a.end {
                return Err(ConfigError::Shaping(format!(
                    "anneal start {} exceeds anneal end {}",
                    a.start, a.end
                )));
            }
        }
        if let Some(d) = self.distance {
            if !(d.penalty.is_finite() && d.penalty >= 0.0) {
                return Err(ConfigError::Shaping(format!(
                    "distance penalty must be non-negative, got {}",
                    d.penalty
                )));
            }
        }
        if let Some(p) = self.potential_field {
            if let Some(k) = p.scale {
                if !(k.is_finite() && k >= 0.0) {
                    return Err(ConfigError::Shaping(format!(
                        "potential field scale must be non-negative, got {k}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Coefficient in `[0, 1]` multiplying the incorrect-block penalty; 1 when
/// annealing is disabled.
pub fn anneal_coefficient(global_timestep: u64, cfg: &ShapingConfig) -> f64 {
    cfg.annealing.map_or(1.0, |a| a.coefficient(global_timestep))
}

/// Block-collection reward. Annealing scales only the penalty.
pub fn base_reward(collected: BlockColor, goal: BlockColor, cfg: &EnvConfig, anneal_coeff: f64) -> f64 {
    if collected == goal {
        cfg.reward_goal
    } else {
        anneal_coeff * cfg.reward_incorrect
    }
}

/// `-penalty` when the leader and follower are strictly closer than the
/// threshold, else 0. Which role receives it is decided by `applies_to`.
pub fn distance_penalty(leader: Cell, follower: Cell, shaping: &DistanceShaping) -> f64 {
    if leader.manhattan(follower) < shaping.threshold {
        -shaping.penalty
    } else {
        0.0
    }
}

/// Potential-field reward at `agent` under the state's current goal, using
/// the config's field settings (0 when the field is disabled).
pub fn potential_field_reward(state: &GridState, agent: Cell, cfg: &EnvConfig) -> f64 {
    match cfg.shaping.potential_field {
        Some(field) => field_value(state, agent, field.radius, field.resolved_scale(cfg)),
        None => 0.0,
    }
}

/// `sum_b sign(b) * scale / max(1, d(agent, b))` over blocks within `radius`.
pub fn field_value(state: &GridState, agent: Cell, radius: usize, scale: f64) -> f64 {
    let goal = state.goal();
    let (h, w) = (state.height(), state.width());
    let r0 = agent.row.saturating_sub(radius);
    let r1 = (agent.row + radius).min(h - 1);
    let mut sum = 0.0;
    for row in r0..=r1 {
        let slack = radius - row.abs_diff(agent.row);
        let c0 = agent.col.saturating_sub(slack);
        let c1 = (agent.col + slack).min(w - 1);
        for col in c0..=c1 {
            let cell = Cell::new(row, col);
            if let Some(color) = state.block_at(cell) {
                let d = agent.manhattan(cell).max(1) as f64;
                let term = scale / d;
                sum += if color == goal { term } else { -term };
            }
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preset_cfg(p: RewardPreset) -> EnvConfig {
        EnvConfig::default().with_preset(p)
    }

    #[test]
    fn base_reward_examples() {
        let c0 = BlockColor::ALL[0];
        let c1 = BlockColor::ALL[1];
        assert_eq!(base_reward(c0, c0, &preset_cfg(RewardPreset::Neutral), 1.0), 2.0);
        for p in RewardPreset::ALL {
            assert_eq!(base_reward(c1, c0, &preset_cfg(p), 0.0), 0.0);
        }
        assert_eq!(base_reward(c1, c0, &preset_cfg(RewardPreset::Pessimistic), 0.5), -0.5);
        // Annealing never touches the goal reward.
        assert_eq!(base_reward(c0, c0, &preset_cfg(RewardPreset::Optimistic), 0.0), 4.0);
    }

    #[test]
    fn anneal_anchors() {
        let cfg = ShapingConfig { annealing: Some(AnnealSchedule::DEFAULT), ..Default::default() };
        assert_eq!(anneal_coefficient(0, &cfg), 0.0);
        assert_eq!(anneal_coefficient(4_000_000, &cfg), 0.0);
        assert_eq!(anneal_coefficient(7_000_000, &cfg), 0.5);
        assert_eq!(anneal_coefficient(10_000_000, &cfg), 1.0);
        assert_eq!(anneal_coefficient(u64::MAX, &cfg), 1.0);
        assert_eq!(anneal_coefficient(5, &ShapingConfig::default()), 1.0);
    }

    #[test]
    fn degenerate_anneal_window_is_a_step() {
        let a = AnnealSchedule { start: 100, end: 100 };
        assert_eq!(a.coefficient(99), 0.0);
        assert_eq!(a.coefficient(100), 1.0);
    }

    #[test]
    fn distance_penalty_is_strict() {
        let d = DistanceShaping::default();
        assert_eq!(distance_penalty(Cell::new(0, 0), Cell::new(1, 2), &d), -0.25);
        assert_eq!(distance_penalty(Cell::new(0, 0), Cell::new(5, 5), &d), 0.0);
        assert_eq!(distance_penalty(Cell::new(0, 0), Cell::new(4, 5), &d), -0.25);
    }

    #[test]
    fn expected_values() {
        assert_eq!(expected_random_pickup_value(RewardPreset::Neutral), 0.0);
        assert!((expected_random_pickup_value(RewardPreset::Optimistic) - 2.0 / 3.0).abs() < 1e-15);
        assert!((expected_random_pickup_value(RewardPreset::Pessimistic) + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn preset_parsing() {
        assert_eq!("neutral".parse::<RewardPreset>(), Ok(RewardPreset::Neutral));
        let err = "bogus".parse::<RewardPreset>().unwrap_err();
        assert!(err.contains("optimistic") && err.contains("pessimistic"));
    }

    #[test]
    fn worst_case_rings() {
        assert_eq!(worst_case_field_sum(10, 1), 1.0);
        // 4 cells at d=1, 8 at d=2, 12 at d=3, 10 of 16 at d=4.
        assert_eq!(worst_case_field_sum(10, 34), 4.0 + 4.0 + 4.0 + 2.5);
        assert_eq!(worst_case_field_sum(0, 34), 0.0);
    }

    #[test]
    fn warmstart_presets() {
        let s = ShapingConfig::warmstart(WarmstartPreset::Short);
        assert_eq!(s.distance.unwrap().penalty, 0.25);
        assert_eq!(s.distance.unwrap().until, Some(20_000_000));
        assert_eq!(s.annealing, Some(AnnealSchedule { start: 10_000_000, end: 20_000_000 }));
        let l = ShapingConfig::warmstart(WarmstartPreset::Long);
        assert_eq!(l.distance.unwrap().penalty, 0.5);
        assert_eq!(l.annealing, Some(AnnealSchedule::DEFAULT));
        s.validate().unwrap();
    }
}
