use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::shaping::{RewardPreset, ShapingConfig};
use crate::types::NUM_COLORS;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("grid dimensions must be positive, got {width}x{height}")]
    EmptyGrid { width: usize, height: usize },
    #[error("block density must lie in (0, 1), got {0}")]
    Density(f64),
    #[error("goal resample probability must lie in [0, 1], got {0}")]
    SwitchProbability(f64),
    #[error("goal reward must be positive and finite, got {0}")]
    GoalReward(f64),
    #[error("incorrect-block reward must be negative and finite, got {0}")]
    IncorrectReward(f64),
    #[error("at least one leader and one follower are required, got {leaders} and {followers}")]
    AgentCount { leaders: usize, followers: usize },
    #[error("density {density} on a {cells}-cell grid yields {blocks} blocks; at least one per color is required")]
    TooFewBlocks { density: f64, cells: usize, blocks: usize },
    #[error("{blocks} blocks and {agents} agents leave no empty cell on a {cells}-cell grid")]
    Infeasible { blocks: usize, agents: usize, cells: usize },
    #[error("invalid shaping configuration: {0}")]
    Shaping(String),
    #[error("invalid observation configuration: {0}")]
    Observation(String),
}

/// How agents see the world; full, absolute-role view by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ObservationConfig {
    /// Agent planes become (self, others) instead of (leaders, followers).
    pub relative_roles: bool,
    /// Egocentric square crop of side `2r + 1`; `None` is full observability.
    pub view_radius: Option<usize>,
}

/// Full parameterisation of one environment instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub width: usize,
    pub height: usize,
    pub block_density: f64,
    /// Per-step probability of redrawing the goal uniformly from all colors.
    /// The goal actually changes with two thirds of this probability.
    pub goal_resample_probability: f64,
    pub reward_goal: f64,
    pub reward_incorrect: f64,
    /// Hide the goal vector from followers.
    pub asymmetric: bool,
    pub num_leaders: usize,
    pub num_followers: usize,
    pub shaping: ShapingConfig,
    pub observation: ObservationConfig,
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            width: 32,
            height: 32,
            block_density: 0.10,
            goal_resample_probability: 1.0 / 32.0,
            reward_goal: 1.0,
            reward_incorrect: -1.0,
            asymmetric: false,
            num_leaders: 1,
            num_followers: 1,
            shaping: ShapingConfig::default(),
            observation: ObservationConfig::default(),
            seed: 0,
        }
    }
}

impl EnvConfig {
    pub fn with_preset(mut self, preset: RewardPreset) -> Self {
        let (goal, incorrect) = preset.rewards();
        self.reward_goal = goal;
        self.reward_incorrect = incorrect;
        self
    }

    pub fn cells(&self) -> usize {
        self.width * self.height
    }

    pub fn num_agents(&self) -> usize {
        self.num_leaders + self.num_followers
    }

    /// `floor(density * cells)` rounded down to a multiple of the color count.
    pub fn total_blocks(&self) -> usize {
        // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
        let raw = (self.block_density * self.cells() as f64 + 1e-9).floor();
        let raw = if raw.is_finite() && raw > 0.0 { raw as usize } else { 0 };
        raw / NUM_COLORS * NUM_COLORS
    }

    pub fn blocks_per_color(&self) -> usize {
        self.total_blocks() / NUM_COLORS
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.width == 0 || self.height == 0 {
            return Err(ConfigError::EmptyGrid { width: self.width, height: self.height });
        }
        if !(self.block_density > 0.0 && self.block_density < 1.0) {
            return Err(ConfigError::Density(self.block_density));
        }
        if !(0.0..=1.0).contains(&self.goal_resample_probability) {
            return Err(ConfigError::SwitchProbability(self.goal_resample_probability));
        }
        if !(self.reward_goal.is_finite() && self.reward_goal > 0.0) {
            return Err(ConfigError::GoalReward(self.reward_goal));
        }
        if !(self.reward_incorrect.is_finite() && self.reward_incorrect < 0.0) {
            return Err(ConfigError::IncorrectReward(self.reward_incorrect));
        }
        if self.num_leaders == 0 || self.num_followers == 0 {
            return Err(ConfigError::AgentCount {
                leaders: self.num_leaders,
                followers: self.num_followers,
            });
        }
        let blocks = self.total_blocks();
        if blocks < NUM_COLORS {
            return Err(ConfigError::TooFewBlocks {
                density: self.block_density,
                cells: self.cells(),
                blocks,
            });
        }
        // Respawn needs at least one free cell after every collection.
        if blocks + self.num_agents() >= self.cells() {
            return Err(ConfigError::Infeasible {
                blocks,
                agents: self.num_agents(),
                cells: self.cells(),
            });
        }
        if let Some(r) = self.observation.view_radius {
            if r == 0 {
                return Err(ConfigError::Observation("view radius must be at least 1".into()));
            }
        }
        self.shaping.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_block_count() {
        let cfg = EnvConfig::default();
        assert_eq!(cfg.total_blocks(), 102);
        assert_eq!(cfg.blocks_per_color(), 34);
        cfg.validate().unwrap();
    }

    #[test]
    fn block_count_rounds_to_multiple_of_three() {
        let cfg = EnvConfig { width: 10, height: 10, block_density: 0.29, ..Default::default() };
        assert_eq!(cfg.total_blocks(), 27);
        let cfg = EnvConfig { block_density: 0.05, ..Default::default() };
        // floor(51.2) = 51
        assert_eq!(cfg.total_blocks(), 51);
    }

    #[test]
    fn rejects_infeasible() {
        let tiny = EnvConfig { width: 2, height: 2, block_density: 0.5, ..Default::default() };
        assert!(matches!(tiny.validate(), Err(ConfigError::TooFewBlocks { .. })));
        let full = EnvConfig { width: 2, height: 2, block_density: 0.75, ..Default::default() };
        assert!(matches!(full.validate(), Err(ConfigError::Infeasible { .. })));
        let sparse = EnvConfig { width: 4, height: 4, block_density: 0.1, ..Default::default() };
        assert!(matches!(sparse.validate(), Err(ConfigError::TooFewBlocks { .. })));
    }

    #[test]
    fn rejects_bad_scalars() {
        let base = EnvConfig::default();
        assert!(EnvConfig { block_density: 1.0, ..base.clone() }.validate().is_err());
        assert!(EnvConfig { goal_resample_probability: 1.5, ..base.clone() }.validate().is_err());
        assert!(EnvConfig { reward_goal: 0.0, ..base.clone() }.validate().is_err());
        assert!(EnvConfig { reward_incorrect: 0.5, ..base.clone() }.validate().is_err());
        assert!(EnvConfig { num_followers: 0, ..base }.validate().is_err());
    }
}
