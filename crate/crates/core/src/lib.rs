//! ColorGrid: a deterministic multi-agent grid world with a hidden,
//! non-stationary goal color and a shared reward.
//!
//! The crate is organised around the single-step transition in [`env`]:
//!
//! - [`env`] owns world state, movement, collection, respawn and goal switching.
//! - [`shaping`] holds the reward presets, penalty annealing and the optional
//!   distance and potential-field shaping terms.
//! - [`observation`] encodes a state into the 5-plane tensor view.
//! - [`agents`] provides the A* leader, the A* copying follower and a random policy.
//! - [`harness`] steps many environments in lockstep and aggregates metrics.
//! - [`trajectory`] records episodes to a line-delimited file and replays them.

pub mod agents;
pub mod config;
pub mod env;
pub mod harness;
pub mod observation;
pub mod pathfinding;
pub mod rng;
pub mod shaping;
pub mod trajectory;
mod types;

pub use agents::{FollowerBelief, Policy, PolicyKind};
pub use config::{ConfigError, EnvConfig, ObservationConfig};
pub use env::{Collection, ColorGrid, EnvError, GoalDraw, GridState, StepOutcome};
pub use harness::{evaluate, EpisodeMetrics, EvalReport, EvalSpec, VecEnv};
pub use observation::Observation;
pub use shaping::{RewardPreset, Role, ShapingConfig};
pub use trajectory::{TrajectoryError, TrajectoryRecord};
pub use types::{Action, BlockColor, Cell, NUM_COLORS};
