//! Flat-informed RRT* over flat states of the crane.

mod config;
pub mod dump;
mod env;
mod ops;
mod run;
mod trajectory;
mod tree;

pub use config::{ParentSearch, PlannerConfig, SampleMode};
pub use env::{Environment, DEFAULT_TIGHTENING};
pub use ops::Connection;
pub use run::{merge, plan, replan, sample_free, PlanResult, PlanStats, PlanTiming};
pub use trajectory::{extract_trajectory, Trajectory};
pub use tree::{NodeId, PruneRule, TrajectoryTree, TreeNode};
