use serde::{Deserialize, Serialize};

use super::tree::PruneRule;
use crate::error::PlanError;
use crate::steer::{SteeringBounds, SteeringWeights};

/// How the derivatives of a random sample are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SampleMode {
    /// Velocity uniform in the velocity bounds; acceleration and jerk zero.
    VelocityOnly,
    /// All twelve components: velocity as above, acceleration and jerk
    /// uniform in the given symmetric per-axis ranges.
    Full { accel: f64, jerk: f64 },
}

/// What `find_parent` enqueues when the popped node's edge is infeasible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParentSearch {
    /// Every unmasked node is a candidate from the start, popped cheapest first.
    BestFirst,
    /// Queue seeded with the root; on failure the children are pushed.
    QueueChildren,
    /// Queue seeded with the root; on failure the parent is pushed.
    QueueParent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Wall-clock budget in seconds.
    pub t_plan: f64,
    /// Optional cap on loop iterations; with it, a run is reproducible
    /// independently of machine speed.
    pub max_iterations: Option<u64>,
    pub workers: usize,
    pub seed: u64,
    pub weights: SteeringWeights,
    pub steering: SteeringBounds,
    /// Time step of the edge feasibility check, s.
    pub edge_step: f64,
    pub sample_mode: SampleMode,
    /// Rejections tolerated before giving up on finding free space.
    pub max_sample_rejections: usize,
    pub parent_search: ParentSearch,
    /// Maximum number of candidate edges `find_parent` checks (`None` = all).
    pub expansion_budget: Option<usize>,
    pub prune_rule: PruneRule,
    /// Reject samples whose heuristic total cost cannot beat `J*`.
    pub informed: bool,
    /// Refinement budget after a warm-start connection succeeds, s.
    pub replan_budget: f64,
    /// Budget of the warm-started plan loop when no connection is found, s.
    pub replan_fallback_budget: f64,
    /// Run a full tree audit every this many tree operations.
    pub audit_every: Option<u64>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            t_plan: 30.0,
            max_iterations: None,
            workers: 1,
            seed: 0,
            weights: SteeringWeights::default(),
            steering: SteeringBounds::default(),
            edge_step: 0.01,
            sample_mode: SampleMode::VelocityOnly,
            max_sample_rejections: 10_000,
            parent_search: ParentSearch::BestFirst,
            expansion_budget: None,
            prune_rule: PruneRule::CostToCome,
            informed: true,
            replan_budget: 1.0,
            replan_fallback_budget: 10.0,
            audit_every: if cfg!(debug_assertions) {
                Some(1000)
            } else {
                None
            },
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        if !(self.t_plan > 0.0) {
            return Err(PlanError::InvalidConfig("t_plan must be positive"));
        }
        if self.workers == 0 {
            return Err(PlanError::InvalidConfig("workers must be at least 1"));
        }
        if !(self.edge_step > 0.0) {
            return Err(PlanError::InvalidConfig("edge_step must be positive"));
        }
        if !(self.replan_budget >= 0.0 && self.replan_fallback_budget >= 0.0) {
            return Err(PlanError::InvalidConfig(
                "replan budgets must be non-negative",
            ));
        }
        if self.audit_every == Some(0) {
            return Err(PlanError::InvalidConfig("audit_every must be positive"));
        }
        SteeringWeights::new(self.weights.r)?;
        self.steering.validate()?;
        Ok(())
    }

    /// Seed of worker `i`.
    pub fn worker_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9))
    }
}
