use super::tree::TrajectoryTree;
use crate::error::PlanError;
use crate::steer::{EdgeSample, FlatState, SteeringSolution};

/// Concatenated LQMT edges from the start to the target.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub edges: Vec<SteeringSolution>,
}

impl Trajectory {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Total transit time `t*`.
    pub fn travel_time(&self) -> f64 {
        self.edges.iter().map(|e| e.dt_star).sum()
    }

    /// Sum of edge costs.
    pub fn cost(&self) -> f64 {
        self.edges.iter().map(|e| e.cost).sum()
    }

    pub fn start(&self) -> Option<FlatState> {
        self.edges.first().map(|e| e.start)
    }

    pub fn end(&self) -> Option<FlatState> {
        self.edges.last().map(|e| e.end)
    }

    /// Flat state and snap at global time `t`, clamped to the trajectory.
    /// At a junction the later edge is used.
    pub fn evaluate(&self, t: f64) -> Option<(FlatState, [f64; 3])> {
        let mut t0 = 0.0;
        for (k, e) in self.edges.iter().enumerate() {
            let last = k + 1 == self.edges.len();
            if t < t0 + e.dt_star || last {
                return Some(e.evaluate(t - t0));
            }
            t0 += e.dt_star;
        }
        None
    }

    /// Samples at `0, step, 2 step, ...` plus the final time.
    pub fn sample(&self, step: f64) -> Vec<EdgeSample> {
        let total = self.travel_time();
        let mut out = Vec::new();
        if self.edges.is_empty() || !(step > 0.0) {
            return out;
        }
        let mut push = |t: f64| {
            if let Some((state, snap)) = self.evaluate(t) {
                out.push(EdgeSample { t, state, snap });
            }
        };
        let mut k = 0u64;
        loop {
            let t = k as f64 * step;
            if t >= total * (1.0 - 1e-12) && k > 0 {
                break;
            }
            push(t);
            k += 1;
            if total == 0.0 {
                return out;
            }
        }
        push(total);
        out
    }
}

/// Walk from the incumbent leaf back to the root and append its target edge.
pub fn extract_trajectory(tree: &TrajectoryTree) -> Result<Trajectory, PlanError> {
    let leaf = tree.best_leaf().ok_or(PlanError::NoSolution)?;
    let goal = tree
        .node(leaf)
        .and_then(|n| n.goal_edge())
        .ok_or(PlanError::NoSolution)?;
    let mut edges = vec![goal.clone()];
    let mut cur = leaf;
    while let Some(n) = tree.node(cur) {
        match (n.parent, n.edge()) {
            (Some(p), Some(e)) => {
                edges.push(e.clone());
                cur = p;
            }
            _ => break,
        }
    }
    edges.reverse();
    if edges.len() > 1 {
        edges.retain(|e| !e.is_degenerate());
    }
    let traj = Trajectory { edges };
    let j = tree.best_cost();
    if (traj.cost() - j).abs() > 1e-9 * j.max(1.0) {
        return Err(PlanError::NoSolution);
    }
    Ok(traj)
}
