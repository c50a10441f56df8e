//! Versioned JSON dump of a trajectory tree for warm starts.
//!
//! Edges are stored by transit time only and re-solved on load; the stored
//! costs are then checked against the re-solved ones.

use serde::{Deserialize, Serialize};

use super::tree::{NodeId, PruneRule, TrajectoryTree, TreeNode};
use crate::error::FormatError;
use crate::steer::{solve_with_duration, steer, FlatState, SteeringBounds, SteeringWeights};

pub const DUMP_FORMAT: &str = "flatplan-tree";
pub const DUMP_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub state: FlatState,
    pub cost_to_come: f64,
    pub heuristic: f64,
    pub parent: Option<usize>,
    pub mask: bool,
    /// Transit time of the edge from the parent.
    pub edge_dt: Option<f64>,
    /// Transit time of the feasible target edge, when one is known.
    pub goal_dt: Option<f64>,
    pub goal_checked: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeDump {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub weights: SteeringWeights,
    pub steering: SteeringBounds,
    pub prune_rule: PruneRule,
    pub target: FlatState,
    /// `null` while no solution exists.
    pub best_cost: Option<f64>,
    pub best_leaf: Option<usize>,
    pub root: usize,
    pub nodes: Vec<NodeRecord>,
}

impl TreeDump {
    pub fn from_tree(tree: &TrajectoryTree) -> Self {
        let nodes = tree
            .iter()
            .map(|(id, n)| NodeRecord {
                id: id.0,
                state: n.state,
                cost_to_come: n.cost_to_come,
                heuristic: n.heuristic,
                parent: n.parent.map(|p| p.0),
                mask: n.mask,
                edge_dt: n.edge.as_ref().map(|e| e.dt_star),
                goal_dt: n.goal.as_ref().map(|e| e.dt_star),
                goal_checked: n.goal_checked,
            })
            .collect();
        Self {
            format: DUMP_FORMAT.into(),
            version: DUMP_VERSION,
            seed: tree.rng_seed,
            weights: tree.weights,
            steering: tree.steering,
            prune_rule: tree.prune_rule,
            target: tree.target,
            best_cost: tree.best_cost.is_finite().then_some(tree.best_cost),
            best_leaf: tree.best_leaf.map(|l| l.0),
            root: tree.root.0,
            nodes,
        }
    }

    /// Rebuild the tree, re-solving every edge. Fails on a foreign format,
    /// a newer version or inconsistent contents.
    pub fn into_tree(self) -> Result<TrajectoryTree, FormatError> {
        let bad = |m: String| FormatError::IncompatibleDump(m);
        if self.format != DUMP_FORMAT {
            return Err(bad(format!("unknown format {:?}", self.format)));
        }
        if self.version != DUMP_VERSION {
            return Err(bad(format!("unsupported version {}", self.version)));
        }
        let len = self.nodes.iter().map(|n| n.id + 1).max().unwrap_or(0);
        if self.root >= len {
            return Err(bad("root id out of range".into()));
        }
        let mut slots: Vec<Option<NodeRecord>> = vec![None; len];
        for rec in self.nodes {
            let id = rec.id;
            if slots[id].replace(rec).is_some() {
                return Err(bad(format!("duplicate node id {id}")));
            }
        }
        let mut nodes: Vec<Option<TreeNode>> = vec![None; len];
        let mut live = 0;
        for (i, rec) in slots.iter().enumerate() {
            let Some(rec) = rec else { continue };
            let edge = match (rec.parent, rec.edge_dt) {
                (None, None) => None,
                (Some(p), Some(dt)) => {
                    let parent = slots
                        .get(p)
                        .and_then(|s| s.as_ref())
                        .ok_or_else(|| bad(format!("node {i} has missing parent {p}")))?;
                    let e = solve_with_duration(&parent.state, &rec.state, dt, &self.weights)
                        .map_err(|e| bad(format!("node {i}: {e}")))?;
                    Some(e)
                }
                _ => {
                    return Err(bad(format!(
                        "node {i} has a parent without an edge or vice versa"
                    )))
                }
            };
            let goal = match rec.goal_dt {
                None => None,
                Some(0.0) => Some(
                    steer(&rec.state, &self.target, &self.weights, &self.steering)
                        .map_err(|e| bad(format!("node {i}: {e}")))?,
                ),
                Some(dt) => Some(
                    solve_with_duration(&rec.state, &self.target, dt, &self.weights)
                        .map_err(|e| bad(format!("node {i}: {e}")))?,
                ),
            };
            nodes[i] = Some(TreeNode {
                state: rec.state,
                cost_to_come: rec.cost_to_come,
                heuristic: rec.heuristic,
                parent: rec.parent.map(NodeId),
                children: Vec::new(),
                mask: rec.mask,
                edge,
                goal,
                goal_checked: rec.goal_checked,
            });
            live += 1;
        }
        for i in 0..len {
            if let Some(p) = nodes[i].as_ref().and_then(|n| n.parent) {
                nodes[p.0]
                    .as_mut()
                    .expect("checked above")
                    .children
                    .push(NodeId(i));
            }
        }
        let tree = TrajectoryTree {
            nodes,
            live,
            root: NodeId(self.root),
            target: self.target,
            weights: self.weights,
            steering: self.steering,
            prune_rule: self.prune_rule,
            best_cost: self.best_cost.unwrap_or(f64::INFINITY),
            best_leaf: self.best_leaf.map(NodeId),
            rng_seed: self.seed,
        };
        tree.audit()
            .map_err(|e| bad(format!("tree audit failed: {e}")))?;
        Ok(tree)
    }
}

pub fn to_json(tree: &TrajectoryTree) -> Result<String, FormatError> {
    Ok(serde_json::to_string(&TreeDump::from_tree(tree))?)
}

pub fn from_json(text: &str) -> Result<TrajectoryTree, FormatError> {
    let dump: TreeDump = serde_json::from_str(text)
        .map_err(|e| FormatError::IncompatibleDump(format!("not a tree dump: {e}")))?;
    dump.into_tree()
}

pub fn save(tree: &TrajectoryTree, path: &std::path::Path) -> Result<(), FormatError> {
    std::fs::write(path, to_json(tree)?)?;
    Ok(())
}

pub fn load(path: &std::path::Path) -> Result<TrajectoryTree, FormatError> {
    from_json(&std::fs::read_to_string(path)?)
}
