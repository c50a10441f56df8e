//! The trajectory tree: nodes with cost-to-come, heuristic, parent, children
//! and pruning mask, plus the incumbent solution `J*`.

use serde::{Deserialize, Serialize};

use crate::steer::{steer_cost, FlatState, SteeringBounds, SteeringSolution, SteeringWeights};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

/// Which nodes the branch-and-bound step masks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PruneRule {
    /// No masking or deletion.
    Off,
    /// Mask nodes whose cost-to-come exceeds `J*`.
    CostToCome,
    /// Mask nodes whose cost-to-come plus heuristic exceeds `J*`.
    CostToComePlusHeuristic,
}

#[derive(Clone, Debug)]
pub struct TreeNode {
    pub state: FlatState,
    pub cost_to_come: f64,
    /// Obstacle-free steering cost to the target.
    pub heuristic: f64,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub mask: bool,
    /// Edge from the parent.
    pub(crate) edge: Option<SteeringSolution>,
    /// Feasible edge to the target, when one was found.
    pub(crate) goal: Option<SteeringSolution>,
    /// A target connection was already attempted from this node.
    pub(crate) goal_checked: bool,
}

impl TreeNode {
    pub fn edge(&self) -> Option<&SteeringSolution> {
        self.edge.as_ref()
    }

    pub fn goal_edge(&self) -> Option<&SteeringSolution> {
        self.goal.as_ref()
    }

    /// `f_c = cost_to_come + heuristic`.
    pub fn estimated_total(&self) -> f64 {
        self.cost_to_come + self.heuristic
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryTree {
    pub(crate) nodes: Vec<Option<TreeNode>>,
    pub(crate) live: usize,
    pub(crate) root: NodeId,
    pub(crate) target: FlatState,
    pub(crate) weights: SteeringWeights,
    pub(crate) steering: SteeringBounds,
    pub(crate) prune_rule: PruneRule,
    pub(crate) best_cost: f64,
    pub(crate) best_leaf: Option<NodeId>,
    pub(crate) rng_seed: u64,
}

impl TrajectoryTree {
    pub fn new(
        start: FlatState,
        target: FlatState,
        weights: SteeringWeights,
        steering: SteeringBounds,
        prune_rule: PruneRule,
        rng_seed: u64,
    ) -> Self {
        let heuristic =
            steer_cost(&start, &target, &weights, &steering).map_or(f64::INFINITY, |(_, c)| c);
        let root = TreeNode {
            state: start,
            cost_to_come: 0.0,
            heuristic,
            parent: None,
            children: Vec::new(),
            mask: true,
            edge: None,
            goal: None,
            goal_checked: false,
        };
        Self {
            nodes: vec![Some(root)],
            live: 1,
            root: NodeId(0),
            target,
            weights,
            steering,
            prune_rule,
            best_cost: f64::INFINITY,
            best_leaf: None,
            rng_seed,
        }
    }

    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn target(&self) -> &FlatState {
        &self.target
    }

    pub fn weights(&self) -> &SteeringWeights {
        &self.weights
    }

    pub fn steering(&self) -> &SteeringBounds {
        &self.steering
    }

    pub fn prune_rule(&self) -> PruneRule {
        self.prune_rule
    }

    pub fn set_prune_rule(&mut self, rule: PruneRule) {
        self.prune_rule = rule;
    }

    /// Incumbent solution cost `J*` (infinite before the first solution).
    pub fn best_cost(&self) -> f64 {
        self.best_cost
    }

    pub fn best_leaf(&self) -> Option<NodeId> {
        self.best_leaf
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn node(&self, id: NodeId) -> Option<&TreeNode> {
        self.nodes.get(id.0).and_then(|n| n.as_ref())
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut TreeNode {
        self.nodes[id.0].as_mut().expect("live node")
    }

    pub(crate) fn get(&self, id: NodeId) -> &TreeNode {
        self.nodes[id.0].as_ref().expect("live node")
    }

    /// Live nodes in id order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &TreeNode)> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.as_ref().map(|n| (NodeId(i), n)))
    }

    pub fn unmasked_count(&self) -> usize {
        self.iter().filter(|(_, n)| n.mask).count()
    }

    /// Mask value a node with the given costs receives under the current `J*`.
    pub(crate) fn mask_for(&self, cost_to_come: f64, heuristic: f64) -> bool {
        match self.prune_rule {
            PruneRule::Off => true,
            PruneRule::CostToCome => !(cost_to_come > self.best_cost),
            PruneRule::CostToComePlusHeuristic => !(cost_to_come + heuristic > self.best_cost),
        }
    }

    /// Ancestors of `id`, including `id`, as a membership table.
    pub(crate) fn lineage(&self, id: NodeId) -> Vec<bool> {
        let mut on_path = vec![false; self.nodes.len()];
        let mut cur = Some(id);
        while let Some(c) = cur {
            on_path[c.0] = true;
            cur = self.get(c).parent;
        }
        on_path
    }

    /// Nodes in breadth-first order from the root.
    pub fn breadth_first(&self) -> Vec<NodeId> {
        let mut order = vec![self.root];
        let mut k = 0;
        while k < order.len() {
            let id = order[k];
            order.extend(self.get(id).children.iter().copied());
            k += 1;
        }
        order
    }

    /// Count of unmasked nodes whose cost-to-come exceeds `J*`.
    pub fn mask_law_violations(&self) -> usize {
        self.iter()
            .filter(|(_, n)| n.mask && n.cost_to_come > self.best_cost)
            .count()
    }

    /// Structural audit: acyclicity, parent/child duality, cost additivity,
    /// mask law and the incumbent chain.
    pub fn audit(&self) -> Result<(), String> {
        let root = self.node(self.root).ok_or("root missing")?;
        if root.parent.is_some() || root.cost_to_come != 0.0 {
            return Err("root must have no parent and zero cost".into());
        }
        let mut seen_as_child = vec![0usize; self.nodes.len()];
        for (id, n) in self.iter() {
            for &c in &n.children {
                let child = self
                    .node(c)
                    .ok_or_else(|| format!("{id:?} lists dead child {c:?}"))?;
                if child.parent != Some(id) {
                    return Err(format!(
                        "{c:?} listed under {id:?} but has parent {:?}",
                        child.parent
                    ));
                }
                seen_as_child[c.0] += 1;
            }
        }
        for (id, n) in self.iter() {
            if id == self.root {
                continue;
            }
            let parent = n.parent.ok_or_else(|| format!("{id:?} has no parent"))?;
            let p = self
                .node(parent)
                .ok_or_else(|| format!("{id:?} has dead parent {parent:?}"))?;
            if seen_as_child[id.0] != 1 {
                return Err(format!(
                    "{id:?} appears {} times as a child",
                    seen_as_child[id.0]
                ));
            }
            let edge = n
                .edge
                .as_ref()
                .ok_or_else(|| format!("{id:?} has no edge"))?;
            let expected = p.cost_to_come + edge.cost;
            if (n.cost_to_come - expected).abs() > 1e-9 * expected.abs().max(1.0) {
                return Err(format!(
                    "{id:?} cost {} != parent {} + edge {}",
                    n.cost_to_come, p.cost_to_come, edge.cost
                ));
            }
            if !edge.start.bitwise_eq(&p.state) || !edge.end.bitwise_eq(&n.state) {
                return Err(format!("{id:?} edge endpoints do not match its states"));
            }
        }
        if self.breadth_first().len() != self.live {
            return Err("tree is not connected or contains a cycle".into());
        }
        for (id, n) in self.iter() {
            if n.mask != self.mask_for(n.cost_to_come, n.heuristic) {
                return Err(format!("{id:?} violates the mask law"));
            }
        }
        match self.best_leaf {
            None if self.best_cost.is_finite() => return Err("finite J* without a leaf".into()),
            Some(leaf) => {
                let n = self.node(leaf).ok_or("best leaf deleted")?;
                let goal = n.goal.as_ref().ok_or("best leaf has no goal edge")?;
                let total = n.cost_to_come + goal.cost;
                if (total - self.best_cost).abs() > 1e-9 * total.max(1.0) {
                    return Err(format!(
                        "J* {} disagrees with chain cost {total}",
                        self.best_cost
                    ));
                }
            }
            None => {}
        }
        Ok(())
    }
}
