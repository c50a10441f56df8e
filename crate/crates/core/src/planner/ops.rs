//! Tree operations of the planner loop: parent search, insertion, rewiring,
//! target connection and branch-and-bound pruning.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::config::{ParentSearch, PlannerConfig};
use super::env::Environment;
use super::tree::{NodeId, PruneRule, TrajectoryTree, TreeNode};
use crate::steer::{solve_with_duration, steer, steer_cost, FlatState, SteeringSolution};

/// A feasible edge from an existing node to a new state.
#[derive(Clone, Debug)]
pub struct Connection {
    pub parent: NodeId,
    pub edge: SteeringSolution,
}

/// Min-heap entry ordered by key, then id for determinism.
#[derive(Clone, Copy, Debug)]
struct Candidate {
    key: f64,
    dt: f64,
    id: NodeId,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl TrajectoryTree {
    fn candidate(&self, id: NodeId, x_new: &FlatState) -> Option<Candidate> {
        let n = self.get(id);
        let (dt, c) = steer_cost(&n.state, x_new, &self.weights, &self.steering).ok()?;
        if dt == 0.0 {
            // Coincident state: a zero-length edge would duplicate the node.
            return None;
        }
        Some(Candidate {
            key: n.cost_to_come + c,
            dt,
            id,
        })
    }

    fn try_edge(
        &self,
        env: &Environment,
        cfg: &PlannerConfig,
        c: &Candidate,
        x_new: &FlatState,
    ) -> Option<SteeringSolution> {
        let sol = solve_with_duration(&self.get(c.id).state, x_new, c.dt, &self.weights).ok()?;
        env.edge_feasible(&sol, cfg.edge_step).then_some(sol)
    }

    /// Cheapest feasible connection into `x_new` among unmasked nodes whose
    /// cost through the new edge stays below `limit`.
    pub fn find_parent(
        &self,
        env: &Environment,
        cfg: &PlannerConfig,
        x_new: &FlatState,
        limit: f64,
    ) -> Option<Connection> {
        let budget = cfg.expansion_budget.unwrap_or(usize::MAX);
        let mut checked = 0usize;
        let mut heap = BinaryHeap::new();
        let mut queued = vec![false; self.nodes.len()];
        let push = |heap: &mut BinaryHeap<Candidate>, queued: &mut Vec<bool>, id: NodeId| {
            if queued[id.0] || !self.get(id).mask {
                return;
            }
            queued[id.0] = true;
            if let Some(c) = self.candidate(id, x_new) {
                if c.key < limit {
                    heap.push(c);
                }
            }
        };
        match cfg.parent_search {
            ParentSearch::BestFirst => {
                for (id, _) in self.iter() {
                    push(&mut heap, &mut queued, id);
                }
            }
            ParentSearch::QueueChildren | ParentSearch::QueueParent => {
                push(&mut heap, &mut queued, self.root);
            }
        }
        while let Some(c) = heap.pop() {
            if checked >= budget {
                return None;
            }
            checked += 1;
            if let Some(edge) = self.try_edge(env, cfg, &c, x_new) {
                return Some(Connection { parent: c.id, edge });
            }
            let n = self.get(c.id);
            match cfg.parent_search {
                ParentSearch::BestFirst => {}
                ParentSearch::QueueChildren => {
                    for &child in &n.children {
                        push(&mut heap, &mut queued, child);
                    }
                }
                ParentSearch::QueueParent => {
                    if let Some(p) = n.parent {
                        push(&mut heap, &mut queued, p);
                    }
                }
            }
        }
        None
    }

    /// Obstacle-free cost from `x` to the target.
    pub fn heuristic_of(&self, x: &FlatState) -> f64 {
        steer_cost(x, &self.target, &self.weights, &self.steering).map_or(f64::INFINITY, |(_, c)| c)
    }

    /// Add `x_new` under the connection's parent.
    pub fn insert(&mut self, x_new: FlatState, conn: Connection) -> NodeId {
        let h = self.heuristic_of(&x_new);
        self.insert_with_heuristic(x_new, conn, h)
    }

    pub(crate) fn insert_with_heuristic(
        &mut self,
        x_new: FlatState,
        conn: Connection,
        heuristic: f64,
    ) -> NodeId {
        let cost_to_come = self.get(conn.parent).cost_to_come + conn.edge.cost;
        let id = NodeId(self.nodes.len());
        self.nodes.push(Some(TreeNode {
            state: x_new,
            cost_to_come,
            heuristic,
            parent: Some(conn.parent),
            children: Vec::new(),
            mask: self.mask_for(cost_to_come, heuristic),
            edge: Some(conn.edge),
            goal: None,
            goal_checked: false,
        }));
        self.live += 1;
        self.node_mut(conn.parent).children.push(id);
        id
    }

    /// Move `id` under `new_parent` and propagate the new cost-to-come
    /// through its subtree. Returns the subtree in breadth-first order.
    pub(crate) fn reparent(
        &mut self,
        id: NodeId,
        new_parent: NodeId,
        edge: SteeringSolution,
    ) -> Vec<NodeId> {
        if let Some(old) = self.get(id).parent {
            self.node_mut(old).children.retain(|&c| c != id);
        }
        self.node_mut(new_parent).children.push(id);
        {
            let n = self.node_mut(id);
            n.parent = Some(new_parent);
            n.edge = Some(edge);
        }
        let mut order = vec![id];
        let mut k = 0;
        while k < order.len() {
            let cur = order[k];
            k += 1;
            let parent_cost = self
                .get(self.get(cur).parent.expect("non-root"))
                .cost_to_come;
            let n = self.node_mut(cur);
            n.cost_to_come = parent_cost + n.edge.as_ref().expect("non-root edge").cost;
            order.extend(n.children.iter().copied());
        }
        for &cur in &order {
            let n = self.get(cur);
            if let Some(goal) = &n.goal {
                let total = n.cost_to_come + goal.cost;
                if total < self.best_cost {
                    self.best_cost = total;
                    self.best_leaf = Some(cur);
                }
            }
        }
        order
    }

    /// Reparent every unmasked node that becomes cheaper through `new_id`.
    /// Returns the rewire count and the nodes whose cost dropped.
    pub fn rewire(
        &mut self,
        env: &Environment,
        cfg: &PlannerConfig,
        new_id: NodeId,
    ) -> (usize, Vec<NodeId>) {
        let lineage = self.lineage(new_id);
        let x_new = self.get(new_id).state;
        let c_new = self.get(new_id).cost_to_come;
        let mut count = 0;
        let mut touched = Vec::new();
        for i in 0..self.nodes.len() {
            let id = NodeId(i);
            let Some(n) = self.node(id) else { continue };
            if !n.mask || lineage[i] || id == self.root {
                continue;
            }
            let Ok((dt, c)) = steer_cost(&x_new, &n.state, &self.weights, &self.steering) else {
                continue;
            };
            if dt == 0.0 || !(c_new + c < n.cost_to_come) {
                continue;
            }
            let Ok(edge) = solve_with_duration(&x_new, &n.state, dt, &self.weights) else {
                continue;
            };
            if !env.edge_feasible(&edge, cfg.edge_step) {
                continue;
            }
            touched.extend(self.reparent(id, new_id, edge));
            count += 1;
        }
        (count, touched)
    }

    /// Attempt the exact connection from `id` to the target. Returns true
    /// when it lowered `J*`.
    pub fn try_connect_target(
        &mut self,
        env: &Environment,
        cfg: &PlannerConfig,
        id: NodeId,
    ) -> bool {
        let n = self.get(id);
        if n.goal_checked || !(n.cost_to_come + n.heuristic < self.best_cost) {
            return false;
        }
        let state = n.state;
        let sol = steer(&state, &self.target, &self.weights, &self.steering)
            .ok()
            .filter(|sol| env.edge_feasible(sol, cfg.edge_step));
        let n = self.node_mut(id);
        n.goal_checked = true;
        let Some(sol) = sol else { return false };
        let total = n.cost_to_come + sol.cost;
        n.goal = Some(sol);
        if total < self.best_cost {
            self.best_cost = total;
            self.best_leaf = Some(id);
            true
        } else {
            false
        }
    }

    /// Refresh every mask under the current `J*` and delete masked subtrees
    /// that are masked throughout. The incumbent chain is never deleted.
    /// Returns the number of deleted nodes.
    pub fn prune(&mut self) -> usize {
        for i in 0..self.nodes.len() {
            if let Some(n) = &self.nodes[i] {
                let m = self.mask_for(n.cost_to_come, n.heuristic);
                self.nodes[i].as_mut().unwrap().mask = m;
            }
        }
        if self.prune_rule == PruneRule::Off || !self.best_cost.is_finite() {
            return 0;
        }
        let keep = match self.best_leaf {
            Some(leaf) => self.lineage(leaf),
            None => vec![false; self.nodes.len()],
        };
        // Children are visited after parents in breadth-first order, so the
        // reverse order settles each subtree before its root.
        let order = self.breadth_first();
        let mut all_masked = vec![false; self.nodes.len()];
        for &id in order.iter().rev() {
            let n = self.get(id);
            all_masked[id.0] = !n.mask && !keep[id.0] && n.children.iter().all(|c| all_masked[c.0]);
        }
        let mut deleted = 0;
        for &id in &order {
            if !all_masked[id.0] || self.nodes[id.0].is_none() {
                continue;
            }
            if let Some(p) = self.get(id).parent {
                if !all_masked[p.0] {
                    self.node_mut(p).children.retain(|&c| c != id);
                }
            }
            self.nodes[id.0] = None;
            deleted += 1;
        }
        self.live -= deleted;
        deleted
    }

    /// Point the tree at a new target: recompute heuristics, drop every
    /// target connection, reset `J*` and unmask all nodes.
    pub fn retarget(&mut self, target: FlatState) {
        self.target = target;
        self.best_cost = f64::INFINITY;
        self.best_leaf = None;
        for i in 0..self.nodes.len() {
            let Some(state) = self.nodes[i].as_ref().map(|n| n.state) else {
                continue;
            };
            let h = self.heuristic_of(&state);
            let n = self.nodes[i].as_mut().unwrap();
            n.heuristic = h;
            n.goal = None;
            n.goal_checked = false;
            n.mask = true;
        }
    }
}
