//! The sampling loop, parallel tree stacks, merging and warm-start replanning.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{PlannerConfig, SampleMode};
use super::env::Environment;
use super::trajectory::{extract_trajectory, Trajectory};
use super::tree::{NodeId, TrajectoryTree};
use crate::error::PlanError;
use crate::steer::{steer_cost, FlatState};

/// Counters of one planning run. Contains no wall-clock data, so two runs
/// with the same inputs and an iteration cap serialize identically.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    pub seed: u64,
    pub workers: usize,
    pub iterations: u64,
    pub samples: u64,
    pub rejected_informed: u64,
    pub rejected_no_parent: u64,
    pub inserted: u64,
    pub rewires: u64,
    pub goal_attempts: u64,
    pub deleted: u64,
    pub nodes: usize,
    pub unmasked: usize,
    pub audits: u64,
    pub audit_failures: Vec<String>,
    /// Largest count of unmasked nodes with cost-to-come above `J*` seen
    /// at an audit point.
    pub max_mask_violations: usize,
    /// Replanning only: a target connection existed in the loaded tree.
    pub connected_without_sampling: bool,
    /// `(iteration, J*)` every time the incumbent improved.
    pub cost_trace: Vec<(u64, f64)>,
}

impl PlanStats {
    fn absorb(&mut self, other: &PlanStats) {
        self.iterations += other.iterations;
        self.samples += other.samples;
        self.rejected_informed += other.rejected_informed;
        self.rejected_no_parent += other.rejected_no_parent;
        self.inserted += other.inserted;
        self.rewires += other.rewires;
        self.goal_attempts += other.goal_attempts;
        self.deleted += other.deleted;
        self.audits += other.audits;
        self.audit_failures
            .extend(other.audit_failures.iter().cloned());
        self.max_mask_violations = self.max_mask_violations.max(other.max_mask_violations);
    }
}

/// Wall-clock measurements, kept apart from [`PlanStats`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanTiming {
    pub wall_time: f64,
    /// Seconds from start until the first feasible solution.
    pub first_solution: Option<f64>,
    /// Elapsed seconds matching each entry of `PlanStats::cost_trace`.
    pub trace_times: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct PlanResult {
    /// Empty when no solution was found.
    pub trajectory: Trajectory,
    pub total_cost: f64,
    pub travel_time: f64,
    pub tree: TrajectoryTree,
    pub stats: PlanStats,
    pub timing: PlanTiming,
}

impl PlanResult {
    pub fn is_solved(&self) -> bool {
        !self.trajectory.is_empty()
    }

    /// The trajectory, or `NoSolutionFound` when the budget ran out first.
    pub fn solution(&self) -> Result<&Trajectory, PlanError> {
        if self.is_solved() {
            Ok(&self.trajectory)
        } else {
            Err(PlanError::NoSolutionFound)
        }
    }

    /// Incumbent cost after `seconds` of planning, from the cost trace.
    pub fn best_cost_at(&self, seconds: f64) -> f64 {
        self.stats
            .cost_trace
            .iter()
            .zip(&self.timing.trace_times)
            .take_while(|(_, &t)| t <= seconds)
            .last()
            .map_or(f64::INFINITY, |((_, j), _)| *j)
    }

    fn from_tree(tree: TrajectoryTree, mut stats: PlanStats, timing: PlanTiming) -> Self {
        let trajectory = extract_trajectory(&tree).unwrap_or_default();
        stats.nodes = tree.len();
        stats.unmasked = tree.unmasked_count();
        Self {
            total_cost: tree.best_cost(),
            travel_time: trajectory.travel_time(),
            trajectory,
            tree,
            stats,
            timing,
        }
    }
}

/// Random state over free space: position uniform over the free workspace,
/// velocity uniform in the checked velocity bounds.
pub fn sample_free(
    env: &Environment,
    cfg: &PlannerConfig,
    rng: &mut impl Rng,
) -> Result<FlatState, PlanError> {
    let ws = &env.workspace;
    let b = env.checked_bounds();
    let (v_lo, v_hi) = b.velocity_box();
    for _ in 0..cfg.max_sample_rejections.max(1) {
        let p: [f64; 3] = std::array::from_fn(|i| rng.gen_range(ws.lo[i]..=ws.hi[i]));
        if !env.position_free(&p) {
            continue;
        }
        let v: [f64; 3] = std::array::from_fn(|i| rng.gen_range(v_lo[i]..=v_hi[i]));
        let x = match cfg.sample_mode {
            SampleMode::VelocityOnly => FlatState::from_parts(p, v, [0.0; 3], [0.0; 3]),
            SampleMode::Full { accel, jerk } => {
                let a: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-accel..=accel));
                let j: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-jerk..=jerk));
                FlatState::from_parts(p, v, a, j)
            }
        };
        if env.state_feasible(&x) {
            return Ok(x);
        }
    }
    Err(PlanError::NoFreeSpace(cfg.max_sample_rejections))
}

struct Budget {
    origin: Instant,
    end: Option<Instant>,
    max_iterations: Option<u64>,
}

impl Budget {
    /// Runs for `seconds` from now; elapsed times are measured from `origin`.
    fn new(origin: Instant, seconds: f64, max_iterations: Option<u64>) -> Self {
        Self {
            origin,
            end: Instant::now().checked_add(Duration::from_secs_f64(seconds.clamp(0.0, 1e9))),
            max_iterations,
        }
    }

    fn elapsed(&self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }

    fn exhausted(&self, iterations: u64) -> bool {
        self.max_iterations.map_or(false, |m| iterations >= m)
            || self.end.map_or(false, |end| Instant::now() >= end)
    }
}

/// One tree grown by one sampling loop.
struct Worker<'a> {
    env: &'a Environment,
    cfg: &'a PlannerConfig,
    tree: TrajectoryTree,
    rng: ChaCha8Rng,
    stats: PlanStats,
    timing: PlanTiming,
    ops: u64,
    next_audit: u64,
}

impl<'a> Worker<'a> {
    fn new(env: &'a Environment, cfg: &'a PlannerConfig, tree: TrajectoryTree, seed: u64) -> Self {
        let stats = PlanStats {
            seed,
            workers: 1,
            ..PlanStats::default()
        };
        Self {
            env,
            cfg,
            tree,
            rng: ChaCha8Rng::seed_from_u64(seed),
            stats,
            timing: PlanTiming::default(),
            ops: 0,
            next_audit: cfg.audit_every.unwrap_or(u64::MAX),
        }
    }

    fn record_improvement(&mut self, before: f64, budget: &Budget) {
        let j = self.tree.best_cost();
        if j < before {
            let t = budget.elapsed();
            self.stats.cost_trace.push((self.stats.iterations, j));
            self.timing.trace_times.push(t);
            self.timing.first_solution.get_or_insert(t);
        }
    }

    fn maybe_audit(&mut self) {
        if self.ops < self.next_audit {
            return;
        }
        let every = self.cfg.audit_every.unwrap_or(u64::MAX);
        while self.next_audit <= self.ops {
            self.next_audit = self.next_audit.saturating_add(every);
        }
        self.audit();
    }

    fn audit(&mut self) {
        self.stats.audits += 1;
        if let Err(e) = self.tree.audit() {
            if self.stats.audit_failures.len() < 16 {
                self.stats.audit_failures.push(e);
            }
        }
        self.stats.max_mask_violations = self
            .stats
            .max_mask_violations
            .max(self.tree.mask_law_violations());
    }

    fn run(&mut self, budget: &Budget) -> Result<(), PlanError> {
        let cfg = self.cfg;
        while !budget.exhausted(self.stats.iterations) {
            self.stats.iterations += 1;
            let x = sample_free(self.env, cfg, &mut self.rng)?;
            self.stats.samples += 1;
            let Ok((_, h)) = steer_cost(
                &x,
                &self.tree.target,
                &self.tree.weights,
                &self.tree.steering,
            ) else {
                continue;
            };
            let j = self.tree.best_cost();
            if cfg.informed && j.is_finite() {
                // Direct obstacle-free cost from the root bounds any cost
                // through the tree from below.
                let root = self.tree.get(self.tree.root).state;
                let lower = steer_cost(&root, &x, &self.tree.weights, &self.tree.steering)
                    .map_or(f64::INFINITY, |(_, c)| c);
                if lower + h >= j {
                    self.stats.rejected_informed += 1;
                    continue;
                }
            }
            let limit = if cfg.informed { j - h } else { f64::INFINITY };
            let Some(conn) = self.tree.find_parent(self.env, cfg, &x, limit) else {
                if cfg.informed && j.is_finite() {
                    self.stats.rejected_informed += 1;
                } else {
                    self.stats.rejected_no_parent += 1;
                }
                continue;
            };
            let id = self.tree.insert_with_heuristic(x, conn, h);
            self.stats.inserted += 1;
            let (rewired, touched) = self.tree.rewire(self.env, cfg, id);
            self.stats.rewires += rewired as u64;
            self.ops += 2 + rewired as u64;
            self.connect(id);
            for t in touched {
                self.connect(t);
            }
            if self.tree.best_cost() < j || rewired > 0 {
                self.stats.deleted += self.tree.prune() as u64;
                self.ops += 1;
            }
            self.record_improvement(j, budget);
            self.maybe_audit();
        }
        Ok(())
    }

    fn connect(&mut self, id: NodeId) {
        if self.tree.node(id).map_or(true, |n| n.goal_checked) {
            return;
        }
        let before = self.tree.best_cost();
        let n = self.tree.get(id);
        if n.cost_to_come + n.heuristic < before {
            self.stats.goal_attempts += 1;
            self.tree.try_connect_target(self.env, self.cfg, id);
            self.ops += 1;
        }
    }

    fn finish(mut self, budget: &Budget) -> (TrajectoryTree, PlanStats, PlanTiming) {
        if self.cfg.audit_every.is_some() {
            self.audit();
        }
        self.timing.wall_time = budget.elapsed();
        (self.tree, self.stats, self.timing)
    }
}

fn check_endpoint(env: &Environment, x: &FlatState, what: &str) -> Result<(), PlanError> {
    if env.state_feasible(x) {
        Ok(())
    } else {
        Err(PlanError::InfeasibleEndpoints(format!(
            "{what} {:?} is in collision or violates the bounds",
            x.position()
        )))
    }
}

/// Grow a tree from `start` toward `target` until the budget is spent.
///
/// With `workers > 1`, independent trees with derived seeds grow in
/// parallel and are merged into one before extraction. An unsolved run is
/// returned as `Ok` with an empty trajectory so the tree can be reused.
pub fn plan(
    env: &Environment,
    start: FlatState,
    target: FlatState,
    cfg: &PlannerConfig,
) -> Result<PlanResult, PlanError> {
    cfg.validate()?;
    check_endpoint(env, &start, "start")?;
    check_endpoint(env, &target, "target")?;
    let t0 = Instant::now();
    let budget = Budget::new(t0, cfg.t_plan, cfg.max_iterations);

    let grow = |i: usize| -> Result<(TrajectoryTree, PlanStats, PlanTiming), PlanError> {
        let seed = cfg.worker_seed(i);
        let tree = TrajectoryTree::new(
            start,
            target,
            cfg.weights,
            cfg.steering,
            cfg.prune_rule,
            seed,
        );
        let root = tree.root;
        let mut w = Worker::new(env, cfg, tree, seed);
        w.connect(root);
        w.record_improvement(f64::INFINITY, &budget);
        w.run(&budget)?;
        Ok(w.finish(&budget))
    };

    if cfg.workers == 1 {
        let (tree, stats, timing) = grow(0)?;
        return Ok(PlanResult::from_tree(tree, stats, timing));
    }

    let runs: Vec<Result<_, PlanError>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..cfg.workers).map(|i| s.spawn(move || grow(i))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("planner worker panicked"))
            .collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut stats = PlanStats {
        seed: cfg.seed,
        workers: cfg.workers,
        ..PlanStats::default()
    };
    let mut first_solution: Option<f64> = None;
    let mut trees = Vec::with_capacity(runs.len());
    for (tree, s, t) in runs {
        stats.absorb(&s);
        if let Some(f) = t.first_solution {
            first_solution = Some(first_solution.map_or(f, |g: f64| g.min(f)));
        }
        trees.push(tree);
    }
    let merged = merge(env, cfg, trees)?;
    if let Err(e) = merged.audit() {
        stats.audit_failures.push(e);
    }
    let j = merged.best_cost();
    let wall = t0.elapsed().as_secs_f64();
    if j.is_finite() {
        stats.cost_trace.push((stats.iterations, j));
    }
    let timing = PlanTiming {
        wall_time: wall,
        first_solution,
        trace_times: if j.is_finite() { vec![wall] } else { vec![] },
    };
    Ok(PlanResult::from_tree(merged, stats, timing))
}

/// Combine trees grown from the same root toward the same target.
///
/// The tree with the lowest `J*` is the base; every unmasked node of the
/// others is re-homed into it through `find_parent`, then the result is
/// pruned under the final `J*`.
pub fn merge(
    env: &Environment,
    cfg: &PlannerConfig,
    trees: Vec<TrajectoryTree>,
) -> Result<TrajectoryTree, PlanError> {
    let first = trees
        .first()
        .ok_or_else(|| PlanError::IncompatibleTrees("nothing to merge".into()))?;
    let root_state = first.get(first.root).state;
    for t in &trees[1..] {
        if !t.get(t.root).state.bitwise_eq(&root_state) {
            return Err(PlanError::IncompatibleTrees("root states differ".into()));
        }
        if !t.target.bitwise_eq(&first.target) {
            return Err(PlanError::IncompatibleTrees("targets differ".into()));
        }
        if t.weights != first.weights {
            return Err(PlanError::IncompatibleTrees(
                "steering weights differ".into(),
            ));
        }
    }
    let base_idx = (0..trees.len())
        .min_by(|&a, &b| {
            trees[a]
                .best_cost()
                .total_cmp(&trees[b].best_cost())
                .then(a.cmp(&b))
        })
        .unwrap_or(0);
    let mut slots: Vec<Option<TrajectoryTree>> = trees.into_iter().map(Some).collect();
    let mut base = slots[base_idx].take().expect("base tree");
    let key = |x: &FlatState| x.as_array().map(f64::to_bits);
    let mut present: HashSet<[u64; 12]> = base.iter().map(|(_, n)| key(&n.state)).collect();
    for other in slots.iter().flatten() {
        for id in other.breadth_first() {
            let n = other.get(id);
            if !n.mask || id == other.root || !present.insert(key(&n.state)) {
                continue;
            }
            if let Some(conn) = base.find_parent(env, cfg, &n.state, f64::INFINITY) {
                let new_id = base.insert_with_heuristic(n.state, conn, n.heuristic);
                base.try_connect_target(env, cfg, new_id);
            }
        }
    }
    base.prune();
    Ok(base)
}

/// Warm-start replanning toward `new_target` from an existing tree.
///
/// Heuristics are recomputed and target connections attempted from nodes
/// in ascending order of `cost_to_come + heuristic`, with no new samples.
/// A found connection is then refined for `replan_budget` seconds; if none
/// exists the full loop resumes for `replan_fallback_budget` seconds.
pub fn replan(
    env: &Environment,
    mut tree: TrajectoryTree,
    new_target: FlatState,
    cfg: &PlannerConfig,
) -> Result<PlanResult, PlanError> {
    cfg.validate()?;
    check_endpoint(env, &new_target, "target")?;
    let t0 = Instant::now();
    tree.retarget(new_target);
    let mut order: Vec<(f64, NodeId)> = tree
        .iter()
        .map(|(id, n)| (n.estimated_total(), id))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut w = Worker::new(env, cfg, tree, cfg.seed);
    let probe = Budget::new(t0, 0.0, None);
    for (f, id) in order {
        let j = w.tree.best_cost();
        if f >= j {
            break;
        }
        w.connect(id);
        w.record_improvement(j, &probe);
    }
    w.stats.deleted += w.tree.prune() as u64;
    let connected = w.tree.best_cost().is_finite();
    w.stats.connected_without_sampling = connected;
    let seconds = if connected {
        cfg.replan_budget
    } else {
        cfg.replan_fallback_budget
    };
    let budget = Budget::new(t0, seconds, cfg.max_iterations);
    if seconds > 0.0 && cfg.max_iterations != Some(0) {
        w.run(&budget)?;
    }
    let (tree, stats, mut timing) = w.finish(&budget);
    timing.wall_time = t0.elapsed().as_secs_f64();
    Ok(PlanResult::from_tree(tree, stats, timing))
}
