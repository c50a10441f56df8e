use flatplan::crane::{CraneParams, FeasibilityBounds};
use flatplan::error::{FormatError, PlanError};
use flatplan::planner::{
    dump, extract_trajectory, merge, plan, replan, sample_free, Connection, Environment, NodeId,
    PlanResult, PlannerConfig, PruneRule, TrajectoryTree,
};
use flatplan::scenario::Scenario;
use flatplan::steer::{
    solve_with_duration, steer, steer_cost, FlatState, SteeringBounds, SteeringWeights,
};
use flatplan::world::{Aabb, Workspace};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn workspace() -> Workspace {
    Workspace {
        lo: [0.0; 3],
        hi: [2.0, 1.2, 1.0],
    }
}

fn open_env() -> Environment {
    Environment::new(
        workspace(),
        vec![],
        0.05,
        CraneParams::default(),
        FeasibilityBounds::default(),
        0.0,
    )
    .unwrap()
}

/// A thin wall across the middle of the x range, open above z = 0.5.
fn wall_env() -> Environment {
    let wall = Aabb::new([0.95, 0.0, 0.0], [0.1, 1.2, 0.5]).unwrap();
    Environment::new(
        workspace(),
        vec![wall],
        0.025,
        CraneParams::default(),
        FeasibilityBounds::default(),
        0.0,
    )
    .unwrap()
}

fn cfg() -> PlannerConfig {
    PlannerConfig {
        audit_every: Some(50),
        ..PlannerConfig::default()
    }
}

fn tree_at(start: [f64; 3], target: [f64; 3], rule: PruneRule) -> TrajectoryTree {
    TrajectoryTree::new(
        FlatState::at_rest(start),
        FlatState::at_rest(target),
        SteeringWeights::default(),
        SteeringBounds::default(),
        rule,
        0,
    )
}

fn connection(tree: &TrajectoryTree, parent: NodeId, x: &FlatState) -> Connection {
    let from = tree.node(parent).unwrap().state;
    let edge = steer(&from, x, tree.weights(), tree.steering()).unwrap();
    Connection { parent, edge }
}

/// Grow `n` nodes by sampling and optimal parent selection, without rewiring.
fn grow(env: &Environment, tree: &mut TrajectoryTree, n: usize, seed: u64) {
    let c = cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut added = 0;
    while added < n {
        let x = sample_free(env, &c, &mut rng).unwrap();
        if let Some(conn) = tree.find_parent(env, &c, &x, f64::INFINITY) {
            tree.insert(x, conn);
            added += 1;
        }
    }
}

#[test]
fn find_parent_returns_the_cheapest_feasible_parent() {
    let env = wall_env();
    let c = cfg();
    let mut tree = tree_at([0.3, 0.6, 0.7], [1.7, 0.6, 0.2], PruneRule::Off);
    grow(&env, &mut tree, 30, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut found = 0;
    for _ in 0..15 {
        let x = sample_free(&env, &c, &mut rng).unwrap();
        let mut best: Option<(f64, NodeId)> = None;
        for (id, n) in tree.iter() {
            let Ok((dt, cost)) = steer_cost(&n.state, &x, tree.weights(), tree.steering()) else {
                continue;
            };
            let Ok(edge) = solve_with_duration(&n.state, &x, dt, tree.weights()) else {
                continue;
            };
            let total = n.cost_to_come + cost;
            if env.edge_feasible(&edge, c.edge_step) && best.map_or(true, |(b, _)| total < b) {
                best = Some((total, id));
            }
        }
        let got = tree.find_parent(&env, &c, &x, f64::INFINITY);
        match (got, best) {
            (None, None) => {}
            (Some(conn), Some((cost, _))) => {
                let total = tree.node(conn.parent).unwrap().cost_to_come + conn.edge.cost;
                assert!(
                    (total - cost).abs() <= 1e-9 * cost,
                    "{total} vs exhaustive {cost}"
                );
                found += 1;
            }
            (got, best) => panic!("mismatch: {:?} vs {best:?}", got.map(|c| c.parent)),
        }
    }
    assert!(found > 0);
}

#[test]
fn find_parent_respects_the_limit() {
    let env = open_env();
    let tree = tree_at([0.3, 0.6, 0.5], [1.7, 0.6, 0.5], PruneRule::CostToCome);
    let x = FlatState::at_rest([0.5, 0.6, 0.5]);
    let conn = tree.find_parent(&env, &cfg(), &x, f64::INFINITY).unwrap();
    let cost = conn.edge.cost;
    assert!(tree.find_parent(&env, &cfg(), &x, cost * 0.999).is_none());
    assert!(tree.find_parent(&env, &cfg(), &x, cost * 1.001).is_some());
}

#[test]
fn rewire_moves_a_node_onto_a_cheaper_route() {
    let env = open_env();
    let c = cfg();
    let mut tree = tree_at([0.3, 0.3, 0.5], [1.8, 0.3, 0.5], PruneRule::Off);
    let detour = FlatState::at_rest([0.3, 1.0, 0.5]);
    let conn = connection(&tree, tree.root(), &detour);
    let d = tree.insert(detour, conn);
    let b_state = FlatState::at_rest([0.9, 0.3, 0.5]);
    let conn = connection(&tree, d, &b_state);
    let b = tree.insert(b_state, conn);
    let before = tree.node(b).unwrap().cost_to_come;

    let mid = FlatState::at_rest([0.6, 0.3, 0.5]);
    let conn = connection(&tree, tree.root(), &mid);
    let m = tree.insert(mid, conn);
    let (count, touched) = tree.rewire(&env, &c, m);
    assert_eq!(count, 1);
    assert_eq!(touched, vec![b]);
    let node = tree.node(b).unwrap();
    assert_eq!(node.parent, Some(m));
    let (_, edge) = steer_cost(&mid, &b_state, tree.weights(), tree.steering()).unwrap();
    assert!((node.cost_to_come - (tree.node(m).unwrap().cost_to_come + edge)).abs() < 1e-12);
    assert!(node.cost_to_come < before);
    assert!(!tree.node(d).unwrap().children.contains(&b));
    tree.audit().unwrap();
}

#[test]
fn rewire_never_creates_a_cycle() {
    let env = open_env();
    let c = cfg();
    let mut tree = tree_at([0.3, 0.3, 0.5], [1.8, 0.3, 0.5], PruneRule::Off);
    grow(&env, &mut tree, 25, 4);
    let ids: Vec<NodeId> = tree.iter().map(|(id, _)| id).collect();
    for id in ids {
        tree.rewire(&env, &c, id);
        tree.audit().unwrap();
    }
}

#[test]
fn prune_keeps_the_root_and_the_incumbent_chain() {
    let env = open_env();
    let c = cfg();
    let mut tree = tree_at([0.3, 0.3, 0.5], [0.4, 0.3, 0.5], PruneRule::CostToCome);
    let near = FlatState::at_rest([0.35, 0.3, 0.5]);
    let conn = connection(&tree, tree.root(), &near);
    let n = tree.insert(near, conn);
    // An expensive detour branch with a child.
    let far = FlatState::at_rest([1.9, 1.1, 0.5]);
    let conn = connection(&tree, tree.root(), &far);
    let f = tree.insert(far, conn);
    let farther = FlatState::at_rest([1.9, 0.1, 0.5]);
    let conn = connection(&tree, f, &farther);
    tree.insert(farther, conn);
    assert_eq!(tree.len(), 4);

    assert!(tree.try_connect_target(&env, &c, n));
    assert_eq!(tree.best_leaf(), Some(n));
    let detour = tree.node(f).unwrap().cost_to_come;
    assert!(
        detour > tree.best_cost(),
        "detour {detour} vs J* {}",
        tree.best_cost()
    );
    let deleted = tree.prune();
    assert_eq!(deleted, 2);
    assert_eq!(tree.len(), 2);
    assert!(tree.node(tree.root()).is_some() && tree.node(n).is_some());
    assert_eq!(tree.mask_law_violations(), 0);
    tree.audit().unwrap();
    let traj = extract_trajectory(&tree).unwrap();
    assert_eq!(traj.edges.len(), 2);
    assert!((traj.cost() - tree.best_cost()).abs() < 1e-9);
}

#[test]
fn pruning_off_keeps_everything() {
    let env = open_env();
    let c = cfg();
    let mut tree = tree_at([0.3, 0.3, 0.5], [0.9, 0.3, 0.5], PruneRule::Off);
    grow(&env, &mut tree, 10, 9);
    let ids: Vec<NodeId> = tree.iter().map(|(id, _)| id).collect();
    for id in ids {
        tree.try_connect_target(&env, &c, id);
    }
    assert!(tree.best_cost().is_finite());
    assert_eq!(tree.prune(), 0);
    assert_eq!(tree.len(), 11);
    assert_eq!(tree.unmasked_count(), 11);
}

#[test]
fn sampling_fails_cleanly_without_free_space() {
    let block = Aabb::new([-0.1; 3], [2.2, 1.4, 1.2]).unwrap();
    let env = Environment::new(
        workspace(),
        vec![block],
        0.1,
        CraneParams::default(),
        FeasibilityBounds::default(),
        0.0,
    )
    .unwrap();
    let c = PlannerConfig {
        max_sample_rejections: 50,
        ..cfg()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(matches!(
        sample_free(&env, &c, &mut rng),
        Err(PlanError::NoFreeSpace(50))
    ));
}

#[test]
fn endpoints_inside_obstacles_are_rejected() {
    let env = wall_env();
    let r = plan(
        &env,
        FlatState::at_rest([0.3, 0.6, 0.7]),
        FlatState::at_rest([1.0, 0.6, 0.2]),
        &cfg(),
    );
    assert!(matches!(r, Err(PlanError::InfeasibleEndpoints(_))));
}

#[test]
fn obstacle_free_plan_connects_directly() {
    let env = open_env();
    let start = FlatState::at_rest([0.3, 0.3, 0.5]);
    let target = FlatState::at_rest([0.45, 0.35, 0.5]);
    let r = plan(
        &env,
        start,
        target,
        &PlannerConfig {
            max_iterations: Some(20),
            ..cfg()
        },
    )
    .unwrap();
    assert!(r.is_solved());
    let (_, direct) = steer_cost(
        &start,
        &target,
        &SteeringWeights::default(),
        &SteeringBounds::default(),
    )
    .unwrap();
    assert!(r.total_cost <= direct + 1e-12);
    assert_eq!(r.stats.audit_failures, Vec::<String>::new());
}

fn solved_wall_plan(seed: u64) -> (Environment, PlanResult) {
    let env = wall_env();
    let c = PlannerConfig {
        max_iterations: Some(400),
        seed,
        ..cfg()
    };
    let r = plan(
        &env,
        FlatState::at_rest([0.3, 0.6, 0.3]),
        FlatState::at_rest([1.7, 0.6, 0.3]),
        &c,
    )
    .unwrap();
    (env, r)
}

#[test]
fn planned_trajectories_are_continuous_and_feasible() {
    let (env, r) = solved_wall_plan(0);
    assert!(r.is_solved(), "wall scenario unsolved in 400 iterations");
    let traj = &r.trajectory;
    assert!(traj
        .start()
        .unwrap()
        .bitwise_eq(&FlatState::at_rest([0.3, 0.6, 0.3])));
    assert!(traj
        .end()
        .unwrap()
        .bitwise_eq(&FlatState::at_rest([1.7, 0.6, 0.3])));
    for w in traj.edges.windows(2) {
        assert!(w[0].end.bitwise_eq(&w[1].start));
    }
    assert!((traj.cost() - r.total_cost).abs() < 1e-9);
    assert!((traj.travel_time() - r.travel_time).abs() < 1e-12);
    assert!(traj.edges.iter().all(|e| env.edge_feasible(e, 0.01)));
    // Crossing the wall means climbing over z = 0.5 plus the payload radius.
    let top = traj
        .sample(0.01)
        .iter()
        .map(|s| s.state.position()[2])
        .fold(0.0, f64::max);
    assert!(top > 0.55);
    assert!(r.stats.audits > 0 && r.stats.audit_failures.is_empty());
    assert_eq!(r.stats.max_mask_violations, 0);
}

#[test]
fn iteration_budget_makes_runs_reproducible() {
    let (_, a) = solved_wall_plan(5);
    let (_, b) = solved_wall_plan(5);
    assert_eq!(a.stats, b.stats);
    assert_eq!(a.total_cost.to_bits(), b.total_cost.to_bits());
    assert_eq!(
        dump::to_json(&a.tree).unwrap(),
        dump::to_json(&b.tree).unwrap()
    );
    let (_, c) = solved_wall_plan(6);
    assert_ne!(
        dump::to_json(&a.tree).unwrap(),
        dump::to_json(&c.tree).unwrap()
    );
}

#[test]
fn replanning_to_the_same_target_reproduces_the_incumbent() {
    let (env, r) = solved_wall_plan(0);
    let target = *r.tree.target();
    let c = PlannerConfig {
        replan_budget: 0.0,
        replan_fallback_budget: 0.0,
        ..cfg()
    };
    let again = replan(&env, r.tree.clone(), target, &c).unwrap();
    assert!(again.stats.connected_without_sampling);
    assert!((again.total_cost - r.total_cost).abs() <= 1e-9 * r.total_cost);
    again.tree.audit().unwrap();
}

#[test]
fn replanning_to_a_nearby_target_reuses_the_tree() {
    let (env, r) = solved_wall_plan(0);
    let target = FlatState::at_rest([1.6, 0.5, 0.35]);
    let c = PlannerConfig {
        replan_budget: 0.0,
        replan_fallback_budget: 0.0,
        ..cfg()
    };
    let again = replan(&env, r.tree, target, &c).unwrap();
    assert!(again.is_solved());
    assert!(again.trajectory.end().unwrap().bitwise_eq(&target));
    assert!(again
        .trajectory
        .edges
        .iter()
        .all(|e| env.edge_feasible(e, 0.01)));
    assert_eq!(again.stats.samples, 0);
}

#[test]
fn merging_keeps_the_best_solution_and_the_invariants() {
    let (env, a) = solved_wall_plan(0);
    let (_, b) = solved_wall_plan(1);
    let best = a.total_cost.min(b.total_cost);
    let merged = merge(&env, &cfg(), vec![a.tree.clone(), b.tree.clone()]).unwrap();
    merged.audit().unwrap();
    assert!(merged.best_cost() <= best + 1e-12);
    assert_eq!(merged.mask_law_violations(), 0);
    let root = merged.node(merged.root()).unwrap().state;
    assert!(root.bitwise_eq(&FlatState::at_rest([0.3, 0.6, 0.3])));

    let single = merge(&env, &cfg(), vec![a.tree.clone()]).unwrap();
    assert_eq!(single.best_cost(), a.total_cost);
    assert_eq!(single.len(), a.tree.len());

    let other = tree_at([0.4, 0.6, 0.3], [1.7, 0.6, 0.3], PruneRule::CostToCome);
    assert!(matches!(
        merge(&env, &cfg(), vec![a.tree, other]),
        Err(PlanError::IncompatibleTrees(_))
    ));
    assert!(merge(&env, &cfg(), vec![]).is_err());
}

#[test]
fn parallel_workers_merge_into_one_tree() {
    let env = wall_env();
    let c = PlannerConfig {
        max_iterations: Some(200),
        workers: 2,
        ..cfg()
    };
    let r = plan(
        &env,
        FlatState::at_rest([0.3, 0.6, 0.3]),
        FlatState::at_rest([1.7, 0.6, 0.3]),
        &c,
    )
    .unwrap();
    r.tree.audit().unwrap();
    assert_eq!(r.stats.workers, 2);
    assert!(r.stats.audit_failures.is_empty());
}

#[test]
fn tree_dump_round_trips() {
    let (_, r) = solved_wall_plan(0);
    let text = dump::to_json(&r.tree).unwrap();
    let back = dump::from_json(&text).unwrap();
    back.audit().unwrap();
    assert_eq!(back.len(), r.tree.len());
    assert_eq!(back.best_cost().to_bits(), r.tree.best_cost().to_bits());
    assert_eq!(dump::to_json(&back).unwrap(), text);
    let traj = extract_trajectory(&back).unwrap();
    assert_eq!(traj.edges.len(), r.trajectory.edges.len());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tree.json");
    dump::save(&r.tree, &path).unwrap();
    assert_eq!(dump::load(&path).unwrap().len(), r.tree.len());
}

#[test]
fn corrupted_dumps_are_refused() {
    let (_, r) = solved_wall_plan(0);
    let mut value: serde_json::Value =
        serde_json::from_str(&dump::to_json(&r.tree).unwrap()).unwrap();
    let nodes = value["nodes"].as_array_mut().unwrap();
    let last = nodes.len() - 1;
    nodes[last]["cost_to_come"] = serde_json::json!(0.5);
    let err = dump::from_json(&value.to_string()).unwrap_err();
    assert!(matches!(err, FormatError::IncompatibleDump(_)), "{err}");

    value["version"] = serde_json::json!(99);
    assert!(matches!(
        dump::from_json(&value.to_string()),
        Err(FormatError::IncompatibleDump(_))
    ));
    assert!(matches!(
        dump::from_json("{"),
        Err(FormatError::IncompatibleDump(_))
    ));
}

#[test]
fn bundled_scenarios_build_environments() {
    for s in [Scenario::scenario1(), Scenario::scenario2()] {
        let env = s.environment().unwrap();
        assert!(env.state_feasible(&s.start_state()));
        assert!(env.state_feasible(&s.target_state()));
        let again = Scenario::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(again, s);
    }
}

fn small_state() -> impl Strategy<Value = FlatState> {
    (
        (0.1..1.9f64, 0.1..1.1f64, 0.1..0.9f64),
        prop::array::uniform3(-0.2..0.2f64),
    )
        .prop_map(|((x, y, z), v)| FlatState::from_parts([x, y, z], v, [0.0; 3], [0.0; 3]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Arbitrary insertions, target connections and prunes keep the tree
    /// consistent.
    #[test]
    fn random_tree_operations_keep_invariants(
        states in prop::collection::vec(small_state(), 1..25),
        parents in prop::collection::vec(any::<prop::sample::Index>(), 25),
        prune_every in 1usize..6,
    ) {
        let env = open_env();
        let c = cfg();
        let mut tree = tree_at([0.3, 0.3, 0.5], [1.5, 0.8, 0.4], PruneRule::CostToCome);
        for (k, x) in states.iter().enumerate() {
            let live: Vec<NodeId> = tree.iter().map(|(id, _)| id).collect();
            let parent = parents[k].get(&live);
            let conn = connection(&tree, *parent, x);
            let id = tree.insert(*x, conn);
            // The planner prunes whenever the incumbent improves.
            if tree.try_connect_target(&env, &c, id) || k % prune_every == 0 {
                tree.prune();
            }
            prop_assert!(tree.audit().is_ok(), "{:?}", tree.audit());
            prop_assert_eq!(tree.mask_law_violations(), 0);
        }
    }

    #[test]
    fn samples_respect_free_space_and_bounds(seed in any::<u64>()) {
        let env = wall_env();
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = env.checked_bounds().velocity_box();
        for _ in 0..20 {
            let x = sample_free(&env, &c, &mut rng).unwrap();
            prop_assert!(env.position_free(&x.position()));
            prop_assert!(env.state_feasible(&x));
            for i in 0..3 {
                prop_assert!(x.velocity()[i] >= lo[i] && x.velocity()[i] <= hi[i]);
            }
        }
    }
}
