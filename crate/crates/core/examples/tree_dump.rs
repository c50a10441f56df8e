//! Save a planned tree, load it back and inspect its structure.
//!
//! ```text
//! cargo run --release --example tree_dump
//! ```

use flatplan::planner::{dump, extract_trajectory, plan, PlannerConfig};
use flatplan::scenario::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sc = Scenario::scenario1();
    let env = sc.environment()?;
    let cfg = PlannerConfig {
        t_plan: 3.0,
        ..PlannerConfig::default()
    };
    let r = plan(&env, sc.start_state(), sc.target_state(), &cfg)?;
    let path = std::env::temp_dir().join("flatplan_tree.json");
    dump::save(&r.tree, &path)?;
    println!("saved {} nodes to {}", r.tree.len(), path.display());

    let tree = dump::load(&path)?;
    tree.audit()?;
    let depth = |mut id| {
        let mut d = 0;
        while let Some(p) = tree.node(id).and_then(|n| n.parent) {
            id = p;
            d += 1;
        }
        d
    };
    let deepest = tree.iter().map(|(id, _)| depth(id)).max().unwrap_or(0);
    let connected = tree.iter().filter(|(_, n)| n.goal_edge().is_some()).count();
    println!(
        "loaded: {} nodes, {} unmasked, depth {deepest}, {connected} with a target edge",
        tree.len(),
        tree.unmasked_count()
    );
    match extract_trajectory(&tree) {
        Ok(traj) => {
            println!("best trajectory, J* = {:.3}:", tree.best_cost());
            let mut t = 0.0;
            for e in &traj.edges {
                let p = e.end.position();
                t += e.dt_star;
                println!(
                    "  t = {t:6.2} s  -> ({:.3}, {:.3}, {:.3})",
                    p[0], p[1], p[2]
                );
            }
        }
        Err(e) => println!("no trajectory in the tree: {e}"),
    }
    Ok(())
}
