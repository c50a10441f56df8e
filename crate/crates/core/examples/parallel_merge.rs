//! Grow several trees with derived seeds and merge them, as a multi-core
//! run does, and compare with the individual trees.
//!
//! ```text
//! cargo run --release --example parallel_merge -- [workers] [seconds]
//! ```

use flatplan::planner::{merge, plan, PlannerConfig};
use flatplan::scenario::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let workers: usize = args.next().map_or(Ok(4), |s| s.parse())?;
    let seconds: f64 = args.next().map_or(Ok(2.0), |s| s.parse())?;
    let sc = Scenario::scenario1();
    let env = sc.environment()?;
    let base = PlannerConfig {
        t_plan: seconds,
        ..PlannerConfig::default()
    };

    // Sequential stand-ins for the workers, with the seeds they would use.
    let mut trees = Vec::new();
    for i in 0..workers {
        let cfg = PlannerConfig {
            seed: base.worker_seed(i),
            ..base.clone()
        };
        let r = plan(&env, sc.start_state(), sc.target_state(), &cfg)?;
        println!(
            "worker {i}: seed {:#x}, J* = {:.3}, {} nodes",
            cfg.seed,
            r.total_cost,
            r.tree.len()
        );
        trees.push(r.tree);
    }
    let merged = merge(&env, &base, trees)?;
    merged.audit()?;
    println!(
        "merged: J* = {:.3}, {} nodes",
        merged.best_cost(),
        merged.len()
    );

    // The same through the planner's own thread pool.
    let threaded = plan(
        &env,
        sc.start_state(),
        sc.target_state(),
        &PlannerConfig { workers, ..base },
    )?;
    println!(
        "threaded run with {workers} workers: J* = {:.3}, {} nodes, {:.1} s wall",
        threaded.total_cost,
        threaded.tree.len(),
        threaded.timing.wall_time
    );
    Ok(())
}
