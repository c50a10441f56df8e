//! Grow a tree once, then reuse it for a series of moved targets.
//!
//! ```text
//! cargo run --release --example replan_targets -- [seconds]
//! ```

use flatplan::cli::random_targets;
use flatplan::planner::{plan, replan, PlannerConfig};
use flatplan::scenario::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seconds: f64 = std::env::args().nth(1).map_or(Ok(10.0), |s| s.parse())?;
    let sc = Scenario::scenario1();
    let env = sc.environment()?;
    let cfg = PlannerConfig {
        t_plan: seconds,
        replan_budget: 0.2,
        replan_fallback_budget: 1.0,
        ..PlannerConfig::default()
    };
    let cold = plan(&env, sc.start_state(), sc.target_state(), &cfg)?;
    println!(
        "cold plan: J* = {:.3} after {:.1} s, {} nodes",
        cold.total_cost,
        cold.timing.wall_time,
        cold.tree.len()
    );

    for target in random_targets(&env, sc.target.position_m, 0.3, 10, 1) {
        let r = replan(&env, cold.tree.clone(), target, &cfg)?;
        let p = target.position();
        println!(
            "({:.2}, {:.2}, {:.2}): {}  J* = {:7.3}  first connection {:6.1} ms  total {:6.1} ms",
            p[0],
            p[1],
            p[2],
            if r.stats.connected_without_sampling {
                "reused "
            } else {
                "sampled"
            },
            r.total_cost,
            r.timing.first_solution.map_or(f64::NAN, |t| 1e3 * t),
            1e3 * r.timing.wall_time
        );
    }
    Ok(())
}
