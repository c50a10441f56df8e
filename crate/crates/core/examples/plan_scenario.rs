//! Plan on a bundled scenario and write the trajectory as CSV.
//!
//! ```text
//! cargo run --release --example plan_scenario -- [1|2] [seconds] [seed]
//! ```

use std::fs::File;
use std::io::BufWriter;

use flatplan::io::write_trajectory_csv;
use flatplan::planner::{plan, PlannerConfig};
use flatplan::scenario::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let sc = match args.first().map(String::as_str) {
        Some("2") => Scenario::scenario2(),
        _ => Scenario::scenario1(),
    };
    let cfg = PlannerConfig {
        t_plan: args.get(1).map_or(Ok(5.0), |s| s.parse())?,
        seed: args.get(2).map_or(Ok(0), |s| s.parse())?,
        ..PlannerConfig::default()
    };
    let env = sc.environment()?;
    println!(
        "planning {} for {} s (seed {})",
        sc.name, cfg.t_plan, cfg.seed
    );
    let r = plan(&env, sc.start_state(), sc.target_state(), &cfg)?;
    let traj = r.solution()?;
    println!(
        "J* = {:.3}, t* = {:.2} s over {} edges; tree {} nodes, {} samples, {} rewires",
        r.total_cost,
        r.travel_time,
        traj.edges.len(),
        r.tree.len(),
        r.stats.samples,
        r.stats.rewires
    );
    println!("incumbent history:");
    for ((it, j), t) in r.stats.cost_trace.iter().zip(&r.timing.trace_times) {
        println!("  {t:7.3} s  iteration {it:6}  J* {j:.3}");
    }
    let path = std::env::temp_dir().join("flatplan_trajectory.csv");
    write_trajectory_csv(
        BufWriter::new(File::create(&path)?),
        traj,
        &env.params,
        0.01,
    )?;
    println!("trajectory written to {}", path.display());
    Ok(())
}
