//! Plan, then drive the full crane model with the flatness feedforward and
//! compare the simulated states with the predicted ones.
//!
//! ```text
//! cargo run --release --example simulate_feedforward
//! ```

use flatplan::planner::{plan, PlannerConfig};
use flatplan::scenario::Scenario;
use flatplan::sim::validate_flat_trajectory;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sc = Scenario::scenario2();
    let env = sc.environment()?;
    let cfg = PlannerConfig {
        t_plan: 3.0,
        ..PlannerConfig::default()
    };
    let r = plan(&env, sc.start_state(), sc.target_state(), &cfg)?;
    let traj = r.solution()?;
    let sim = validate_flat_trajectory(traj, &env.params, 1e-3)?;
    println!(
        "{} steps over {:.2} s, max state deviation {:.2e}",
        sim.times.len() - 1,
        traj.travel_time(),
        sim.max_state_error
    );
    let errors = sim.errors();
    let stride = (sim.times.len() / 10).max(1);
    println!("     t     s_x     s_y     s_z  alpha(deg)  beta(deg)     error");
    for i in (0..sim.times.len()).step_by(stride) {
        let z = sim.states[i];
        println!(
            "{:6.2} {:7.3} {:7.3} {:7.3} {:10.4} {:10.4} {:9.2e}",
            sim.times[i],
            z.q[0],
            z.q[1],
            z.q[2],
            z.q[3].to_degrees(),
            z.q[4].to_degrees(),
            errors[i]
        );
    }
    Ok(())
}
