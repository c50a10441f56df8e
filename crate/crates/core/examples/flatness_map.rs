//! Map a payload trajectory to crane states and drive forces through the
//! flat parameterization, and check them against the feasibility bounds.
//!
//! ```text
//! cargo run --release --example flatness_map
//! ```

use flatplan::crane::{
    check_bounds, flat_to_state_input, CraneParams, FeasibilityBounds, FlatSample,
};
use flatplan::steer::{steer, FlatState, SteeringBounds, SteeringWeights};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = CraneParams::default();
    let bounds = FeasibilityBounds::default();
    let a = FlatState::at_rest([0.5, 0.4, 0.4]);
    let b = FlatState::at_rest([1.1, 0.7, 0.3]);
    let edge = steer(
        &a,
        &b,
        &SteeringWeights::default(),
        &SteeringBounds::default(),
    )?;
    println!("edge of {:.2} s", edge.dt_star);
    println!(
        "     t      s_x     s_y     s_z   alpha(deg) beta(deg)    u1      u2      u3   feasible"
    );
    for k in 0..=10 {
        let t = edge.dt_star * k as f64 / 10.0;
        let (x, snap) = edge.evaluate(t);
        let (z, u) = flat_to_state_input(&FlatSample::from_flat(&x, snap), &params)?;
        let report = check_bounds(&z, &u, &bounds);
        println!(
            "{t:6.2} {:7.3} {:7.3} {:7.3} {:9.3} {:9.3} {:7.3} {:7.3} {:7.3}   {}",
            z.q[0],
            z.q[1],
            z.q[2],
            z.q[3].to_degrees(),
            z.q[4].to_degrees(),
            u.u[0],
            u.u[1],
            u.u[2],
            if report.is_feasible() {
                "yes".to_string()
            } else {
                report.names().join(" ")
            }
        );
    }
    Ok(())
}
