//! Solve one LQMT steering problem and print the resulting edge.
//!
//! ```text
//! cargo run --release --example steer_edge
//! ```

use flatplan::steer::{
    sample_edge, steer, ArrivalCost, FlatState, SteeringBounds, SteeringWeights,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let start = FlatState::at_rest([0.2, 0.1, 0.7]);
    let goal = FlatState::from_parts([1.0, 0.6, 0.5], [0.2, 0.0, 0.0], [0.0; 3], [0.0; 3]);
    let weights = SteeringWeights::default();
    let bounds = SteeringBounds::default();

    let edge = steer(&start, &goal, &weights, &bounds)?;
    println!(
        "optimal transit time {:.4} s, cost {:.4}",
        edge.dt_star, edge.cost
    );

    // The cost as a function of the transit time; the optimum sits at its minimum.
    let c = ArrivalCost::new(&start, &goal, &weights);
    for f in [0.5, 0.8, 1.0, 1.25, 2.0] {
        let t = f * edge.dt_star;
        println!("  c({t:7.3}) = {:.4}", c.value(t));
    }

    println!("\n     t        x        y        z     snap_x   snap_y   snap_z");
    for s in sample_edge(&edge, edge.dt_star / 8.0)? {
        let p = s.state.position();
        println!(
            "{:6.3} {:8.4} {:8.4} {:8.4} {:8.4} {:8.4} {:8.4}",
            s.t, p[0], p[1], p[2], s.snap[0], s.snap[1], s.snap[2]
        );
    }
    Ok(())
}
