//! Rasterize a scenario, compute its exact distance field and query the
//! conservative clearance along a straight line.
//!
//! ```text
//! cargo run --release --example distance_field
//! ```

use flatplan::scenario::Scenario;
use flatplan::world::{edt, rasterize};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sc = Scenario::scenario1();
    let ws = sc.workspace();
    let grid = rasterize(&sc.obstacles()?, &ws, sc.resolution_m)?;
    let field = edt(&grid);
    let g = field.geometry;
    println!(
        "{}: grid {}x{}x{} at {} m, {} occupied voxels",
        sc.name,
        g.dims[0],
        g.dims[1],
        g.dims[2],
        g.resolution,
        grid.occupied_count()
    );

    let (a, b) = (sc.start.position_m, sc.target.position_m);
    println!("\nclearance along the straight start-target line:");
    for k in 0..=10 {
        let s = k as f64 / 10.0;
        let p: [f64; 3] = std::array::from_fn(|i| a[i] + s * (b[i] - a[i]));
        let exact = sc
            .obstacles()?
            .iter()
            .map(|o| o.distance(&p))
            .fold(f64::INFINITY, f64::min);
        println!(
            "  ({:.2}, {:.2}, {:.2})  clearance {:.3} m  (exact box distance {:.3} m)",
            p[0],
            p[1],
            p[2],
            field.clearance(&p)?,
            exact
        );
    }
    Ok(())
}
