//! Artifact writers: trajectory and simulation CSV, run reports, distance
//! field slices. Numbers use Rust's shortest round-trip formatting, which
//! does not depend on the locale.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::crane::{flat_to_state_input, CraneParams, FlatSample};
use crate::error::FormatError;
use crate::planner::{PlanResult, PlanStats, PlanTiming, Trajectory};
use crate::sim::SimResult;
use crate::world::DistanceField;

/// Column order of [`write_trajectory_csv`].
pub const TRAJECTORY_COLUMNS: [&str; 26] = [
    "t", "p_x", "p_y", "p_z", "v_x", "v_y", "v_z", "a_x", "a_y", "a_z", "j_x", "j_y", "j_z", "s_x",
    "s_y", "s_z", "alpha", "beta", "ds_x", "ds_y", "ds_z", "dalpha", "dbeta", "u1", "u2", "u3",
];

/// Flat state, crane state and input sampled every `step` seconds.
pub fn write_trajectory_csv(
    mut w: impl Write,
    traj: &Trajectory,
    params: &CraneParams,
    step: f64,
) -> Result<(), FormatError> {
    writeln!(w, "{}", TRAJECTORY_COLUMNS.join(","))?;
    for s in traj.sample(step) {
        let (z, u) = flat_to_state_input(&FlatSample::from_flat(&s.state, s.snap), params)?;
        let mut row = vec![s.t];
        row.extend_from_slice(s.state.as_array());
        row.extend_from_slice(&z.to_vector());
        row.extend_from_slice(&u.u);
        writeln!(w, "{}", join(&row))?;
    }
    Ok(())
}

/// Simulated state, applied input, predicted state and error per step.
pub fn write_sim_csv(mut w: impl Write, r: &SimResult) -> Result<(), FormatError> {
    let states = [
        "s_x", "s_y", "s_z", "alpha", "beta", "ds_x", "ds_y", "ds_z", "dalpha", "dbeta",
    ];
    let mut header = vec!["t".to_string()];
    header.extend(states.iter().map(|s| s.to_string()));
    header.extend(["u1", "u2", "u3"].iter().map(|s| s.to_string()));
    header.extend(states.iter().map(|s| format!("pred_{s}")));
    header.push("error".into());
    writeln!(w, "{}", header.join(","))?;
    let errors = r.errors();
    for i in 0..r.times.len() {
        let mut row = vec![r.times[i]];
        row.extend_from_slice(&r.states[i].to_vector());
        row.extend_from_slice(&r.inputs[i].u);
        match r.predicted.get(i) {
            Some(p) => row.extend_from_slice(&p.to_vector()),
            None => row.extend_from_slice(&[f64::NAN; 10]),
        }
        row.push(errors.get(i).copied().unwrap_or(f64::NAN));
        writeln!(w, "{}", join(&row))?;
    }
    Ok(())
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Deterministic summary of a run (`stats.json`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub scenario: String,
    pub solved: bool,
    /// `null` when unsolved.
    pub j_star: Option<f64>,
    pub t_star: Option<f64>,
    pub tree_size: usize,
    pub edges: usize,
    pub stats: PlanStats,
}

impl PlanReport {
    pub fn new(scenario: &str, r: &PlanResult) -> Self {
        let solved = r.is_solved();
        Self {
            scenario: scenario.to_string(),
            solved,
            j_star: solved.then_some(r.total_cost),
            t_star: solved.then_some(r.travel_time),
            tree_size: r.tree.len(),
            edges: r.trajectory.edges.len(),
            stats: r.stats.clone(),
        }
    }
}

/// Wall-clock side of a run (`timing.json`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub seed: u64,
    #[serde(flatten)]
    pub timing: PlanTiming,
}

pub fn write_json<T: Serialize>(w: impl Write, value: &T) -> Result<(), FormatError> {
    let mut w = w;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

/// One row per voxel, x fastest: indices, center and distance in meters
/// (`inf` where no voxel is occupied). `z_slice` limits output to one layer.
pub fn write_distance_csv(
    mut w: impl Write,
    field: &DistanceField,
    z_slice: Option<usize>,
) -> Result<(), FormatError> {
    let g = &field.geometry;
    writeln!(w, "i,j,k,x,y,z,distance")?;
    let layers = match z_slice {
        Some(k) if k < g.dims[2] => k..k + 1,
        Some(_) => 0..0,
        None => 0..g.dims[2],
    };
    for k in layers {
        for j in 0..g.dims[1] {
            for i in 0..g.dims[0] {
                let c = g.center([i, j, k]);
                writeln!(
                    w,
                    "{i},{j},{k},{},{},{},{}",
                    c[0],
                    c[1],
                    c[2],
                    field.at([i, j, k])
                )?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steer::{steer, FlatState, SteeringBounds, SteeringWeights};

    #[test]
    fn trajectory_csv_shape() {
        let a = FlatState::at_rest([0.5, 0.5, 0.5]);
        let b = FlatState::at_rest([0.6, 0.5, 0.5]);
        let e = steer(
            &a,
            &b,
            &SteeringWeights::default(),
            &SteeringBounds::default(),
        )
        .unwrap();
        let traj = Trajectory { edges: vec![e] };
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj, &CraneParams::default(), 0.01).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0].split(',').count(), 26);
        assert_eq!(lines.len() - 1, traj.sample(0.01).len());
        assert!(lines[1].starts_with("0,0.5,0.5,0.5"));
    }
}
