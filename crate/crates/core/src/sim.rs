//! Forward simulation of the crane under flatness-based feedforward.

use crate::crane::{
    dynamics, flat_to_input, flat_to_state, ControlInput, CraneParams, CraneState, FlatSample,
};
use crate::error::{CraneError, SimError};
use crate::planner::Trajectory;

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub times: Vec<f64>,
    pub states: Vec<CraneState>,
    /// Input applied from each grid time on.
    pub inputs: Vec<ControlInput>,
    /// Flatness-predicted states on the same grid (empty for plain runs).
    pub predicted: Vec<CraneState>,
    /// Infinity-norm distance between simulated and predicted state.
    pub max_state_error: f64,
}

impl SimResult {
    /// Per-step infinity-norm deviation from the prediction.
    pub fn errors(&self) -> Vec<f64> {
        self.states
            .iter()
            .zip(&self.predicted)
            .map(|(a, b)| state_distance(a, b))
            .collect()
    }
}

fn state_distance(a: &CraneState, b: &CraneState) -> f64 {
    let (a, b) = (a.to_vector(), b.to_vector());
    (0..10).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

/// Uniform grid `0, dt, 2 dt, ...` closed by `horizon` when it is off-grid.
fn time_grid(dt: f64, horizon: f64) -> Vec<f64> {
    let n = (horizon / dt + 1e-9).floor() as u64;
    let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    if horizon - n as f64 * dt > 1e-12 * horizon.max(1.0) {
        times.push(horizon);
    }
    times
}

/// One classical Runge-Kutta step of length `h` from `t`.
pub fn rk4_step(
    z: &CraneState,
    t: f64,
    h: f64,
    input: &impl Fn(f64) -> Result<ControlInput, CraneError>,
    params: &CraneParams,
) -> Result<CraneState, CraneError> {
    let f = |z: &[f64; 10], t: f64| -> Result<[f64; 10], CraneError> {
        dynamics(&CraneState::from_vector(z), &input(t)?, params)
    };
    let axpy = |z: &[f64; 10], a: f64, k: &[f64; 10]| -> [f64; 10] {
        std::array::from_fn(|i| z[i] + a * k[i])
    };
    let z0 = z.to_vector();
    let k1 = f(&z0, t)?;
    let k2 = f(&axpy(&z0, 0.5 * h, &k1), t + 0.5 * h)?;
    let k3 = f(&axpy(&z0, 0.5 * h, &k2), t + 0.5 * h)?;
    let k4 = f(&axpy(&z0, h, &k3), t + h)?;
    let z1 = std::array::from_fn(|i| z0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    Ok(CraneState::from_vector(&z1))
}

/// Fixed-step RK4 integration of the crane dynamics over `[0, horizon]`.
pub fn integrate(
    z0: CraneState,
    input: impl Fn(f64) -> ControlInput,
    params: &CraneParams,
    dt: f64,
    horizon: f64,
) -> Result<SimResult, SimError> {
    if !(dt > 0.0 && dt.is_finite() && horizon >= dt * (1.0 - 1e-12) && horizon.is_finite()) {
        return Err(SimError::InvalidStep { dt, horizon });
    }
    let times = time_grid(dt, horizon);
    let u = |t: f64| Ok(input(t));
    let mut states = Vec::with_capacity(times.len());
    let mut z = z0;
    states.push(z);
    for w in times.windows(2) {
        z = rk4_step(&z, w[0], w[1] - w[0], &u, params)?;
        states.push(z);
    }
    let inputs = times.iter().map(|&t| input(t)).collect();
    Ok(SimResult {
        times,
        states,
        inputs,
        predicted: Vec::new(),
        max_state_error: 0.0,
    })
}

/// Simulate the feedforward of a planned trajectory and compare the
/// result with the states predicted by the flat parameterization.
///
/// Steps that straddle an edge junction are split there, so every RK4
/// stage sees the smooth input of a single edge.
pub fn validate_flat_trajectory(
    traj: &Trajectory,
    params: &CraneParams,
    dt: f64,
) -> Result<SimResult, SimError> {
    if traj.is_empty() {
        return Err(SimError::EmptyTrajectory);
    }
    let horizon = traj.travel_time();
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SimError::InvalidStep { dt, horizon });
    }
    let mut starts = Vec::with_capacity(traj.edges.len());
    let mut acc = 0.0;
    for e in &traj.edges {
        starts.push(acc);
        acc += e.dt_star;
    }
    let sample_at = |t: f64| -> FlatSample {
        let (x, snap) = traj.evaluate(t).expect("non-empty trajectory");
        FlatSample::from_flat(&x, snap)
    };
    let predict = |t: f64| flat_to_state(&sample_at(t), params);

    let times = if horizon > 0.0 {
        time_grid(dt, horizon)
    } else {
        vec![0.0]
    };
    let mut z = predict(0.0)?;
    let mut states = vec![z];
    let mut predicted = vec![z];
    for w in times.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut cuts = vec![a];
        cuts.extend(starts.iter().copied().filter(|&s| s > a && s < b));
        cuts.push(b);
        for seg in cuts.windows(2) {
            let (s0, s1) = (seg[0], seg[1]);
            let mid = 0.5 * (s0 + s1);
            let k = starts.partition_point(|&s| s <= mid).saturating_sub(1);
            let (edge, offset) = (&traj.edges[k], starts[k]);
            let input = |t: f64| {
                let (x, snap) = edge.evaluate(t - offset);
                flat_to_input(&FlatSample::from_flat(&x, snap), params)
            };
            z = rk4_step(&z, s0, s1 - s0, &input, params)?;
        }
        states.push(z);
        predicted.push(predict(b)?);
    }
    let inputs = times
        .iter()
        .map(|&t| flat_to_input(&sample_at(t), params))
        .collect::<Result<Vec<_>, _>>()?;
    let max_state_error = states
        .iter()
        .zip(&predicted)
        .map(|(a, b)| state_distance(a, b))
        .fold(0.0, f64::max);
    Ok(SimResult {
        times,
        states,
        inputs,
        predicted,
        max_state_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steer::{steer, FlatState, SteeringBounds, SteeringSolution, SteeringWeights};

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let p = CraneParams::default();
        let z0 = CraneState::at_rest([1.0, 0.5, 0.4, 0.0, 0.0]);
        let hover = ControlInput {
            u: [0.0, 0.0, p.m_payload * p.gravity],
        };
        let r = integrate(z0, |_| hover, &p, 1e-3, 1.0).unwrap();
        assert_eq!(r.times.len(), 1001);
        let drift = r
            .states
            .iter()
            .map(|z| state_distance(z, &z0))
            .fold(0.0, f64::max);
        assert!(drift < 1e-9, "drift {drift}");
    }

    #[test]
    fn degenerate_trajectory_has_no_error() {
        let x = FlatState::at_rest([1.0, 0.5, 0.5]);
        let traj = Trajectory {
            edges: vec![SteeringSolution::degenerate(x)],
        };
        let r = validate_flat_trajectory(&traj, &CraneParams::default(), 1e-3).unwrap();
        assert_eq!(r.times, vec![0.0]);
        assert_eq!(r.max_state_error, 0.0);
    }

    #[test]
    fn single_edge_tracks_prediction() {
        let a = FlatState::at_rest([0.5, 0.5, 0.5]);
        let b = FlatState::at_rest([0.7, 0.6, 0.4]);
        let e = steer(
            &a,
            &b,
            &SteeringWeights::default(),
            &SteeringBounds::default(),
        )
        .unwrap();
        let traj = Trajectory { edges: vec![e] };
        let r = validate_flat_trajectory(&traj, &CraneParams::default(), 1e-3).unwrap();
        assert!(r.max_state_error < 1e-6, "error {}", r.max_state_error);
        assert_eq!(r.states.len(), r.predicted.len());
    }

    #[test]
    fn rejects_bad_step() {
        let z0 = CraneState::at_rest([1.0, 0.5, 0.4, 0.0, 0.0]);
        assert!(integrate(
            z0,
            |_| ControlInput::default(),
            &CraneParams::default(),
            0.0,
            1.0
        )
        .is_err());
        assert!(integrate(
            z0,
            |_| ControlInput::default(),
            &CraneParams::default(),
            0.5,
            0.1
        )
        .is_err());
    }
}
