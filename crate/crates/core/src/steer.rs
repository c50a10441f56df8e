//! Linear-quadratic minimum-time (LQMT) steering for the flat model.
//!
//! The flat output of the crane (payload position) is modeled as three
//! decoupled quadruple integrators driven by snap. Between two flat states the
//! optimal input is a cubic in time, the optimal trajectory a degree-7
//! polynomial, and the cost a Laurent polynomial in the transit time `T`:
//!
//! ```text
//! c(T) = T + sum_{m=1..7} g_m T^-m
//! ```
//!
//! All Gramian solves go through a single cached Cholesky factor of the
//! normalized per-axis Gramian `G_hat`, using `G(T) = (T / r) D G_hat D` with
//! `D = diag(T^3, T^2, T, 1)`. The normalized matrix is well conditioned, so
//! the same factor serves every transit time.

use std::sync::OnceLock;

use nalgebra::{Cholesky, Matrix4, SMatrix, Vector4, U4};
use serde::{Deserialize, Serialize};

use crate::error::SteerError;

/// Number of spatial axes.
pub const AXES: usize = 3;
/// Integrator chain length per axis (position, velocity, acceleration, jerk).
pub const CHAIN: usize = 4;
/// Dimension of the flat state.
pub const STATE_DIM: usize = AXES * CHAIN;

pub type Matrix12 = SMatrix<f64, STATE_DIM, STATE_DIM>;

const FACTORIAL: [f64; 8] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0];

/// Power of `T` carried by each chain row of the Gramian (position row = 3).
const ROW_POWER: [i32; CHAIN] = [3, 2, 1, 0];

/// Flat-model state: payload position and its first three time derivatives.
///
/// Stored as one 12-vector ordered `[p, v, a, j]`, three entries each.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlatState([f64; STATE_DIM]);

impl FlatState {
    pub fn new(x: [f64; STATE_DIM]) -> Self {
        Self(x)
    }

    pub fn from_parts(p: [f64; 3], v: [f64; 3], a: [f64; 3], j: [f64; 3]) -> Self {
        let mut x = [0.0; STATE_DIM];
        for i in 0..AXES {
            x[i] = p[i];
            x[3 + i] = v[i];
            x[6 + i] = a[i];
            x[9 + i] = j[i];
        }
        Self(x)
    }

    /// State at rest (all derivatives zero) at `p`.
    pub fn at_rest(p: [f64; 3]) -> Self {
        Self::from_parts(p, [0.0; 3], [0.0; 3], [0.0; 3])
    }

    pub fn as_array(&self) -> &[f64; STATE_DIM] {
        &self.0
    }

    fn block(&self, k: usize) -> [f64; 3] {
        [self.0[3 * k], self.0[3 * k + 1], self.0[3 * k + 2]]
    }

    pub fn position(&self) -> [f64; 3] {
        self.block(0)
    }

    pub fn velocity(&self) -> [f64; 3] {
        self.block(1)
    }

    pub fn acceleration(&self) -> [f64; 3] {
        self.block(2)
    }

    pub fn jerk(&self) -> [f64; 3] {
        self.block(3)
    }

    /// `[p, v, a, j]` of a single axis.
    pub fn axis(&self, i: usize) -> [f64; CHAIN] {
        [self.0[i], self.0[3 + i], self.0[6 + i], self.0[9 + i]]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Bitwise equality of all 12 entries.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.0
            .iter()
            .zip(other.0.iter())
            .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Diagonal input weight `R` of the LQMT running cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteeringWeights {
    pub r: [f64; AXES],
}

impl SteeringWeights {
    pub fn new(r: [f64; AXES]) -> Result<Self, SteerError> {
        if r.iter().all(|&x| x > 0.0 && x.is_finite()) {
            Ok(Self { r })
        } else {
            Err(SteerError::InvalidWeights(r))
        }
    }

    pub fn uniform(r: f64) -> Result<Self, SteerError> {
        Self::new([r; AXES])
    }
}

impl Default for SteeringWeights {
    fn default() -> Self {
        Self { r: [0.1; AXES] }
    }
}

/// Search bracket for the transit time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteeringBounds {
    pub dt_min: f64,
    pub dt_max: f64,
    /// Samples of the logarithmic scan over `[dt_min, dt_max]`.
    pub grid_samples: usize,
}

impl SteeringBounds {
    pub fn new(dt_min: f64, dt_max: f64) -> Result<Self, SteerError> {
        let b = Self {
            dt_min,
            dt_max,
            ..Self::default()
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), SteerError> {
        if !(self.dt_min > 0.0 && self.dt_max.is_finite()) {
            return Err(SteerError::NonPositiveDuration(self.dt_min));
        }
        if self.dt_max <= self.dt_min {
            return Err(SteerError::EmptyBracket {
                dt_min: self.dt_min,
                dt_max: self.dt_max,
            });
        }
        if self.grid_samples < 3 {
            return Err(SteerError::GridTooCoarse(self.grid_samples));
        }
        Ok(())
    }
}

impl Default for SteeringBounds {
    fn default() -> Self {
        Self {
            dt_min: 1e-3,
            dt_max: 60.0,
            grid_samples: 512,
        }
    }
}

fn normalized_gramian() -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| {
        let (a, b) = (ROW_POWER[i], ROW_POWER[j]);
        1.0 / ((a + b + 1) as f64 * FACTORIAL[a as usize] * FACTORIAL[b as usize])
    })
}

fn gramian_factor() -> &'static Cholesky<f64, U4> {
    static FACTOR: OnceLock<Cholesky<f64, U4>> = OnceLock::new();
    FACTOR.get_or_init(|| {
        Cholesky::new(normalized_gramian()).expect("normalized Gramian is positive definite")
    })
}

fn solve_normalized(rhs: &[f64; CHAIN]) -> [f64; CHAIN] {
    let z = gramian_factor().solve(&Vector4::from_column_slice(rhs));
    [z[0], z[1], z[2], z[3]]
}

/// Per-axis `exp(A dt)`: `dt^k / k!` on the k-th superdiagonal.
pub fn axis_transition(dt: f64) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| {
        if j >= i {
            dt.powi((j - i) as i32) / FACTORIAL[j - i]
        } else {
            0.0
        }
    })
}

/// `exp(A dt)` of the full 12-dimensional flat model.
pub fn state_transition(dt: f64) -> Matrix12 {
    let block = axis_transition(dt);
    let mut phi = Matrix12::zeros();
    for i in 0..CHAIN {
        for j in 0..CHAIN {
            for axis in 0..AXES {
                phi[(3 * i + axis, 3 * j + axis)] = block[(i, j)];
            }
        }
    }
    phi
}

/// Per-axis reachability Gramian over a window of length `dt` with weight `r`.
pub fn axis_gramian(dt: f64, r: f64) -> Result<Matrix4<f64>, SteerError> {
    if !(dt > 0.0) {
        return Err(SteerError::NonPositiveDuration(dt));
    }
    Ok(Matrix4::from_fn(|i, j| {
        let (a, b) = (ROW_POWER[i], ROW_POWER[j]);
        dt.powi(a + b + 1)
            / ((a + b + 1) as f64 * FACTORIAL[a as usize] * FACTORIAL[b as usize] * r)
    }))
}

/// Reachability Gramian `G(t0, t0 + dt)`, block diagonal per axis.
pub fn gramian(dt: f64, w: &SteeringWeights) -> Result<Matrix12, SteerError> {
    let mut g = Matrix12::zeros();
    for axis in 0..AXES {
        let block = axis_gramian(dt, w.r[axis])?;
        for i in 0..CHAIN {
            for j in 0..CHAIN {
                g[(3 * i + axis, 3 * j + axis)] = block[(i, j)];
            }
        }
    }
    Ok(g)
}

/// Boundary mismatch `x1 - exp(A dt) x0` of one axis.
fn axis_mismatch(x0: &[f64; CHAIN], x1: &[f64; CHAIN], dt: f64) -> [f64; CHAIN] {
    let mut d = [0.0; CHAIN];
    for i in 0..CHAIN {
        let mut free = 0.0;
        for j in i..CHAIN {
            free += x0[j] * dt.powi((j - i) as i32) / FACTORIAL[j - i];
        }
        d[i] = x1[i] - free;
    }
    d
}

/// Mismatch rescaled by `D^-1`; the quantity handed to the normalized factor.
fn scaled(d: &[f64; CHAIN], dt: f64) -> [f64; CHAIN] {
    let mut s = [0.0; CHAIN];
    for i in 0..CHAIN {
        s[i] = d[i] / dt.powi(ROW_POWER[i]);
    }
    s
}

fn dot4(a: &[f64; CHAIN], b: &[f64; CHAIN]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `c = dt + 1/2 d^T G^-1(dt) d` for a fixed transit time.
pub fn cost_at(
    x0: &FlatState,
    x1: &FlatState,
    dt: f64,
    w: &SteeringWeights,
) -> Result<f64, SteerError> {
    if !(dt > 0.0) {
        return Err(SteerError::NonPositiveDuration(dt));
    }
    let mut quad = 0.0;
    for axis in 0..AXES {
        let d_hat = scaled(&axis_mismatch(&x0.axis(axis), &x1.axis(axis), dt), dt);
        let z = solve_normalized(&d_hat);
        quad += w.r[axis] * dot4(&d_hat, &z) / dt;
    }
    let c = dt + 0.5 * quad;
    if c.is_finite() {
        Ok(c)
    } else {
        Err(SteerError::IllConditioned(dt))
    }
}

/// The cost as a function of transit time for one fixed pair of states.
///
/// Coefficients `g_1..g_7` of `c(T) = T + sum g_m T^-m`, obtained by
/// expanding the scaled mismatch as `sum_k W_k T^(k-3)` and applying the
/// normalized Gramian factor to each `W_k`.
#[derive(Clone, Copy, Debug)]
pub struct ArrivalCost {
    coeff: [f64; 8],
}

impl ArrivalCost {
    pub fn new(x0: &FlatState, x1: &FlatState, w: &SteeringWeights) -> Self {
        let mut coeff = [0.0; 8];
        for axis in 0..AXES {
            let (a0, a1) = (x0.axis(axis), x1.axis(axis));
            // W[k][i]: coefficient of T^(k-3) in the i-th scaled mismatch entry.
            let mut basis = [[0.0; CHAIN]; CHAIN];
            for (k, row) in basis.iter_mut().enumerate() {
                for (i, entry) in row.iter_mut().enumerate() {
                    if k == i {
                        *entry += a1[i];
                    }
                    if k >= i {
                        *entry -= a0[k] / FACTORIAL[k - i];
                    }
                }
            }
            let solved: Vec<[f64; CHAIN]> = basis.iter().map(solve_normalized).collect();
            for k in 0..CHAIN {
                for l in 0..CHAIN {
                    coeff[7 - k - l] += 0.5 * w.r[axis] * dot4(&basis[k], &solved[l]);
                }
            }
        }
        Self { coeff }
    }

    pub fn value(&self, t: f64) -> f64 {
        let inv = 1.0 / t;
        let mut acc = 0.0;
        for m in (1..8).rev() {
            acc = (acc + self.coeff[m]) * inv;
        }
        t + acc
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let inv = 1.0 / t;
        let mut acc = 0.0;
        for m in (1..8).rev() {
            acc = (acc - m as f64 * self.coeff[m]) * inv;
        }
        1.0 + acc * inv
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        let inv = 1.0 / t;
        let mut acc = 0.0;
        for m in (1..8).rev() {
            acc = (acc + (m * (m + 1)) as f64 * self.coeff[m]) * inv;
        }
        acc * inv * inv
    }

    /// Global minimizer over the bracket: log-grid scan, then safeguarded
    /// Newton polishing of `c'(T) = 0` around every grid-local minimum.
    pub fn minimize(&self, b: &SteeringBounds) -> Result<(f64, f64), SteerError> {
        b.validate()?;
        let n = b.grid_samples;
        let ratio = (b.dt_max / b.dt_min).ln() / (n - 1) as f64;
        let grid: Vec<f64> = (0..n)
            .map(|k| {
                if k == n - 1 {
                    b.dt_max
                } else {
                    b.dt_min * (ratio * k as f64).exp()
                }
            })
            .collect();
        let values: Vec<f64> = grid.iter().map(|&t| self.value(t)).collect();

        let mut best: Option<(f64, f64)> = None;
        let mut consider = |t: f64, c: f64| {
            if c.is_finite() && best.map_or(true, |(_, bc)| c < bc) {
                best = Some((t, c));
            }
        };
        consider(grid[0], values[0]);
        consider(grid[n - 1], values[n - 1]);
        for k in 1..n - 1 {
            let c = values[k];
            if !c.is_finite() || c > values[k - 1] || c > values[k + 1] {
                continue;
            }
            let t = self.polish(grid[k - 1], grid[k + 1], grid[k]);
            let ct = self.value(t);
            if ct <= c {
                consider(t, ct);
            } else {
                consider(grid[k], c);
            }
        }
        best.ok_or(SteerError::NoFiniteCost)
    }

    /// Root of `c'` inside `[lo, hi]`, starting from `guess`.
    fn polish(&self, mut lo: f64, mut hi: f64, guess: f64) -> f64 {
        let (flo, fhi) = (self.derivative(lo), self.derivative(hi));
        if !(flo < 0.0 && fhi > 0.0) {
            return self.golden(lo, hi);
        }
        let mut t = guess;
        for _ in 0..100 {
            let f = self.derivative(t);
            if f == 0.0 {
                return t;
            }
            if f < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let df = self.second_derivative(t);
            let newton = t - f / df;
            let next = if df > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - t).abs() <= 1e-15 * t.max(1.0) || hi - lo <= 1e-14 * hi {
                return next;
            }
            t = next;
        }
        t
    }

    fn golden(&self, mut lo: f64, mut hi: f64) -> f64 {
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let mut x1 = hi - INV_PHI * (hi - lo);
        let mut x2 = lo + INV_PHI * (hi - lo);
        let (mut f1, mut f2) = (self.value(x1), self.value(x2));
        for _ in 0..200 {
            if hi - lo <= 1e-13 * hi {
                break;
            }
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - INV_PHI * (hi - lo);
                f1 = self.value(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + INV_PHI * (hi - lo);
                f2 = self.value(x2);
            }
        }
        0.5 * (lo + hi)
    }
}

/// Optimal transit time `dt*` minimizing [`cost_at`] over the bracket.
pub fn optimal_arrival_time(
    x0: &FlatState,
    x1: &FlatState,
    w: &SteeringWeights,
    b: &SteeringBounds,
) -> Result<f64, SteerError> {
    ArrivalCost::new(x0, x1, w).minimize(b).map(|(t, _)| t)
}

/// Optimal transit time and cost without building the trajectory.
///
/// Coincident states give `(0, 0)`.
pub fn steer_cost(
    x0: &FlatState,
    x1: &FlatState,
    w: &SteeringWeights,
    b: &SteeringBounds,
) -> Result<(f64, f64), SteerError> {
    if x0.bitwise_eq(x1) {
        return Ok((0.0, 0.0));
    }
    let dt = optimal_arrival_time(x0, x1, w, b)?;
    Ok((dt, cost_at(x0, x1, dt, w)?))
}

/// One solved LQMT edge with closed-form trajectory and input generators.
#[derive(Clone, Debug, PartialEq)]
pub struct SteeringSolution {
    pub dt_star: f64,
    pub cost: f64,
    /// `x1 - exp(A dt*) x0`.
    pub d_vec: [f64; STATE_DIM],
    /// Costate at the arrival time, `-G^-1 d`.
    pub costate_t1: [f64; STATE_DIM],
    pub start: FlatState,
    pub end: FlatState,
    /// Position polynomial per axis in normalized time `s = t / dt*`.
    poly: [[f64; 8]; AXES],
}

/// Build the edge for a prescribed transit time.
pub fn solve_with_duration(
    x0: &FlatState,
    x1: &FlatState,
    dt: f64,
    w: &SteeringWeights,
) -> Result<SteeringSolution, SteerError> {
    let cost = cost_at(x0, x1, dt, w)?;
    let mut d_vec = [0.0; STATE_DIM];
    let mut costate_t1 = [0.0; STATE_DIM];
    let mut poly = [[0.0; 8]; AXES];
    for axis in 0..AXES {
        let a0 = x0.axis(axis);
        let d = axis_mismatch(&a0, &x1.axis(axis), dt);
        let z = solve_normalized(&scaled(&d, dt));
        let r = w.r[axis];
        for i in 0..CHAIN {
            d_vec[3 * i + axis] = d[i];
            costate_t1[3 * i + axis] = -r / dt * z[i] / dt.powi(ROW_POWER[i]);
        }
        // Snap is u(s) = (1/dt) * sum_i z_i (1 - s)^a_i / a_i!; expand in s.
        let mut snap = [0.0; CHAIN];
        for i in 0..CHAIN {
            let a = ROW_POWER[i] as usize;
            for (k, coef) in snap.iter_mut().enumerate().take(a + 1) {
                let binom = FACTORIAL[a] / (FACTORIAL[k] * FACTORIAL[a - k]);
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                *coef += z[i] * sign * binom / FACTORIAL[a];
            }
        }
        let p = &mut poly[axis];
        p[0] = a0[0];
        p[1] = a0[1] * dt;
        p[2] = a0[2] * dt * dt / 2.0;
        p[3] = a0[3] * dt.powi(3) / 6.0;
        let dt3 = dt.powi(3);
        for (k, c) in snap.iter().enumerate() {
            p[k + 4] += dt3 * c * FACTORIAL[k] / FACTORIAL[k + 4];
        }
    }
    Ok(SteeringSolution {
        dt_star: dt,
        cost,
        d_vec,
        costate_t1,
        start: *x0,
        end: *x1,
        poly,
    })
}

/// Solve the LQMT edge from `x0` to `x1` with optimal transit time.
pub fn steer(
    x0: &FlatState,
    x1: &FlatState,
    w: &SteeringWeights,
    b: &SteeringBounds,
) -> Result<SteeringSolution, SteerError> {
    if !(x0.is_finite() && x1.is_finite()) {
        return Err(SteerError::NonFiniteState);
    }
    if x0.bitwise_eq(x1) {
        return Ok(SteeringSolution::degenerate(*x0));
    }
    let dt = optimal_arrival_time(x0, x1, w, b)?;
    solve_with_duration(x0, x1, dt, w)
}

impl SteeringSolution {
    /// Zero-duration, zero-cost self edge at `x`.
    pub fn degenerate(x: FlatState) -> Self {
        Self {
            dt_star: 0.0,
            cost: 0.0,
            d_vec: [0.0; STATE_DIM],
            costate_t1: [0.0; STATE_DIM],
            start: x,
            end: x,
            poly: [[0.0; 8]; AXES],
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.dt_star == 0.0
    }

    /// Flat state and snap input at local time `t` in `[0, dt*]`.
    pub fn evaluate(&self, t: f64) -> (FlatState, [f64; 3]) {
        if self.is_degenerate() {
            return (self.start, [0.0; 3]);
        }
        let dt = self.dt_star;
        let s = (t / dt).clamp(0.0, 1.0);
        let mut x = [0.0; STATE_DIM];
        let mut snap = [0.0; 3];
        for axis in 0..AXES {
            let derivs = poly_derivatives(&self.poly[axis], s);
            let mut scale = 1.0;
            for (order, value) in derivs.iter().enumerate() {
                if order < CHAIN {
                    x[3 * order + axis] = value * scale;
                } else {
                    snap[axis] = value * scale;
                }
                scale /= dt;
            }
        }
        (FlatState(x), snap)
    }

    pub fn state_at(&self, t: f64) -> FlatState {
        self.evaluate(t).0
    }

    pub fn input_at(&self, t: f64) -> [f64; 3] {
        self.evaluate(t).1
    }
}

/// Value and first four derivatives of a degree-7 polynomial at `s`.
fn poly_derivatives(c: &[f64; 8], s: f64) -> [f64; 5] {
    let mut out = [0.0; 5];
    for (order, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for k in (order..8).rev() {
            acc = acc * s + c[k] * FACTORIAL[k] / FACTORIAL[k - order];
        }
        *slot = acc;
    }
    out
}

/// One sample of a discretized edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeSample {
    pub t: f64,
    pub state: FlatState,
    pub snap: [f64; 3],
}

/// Local sample times `0, step, 2 step, ..., dt` (the end always included).
pub fn sample_times(dt: f64, step: f64) -> Result<Vec<f64>, SteerError> {
    if !(step > 0.0) {
        return Err(SteerError::NonPositiveStep(step));
    }
    let mut times = vec![0.0];
    if dt > 0.0 {
        let mut k = 1u64;
        loop {
            let t = k as f64 * step;
            if t >= dt * (1.0 - 1e-12) {
                break;
            }
            times.push(t);
            k += 1;
        }
        times.push(dt);
    }
    Ok(times)
}

/// Discretize an edge at a fixed time step.
pub fn sample_edge(sol: &SteeringSolution, step: f64) -> Result<Vec<EdgeSample>, SteerError> {
    Ok(sample_times(sol.dt_star, step)?
        .into_iter()
        .map(|t| {
            let (state, snap) = sol.evaluate(t);
            EdgeSample { t, state, snap }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rest_to_rest(dx: f64) -> (FlatState, FlatState) {
        (
            FlatState::at_rest([0.0; 3]),
            FlatState::at_rest([dx, 0.0, 0.0]),
        )
    }

    #[test]
    fn transition_closed_form() {
        assert_eq!(state_transition(0.0), Matrix12::identity());
        let phi = axis_transition(1.0);
        assert_eq!(
            phi.row(0).iter().copied().collect::<Vec<_>>(),
            vec![1.0, 1.0, 0.5, 1.0 / 6.0]
        );
        assert!((axis_transition(2.0)[(0, 3)] - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gramian_position_entry() {
        let g = axis_gramian(1.0, 1.0).unwrap();
        assert!((g[(0, 0)] - 1.0 / 252.0).abs() < 1e-16);
        assert!(matches!(
            gramian(0.0, &SteeringWeights::default()),
            Err(SteerError::NonPositiveDuration(_))
        ));
    }

    #[test]
    fn gramian_symmetric_and_positive_definite() {
        let w = SteeringWeights::new([0.1, 0.5, 2.0]).unwrap();
        for &dt in &[1e-6, 1e-3, 0.5, 3.0, 40.0] {
            let g = gramian(dt, &w).unwrap();
            assert_eq!(g, g.transpose());
            assert!(Cholesky::new(g).is_some(), "dt = {dt}");
        }
    }

    #[test]
    fn zero_states_cost_is_duration() {
        let x = FlatState::at_rest([0.0; 3]);
        let w = SteeringWeights::default();
        for &dt in &[0.01, 1.0, 7.5] {
            assert_eq!(cost_at(&x, &x, dt, &w).unwrap(), dt);
        }
    }

    #[test]
    fn cost_blows_up_near_zero() {
        let (x0, x1) = rest_to_rest(1.0);
        let w = SteeringWeights::default();
        let small = cost_at(&x0, &x1, 1e-2, &w).unwrap();
        let smaller = cost_at(&x0, &x1, 1e-3, &w).unwrap();
        assert!(small > 1e10 && smaller > small);
        assert!(matches!(
            cost_at(&x0, &x1, -1.0, &w),
            Err(SteerError::NonPositiveDuration(_))
        ));
    }

    #[test]
    fn laurent_form_matches_gramian_route() {
        let x0 = FlatState::new([
            0.3, -0.2, 0.1, 0.5, 0.1, -0.3, 0.05, 0.2, -0.1, 0.3, -0.4, 0.2,
        ]);
        let x1 = FlatState::new([
            1.1, 0.4, -0.3, -0.2, 0.6, 0.1, -0.2, 0.0, 0.3, 0.1, 0.2, -0.5,
        ]);
        let w = SteeringWeights::new([0.1, 0.3, 0.7]).unwrap();
        let curve = ArrivalCost::new(&x0, &x1, &w);
        for &t in &[0.05, 0.4, 1.0, 3.3, 12.0, 55.0] {
            let a = curve.value(t);
            let b = cost_at(&x0, &x1, t, &w).unwrap();
            assert!((a - b).abs() <= 1e-10 * b.abs(), "t={t}: {a} vs {b}");
            let h = 1e-6 * t;
            let fd = (curve.value(t + h) - curve.value(t - h)) / (2.0 * h);
            assert!((curve.derivative(t) - fd).abs() <= 1e-5 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn coincident_states_are_degenerate() {
        let x = FlatState::new([0.5; STATE_DIM]);
        let sol = steer(
            &x,
            &x,
            &SteeringWeights::default(),
            &SteeringBounds::default(),
        )
        .unwrap();
        assert_eq!(sol.dt_star, 0.0);
        assert_eq!(sol.cost, 0.0);
        let samples = sample_edge(&sol, 0.1).unwrap();
        assert_eq!(samples.len(), 1);
        assert_eq!(samples[0].state, x);
    }

    #[test]
    fn edge_hits_both_boundaries() {
        let x0 = FlatState::new([0.1, 0.2, 0.3, 0.0, -0.1, 0.2, 0.1, 0.0, 0.0, -0.2, 0.1, 0.0]);
        let x1 = FlatState::new([1.0, -0.5, 0.7, 0.1, 0.0, 0.0, 0.0, 0.2, -0.1, 0.0, 0.0, 0.3]);
        let sol = steer(
            &x0,
            &x1,
            &SteeringWeights::default(),
            &SteeringBounds::default(),
        )
        .unwrap();
        let (a, b) = (sol.state_at(0.0), sol.state_at(sol.dt_star));
        for i in 0..STATE_DIM {
            assert!((a.as_array()[i] - x0.as_array()[i]).abs() < 1e-12);
            assert!((b.as_array()[i] - x1.as_array()[i]).abs() < 1e-8);
        }
        assert_eq!(
            sol.cost,
            cost_at(&x0, &x1, sol.dt_star, &SteeringWeights::default()).unwrap()
        );
        assert!(sol.cost >= sol.dt_star);
    }

    #[test]
    fn costate_matches_explicit_solve() {
        let (x0, x1) = rest_to_rest(0.8);
        let w = SteeringWeights::default();
        let sol = solve_with_duration(&x0, &x1, 3.0, &w).unwrap();
        let g = gramian(3.0, &w).unwrap();
        let lambda = nalgebra::SVector::<f64, STATE_DIM>::from_column_slice(&sol.costate_t1);
        let d = nalgebra::SVector::<f64, STATE_DIM>::from_column_slice(&sol.d_vec);
        let residual = g * lambda + d;
        assert!(residual.amax() < 1e-12, "{residual}");
    }

    #[test]
    fn sampling_rules() {
        let (x0, x1) = rest_to_rest(0.3);
        let sol = steer(
            &x0,
            &x1,
            &SteeringWeights::default(),
            &SteeringBounds::default(),
        )
        .unwrap();
        let two = sample_edge(&sol, sol.dt_star * 2.0).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two[1].t, sol.dt_star);
        assert!(matches!(
            sample_edge(&sol, 0.0),
            Err(SteerError::NonPositiveStep(_))
        ));
        let times = sample_times(1.0, 0.25).unwrap();
        assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn bracket_errors() {
        let (x0, x1) = rest_to_rest(1.0);
        let b = SteeringBounds {
            dt_min: 2.0,
            dt_max: 1.0,
            grid_samples: 16,
        };
        assert!(matches!(
            optimal_arrival_time(&x0, &x1, &SteeringWeights::default(), &b),
            Err(SteerError::EmptyBracket { .. })
        ));
    }

    #[test]
    fn optimum_on_bracket_edge() {
        let (x0, x1) = rest_to_rest(1.0);
        let b = SteeringBounds {
            dt_min: 0.5,
            dt_max: 1.0,
            grid_samples: 32,
        };
        let t = optimal_arrival_time(&x0, &x1, &SteeringWeights::default(), &b).unwrap();
        assert_eq!(t, 1.0);
    }
}
