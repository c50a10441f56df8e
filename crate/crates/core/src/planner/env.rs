use crate::crane::{
    flat_to_state_input, is_within_bounds, CraneParams, FeasibilityBounds, FlatSample,
};
use crate::error::WorldError;
use crate::steer::{sample_times, FlatState, SteeringSolution};
use crate::world::{edt, path_collision_free, rasterize, Aabb, DistanceField, Workspace};

/// Everything an edge is checked against: obstacles, crane model, bounds.
///
/// Immutable once built and shared by reference between planner workers.
#[derive(Clone, Debug)]
pub struct Environment {
    pub workspace: Workspace,
    pub obstacles: Vec<Aabb>,
    pub field: DistanceField,
    pub params: CraneParams,
    pub bounds: FeasibilityBounds,
    pub margin: f64,
    /// Bounds edges are checked against: `bounds` shrunk toward their
    /// centers so that points between edge samples stay inside `bounds`.
    check: FeasibilityBounds,
}

/// Default relative shrink of every bound interval used by the planner.
pub const DEFAULT_TIGHTENING: f64 = 0.01;

fn tighten(b: &FeasibilityBounds, f: f64) -> FeasibilityBounds {
    let mut t = *b;
    for i in 0..10 {
        let w = 0.5 * f * (b.z_hi[i] - b.z_lo[i]);
        t.z_lo[i] += w;
        t.z_hi[i] -= w;
    }
    for i in 0..3 {
        let w = 0.5 * f * (b.u_hi[i] - b.u_lo[i]);
        t.u_lo[i] += w;
        t.u_hi[i] -= w;
    }
    t.sway_max *= 1.0 - f;
    t
}

impl Environment {
    pub fn new(
        workspace: Workspace,
        obstacles: Vec<Aabb>,
        resolution: f64,
        params: CraneParams,
        bounds: FeasibilityBounds,
        margin: f64,
    ) -> Result<Self, WorldError> {
        let field = edt(&rasterize(&obstacles, &workspace, resolution)?);
        Ok(Self {
            workspace,
            obstacles,
            field,
            params,
            check: tighten(&bounds, DEFAULT_TIGHTENING),
            bounds,
            margin,
        })
    }

    /// Replace the relative bound tightening (`0` checks the bounds as given).
    pub fn with_tightening(mut self, fraction: f64) -> Self {
        self.check = tighten(&self.bounds, fraction.clamp(0.0, 0.5));
        self
    }

    /// The tightened bounds edges are checked against.
    pub fn checked_bounds(&self) -> &FeasibilityBounds {
        &self.check
    }

    /// Required clearance of the payload center.
    pub fn standoff(&self) -> f64 {
        self.params.payload_radius + self.margin
    }

    pub fn position_free(&self, p: &[f64; 3]) -> bool {
        self.workspace.contains(p)
            && self
                .field
                .clearance(p)
                .map_or(false, |c| c >= self.standoff())
    }

    fn sample_feasible(&self, x: &FlatState, snap: [f64; 3]) -> bool {
        // Sway limit straight from the thrust direction before the full map.
        let a = x.acceleration();
        let tz = a[2] + self.params.gravity;
        if !(tz > 0.0) {
            return false;
        }
        let limit = self.check.sway_max;
        if a[0].atan2(tz).abs() > limit || a[1].atan2(a[0].hypot(tz)).abs() > limit {
            return false;
        }
        match flat_to_state_input(&FlatSample::from_flat(x, snap), &self.params) {
            Ok((z, u)) => is_within_bounds(&z, &u, &self.check),
            Err(_) => false,
        }
    }

    /// A single flat state (with zero snap) is in free space and within bounds.
    pub fn state_feasible(&self, x: &FlatState) -> bool {
        self.position_free(&x.position()) && self.sample_feasible(x, [0.0; 3])
    }

    /// Collision and state/input bound check of an edge, sampled every `step`.
    pub fn edge_feasible(&self, sol: &SteeringSolution, step: f64) -> bool {
        let times = match sample_times(sol.dt_star, step) {
            Ok(t) => t,
            Err(_) => return false,
        };
        let mut positions = Vec::with_capacity(times.len());
        let mut samples = Vec::with_capacity(times.len());
        for &t in &times {
            let (x, snap) = sol.evaluate(t);
            let p = x.position();
            if !self.position_free(&p) {
                return false;
            }
            positions.push(p);
            samples.push((x, snap));
        }
        if !path_collision_free(&self.field, &positions, self.standoff()) {
            return false;
        }
        samples
            .iter()
            .all(|(x, snap)| self.sample_feasible(x, *snap))
    }
}
