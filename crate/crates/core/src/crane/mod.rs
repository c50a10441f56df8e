//! Gantry crane model and its flat parameterization.
//!
//! Generalized coordinates are `q = [s_x, s_y, s_z, alpha, beta]`. The rope
//! hangs from the suspension point `S = (s_x, s_y, h0)` with length
//! `l = h0 - s_z`; `s_z` is therefore the payload height the hoist would give
//! at zero sway. The unit rope direction (payload towards `S`) is
//!
//! ```text
//! r = (sin(beta) cos(alpha), sin(alpha), cos(alpha) cos(beta))
//! ```
//!
//! so `beta` is the rope angle in the zx-plane and `alpha` the angle out of
//! it (zy-plane). The payload sits at `p = S - l r`.

mod bounds;
mod dynamics;
pub mod jet;

use serde::{Deserialize, Serialize};

pub use bounds::{check_bounds, is_within_bounds, BoundsReport, FeasibilityBounds, Violation};
pub use dynamics::{
    coriolis_matrix, dynamics, gravity_vector, mass_matrix, payload_jacobian, total_energy,
};

use crate::error::CraneError;
use crate::steer::FlatState;
use jet::Jet;

/// Physical parameters of the crane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CraneParams {
    pub m_payload: f64,
    pub m_trolley: f64,
    /// The bridge carries the trolley along x.
    pub m_bridge: f64,
    /// Height of the suspension plane.
    pub h0: f64,
    pub gravity: f64,
    /// Radius of the collision sphere around the payload CoM.
    pub payload_radius: f64,
}

impl Default for CraneParams {
    fn default() -> Self {
        Self {
            m_payload: 1.0,
            m_trolley: 5.0,
            m_bridge: 10.0,
            h0: 1.0,
            gravity: 9.81,
            payload_radius: 0.05,
        }
    }
}

impl CraneParams {
    pub fn validate(&self) -> Result<(), CraneError> {
        if !(self.m_payload > 0.0 && self.m_trolley > 0.0 && self.m_bridge > 0.0) {
            return Err(CraneError::InvalidParams("masses must be positive"));
        }
        if !(self.h0 > 0.0) {
            return Err(CraneError::InvalidParams(
                "suspension height must be positive",
            ));
        }
        if !(self.gravity > 0.0) {
            return Err(CraneError::InvalidParams("gravity must be positive"));
        }
        if !(self.payload_radius >= 0.0) {
            return Err(CraneError::InvalidParams(
                "payload radius must be non-negative",
            ));
        }
        Ok(())
    }
}

/// Full crane state `z = [q, dq/dt]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CraneState {
    pub q: [f64; 5],
    pub qdot: [f64; 5],
}

impl CraneState {
    pub fn at_rest(q: [f64; 5]) -> Self {
        Self { q, qdot: [0.0; 5] }
    }

    pub fn to_vector(&self) -> [f64; 10] {
        let mut z = [0.0; 10];
        z[..5].copy_from_slice(&self.q);
        z[5..].copy_from_slice(&self.qdot);
        z
    }

    pub fn from_vector(z: &[f64; 10]) -> Self {
        let mut q = [0.0; 5];
        let mut qdot = [0.0; 5];
        q.copy_from_slice(&z[..5]);
        qdot.copy_from_slice(&z[5..]);
        Self { q, qdot }
    }

    pub fn rope_length(&self, params: &CraneParams) -> f64 {
        params.h0 - self.q[2]
    }
}

/// Driving forces along x, y and the hoist.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    pub u: [f64; 3],
}

/// Payload position and its first four time derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FlatSample {
    pub p: [f64; 3],
    pub d1: [f64; 3],
    pub d2: [f64; 3],
    pub d3: [f64; 3],
    pub d4: [f64; 3],
}

impl FlatSample {
    pub fn from_flat(x: &FlatState, snap: [f64; 3]) -> Self {
        Self {
            p: x.position(),
            d1: x.velocity(),
            d2: x.acceleration(),
            d3: x.jerk(),
            d4: snap,
        }
    }

    pub fn at_rest(p: [f64; 3]) -> Self {
        Self {
            p,
            ..Self::default()
        }
    }

    /// `p'' + g e_z`, parallel to the rope.
    pub fn thrust(&self, gravity: f64) -> [f64; 3] {
        [self.d2[0], self.d2[1], self.d2[2] + gravity]
    }
}

/// Payload position for a configuration (forward kinematics).
pub fn payload_position(q: &[f64; 5], params: &CraneParams) -> [f64; 3] {
    let l = params.h0 - q[2];
    let (sa, ca) = q[3].sin_cos();
    let (sb, cb) = q[4].sin_cos();
    [q[0] - l * sb * ca, q[1] - l * sa, params.h0 - l * ca * cb]
}

/// The flat map evaluated on jets: `q` with two time derivatives.
fn configuration_jets(fs: &FlatSample, params: &CraneParams) -> Result<[Jet; 5], CraneError> {
    let t = fs.thrust(params.gravity);
    if !(t[2] > 0.0) {
        return Err(CraneError::RopeInverted(t[2]));
    }
    let drop = params.h0 - fs.p[2];
    if !(drop > 0.0) {
        return Err(CraneError::RopeSlack(drop));
    }
    let p: [Jet; 3] = std::array::from_fn(|i| Jet::new(fs.p[i], fs.d1[i], fs.d2[i]));
    let th: [Jet; 3] = std::array::from_fn(|i| Jet::new(t[i], fs.d3[i], fs.d4[i]));

    // k = (h0 - p_z) / t_z scales the thrust vector onto the rope.
    let k = (Jet::constant(params.h0) - p[2]) / th[2];
    let sx = p[0] + k * th[0];
    let sy = p[1] + k * th[1];
    let norm = (th[0] * th[0] + th[1] * th[1] + th[2] * th[2]).sqrt();
    let sz = Jet::constant(params.h0) - k * norm;
    let beta = th[0].atan2(th[2]);
    let rho = (th[0] * th[0] + th[2] * th[2]).sqrt();
    let alpha = th[1].atan2(rho);
    Ok([sx, sy, sz, alpha, beta])
}

/// Configuration `q` reached by the flat sample.
pub fn flat_to_configuration(
    fs: &FlatSample,
    params: &CraneParams,
) -> Result<[f64; 5], CraneError> {
    let jets = configuration_jets(fs, params)?;
    Ok(jets.map(|j| j.v))
}

/// Full crane state for a flat sample (uses derivatives up to jerk).
pub fn flat_to_state(fs: &FlatSample, params: &CraneParams) -> Result<CraneState, CraneError> {
    let jets = configuration_jets(fs, params)?;
    Ok(CraneState {
        q: jets.map(|j| j.v),
        qdot: jets.map(|j| j.d),
    })
}

/// State together with generalized accelerations (uses the snap).
pub fn flat_to_motion(
    fs: &FlatSample,
    params: &CraneParams,
) -> Result<(CraneState, [f64; 5]), CraneError> {
    let jets = configuration_jets(fs, params)?;
    Ok((
        CraneState {
            q: jets.map(|j| j.v),
            qdot: jets.map(|j| j.d),
        },
        jets.map(|j| j.dd),
    ))
}

/// Residual tolerance of the unactuated sway rows.
pub const SWAY_RESIDUAL_TOL: f64 = 1e-6;

/// Driving forces reproducing the flat sample (inverse dynamics).
pub fn flat_to_input(fs: &FlatSample, params: &CraneParams) -> Result<ControlInput, CraneError> {
    flat_to_state_input(fs, params).map(|(_, u)| u)
}

/// State and input of a flat sample in one pass.
pub fn flat_to_state_input(
    fs: &FlatSample,
    params: &CraneParams,
) -> Result<(CraneState, ControlInput), CraneError> {
    let (z, qddot) = flat_to_motion(fs, params)?;
    let tau = dynamics::generalized_forces(&z, &qddot, params);
    let residual = tau[3].abs().max(tau[4].abs());
    if !(residual <= SWAY_RESIDUAL_TOL) {
        return Err(CraneError::UnactuatedResidual(residual));
    }
    Ok((
        z,
        ControlInput {
            u: [tau[0], tau[1], tau[2]],
        },
    ))
}
