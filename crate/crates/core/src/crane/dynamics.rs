//! Euler-Lagrange model of the crane.
//!
//! Kinetic energy: bridge and trolley translate along x (mass
//! `m_bridge + m_trolley`), the trolley along y (`m_trolley`), the payload is a
//! point mass on a massless rigid rope. With `J = dp/dq` the payload Jacobian,
//!
//! ```text
//! M = diag(m_b + m_t, m_t, 0, 0, 0) + m_p J^T J
//! C = m_p J^T dJ/dt            (Christoffel form, M' - 2C skew)
//! g = m_p g0 J^T e_z
//! ```

use nalgebra::{Matrix3x5, SMatrix, Vector3, Vector5};

use super::{ControlInput, CraneParams, CraneState};
use crate::error::CraneError;

pub type Matrix5 = SMatrix<f64, 5, 5>;

struct Trig {
    l: f64,
    sa: f64,
    ca: f64,
    sb: f64,
    cb: f64,
}

impl Trig {
    fn new(q: &[f64; 5], params: &CraneParams) -> Self {
        let (sa, ca) = q[3].sin_cos();
        let (sb, cb) = q[4].sin_cos();
        Self {
            l: params.h0 - q[2],
            sa,
            ca,
            sb,
            cb,
        }
    }
}

/// `dp/dq`, one column per generalized coordinate.
pub fn payload_jacobian(q: &[f64; 5], params: &CraneParams) -> Matrix3x5<f64> {
    let Trig { l, sa, ca, sb, cb } = Trig::new(q, params);
    Matrix3x5::from_columns(&[
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(0.0, 1.0, 0.0),
        Vector3::new(sb * ca, sa, ca * cb),
        Vector3::new(l * sb * sa, -l * ca, l * sa * cb),
        Vector3::new(-l * cb * ca, 0.0, l * ca * sb),
    ])
}

/// `sum_k d2p/(dq_j dq_k) qdot_k` for each column `j`, i.e. `dJ/dt`.
fn jacobian_rate(z: &CraneState, params: &CraneParams) -> Matrix3x5<f64> {
    let Trig { l, sa, ca, sb, cb } = Trig::new(&z.q, params);
    let [_, _, dz, da, db] = z.qdot;
    // Second derivatives of p among (s_z, alpha, beta).
    let h_za = Vector3::new(-sb * sa, ca, -sa * cb);
    let h_zb = Vector3::new(cb * ca, 0.0, -ca * sb);
    let h_aa = Vector3::new(l * sb * ca, l * sa, l * ca * cb);
    let h_ab = Vector3::new(l * cb * sa, 0.0, -l * sa * sb);
    let h_bb = Vector3::new(l * sb * ca, 0.0, l * ca * cb);
    Matrix3x5::from_columns(&[
        Vector3::zeros(),
        Vector3::zeros(),
        h_za * da + h_zb * db,
        h_za * dz + h_aa * da + h_ab * db,
        h_zb * dz + h_ab * da + h_bb * db,
    ])
}

pub fn mass_matrix(q: &[f64; 5], params: &CraneParams) -> Matrix5 {
    let j = payload_jacobian(q, params);
    let mut m = j.transpose() * j * params.m_payload;
    m[(0, 0)] += params.m_bridge + params.m_trolley;
    m[(1, 1)] += params.m_trolley;
    m
}

pub fn coriolis_matrix(z: &CraneState, params: &CraneParams) -> Matrix5 {
    payload_jacobian(&z.q, params).transpose() * jacobian_rate(z, params) * params.m_payload
}

pub fn gravity_vector(q: &[f64; 5], params: &CraneParams) -> Vector5<f64> {
    let j = payload_jacobian(q, params);
    j.row(2).transpose() * (params.m_payload * params.gravity)
}

/// `M qddot + C qdot + g`: the generalized forces producing `qddot`.
pub(crate) fn generalized_forces(
    z: &CraneState,
    qddot: &[f64; 5],
    params: &CraneParams,
) -> [f64; 5] {
    let j = payload_jacobian(&z.q, params);
    let jdot = jacobian_rate(z, params);
    let qd = Vector5::from_column_slice(&z.qdot);
    let qdd = Vector5::from_column_slice(qddot);
    // Payload part through the Jacobian: m_p J^T (J qdd + Jdot qd + g e_z).
    let mut acc = j * qdd + jdot * qd;
    acc[2] += params.gravity;
    let mut tau = j.transpose() * acc * params.m_payload;
    tau[0] += (params.m_bridge + params.m_trolley) * qddot[0];
    tau[1] += params.m_trolley * qddot[1];
    [tau[0], tau[1], tau[2], tau[3], tau[4]]
}

/// `dz/dt = [qdot; M^-1([u; 0] - C qdot - g)]`.
pub fn dynamics(
    z: &CraneState,
    u: &ControlInput,
    params: &CraneParams,
) -> Result<[f64; 10], CraneError> {
    let m = mass_matrix(&z.q, params);
    let qd = Vector5::from_column_slice(&z.qdot);
    let rhs = Vector5::new(u.u[0], u.u[1], u.u[2], 0.0, 0.0)
        - coriolis_matrix(z, params) * qd
        - gravity_vector(&z.q, params);
    let chol = m.cholesky().ok_or(CraneError::SingularMass)?;
    let qdd = chol.solve(&rhs);
    let mut out = [0.0; 10];
    out[..5].copy_from_slice(&z.qdot);
    for i in 0..5 {
        out[5 + i] = qdd[i];
    }
    Ok(out)
}

/// Kinetic plus potential energy.
pub fn total_energy(z: &CraneState, params: &CraneParams) -> f64 {
    let qd = Vector5::from_column_slice(&z.qdot);
    let kinetic = 0.5 * qd.dot(&(mass_matrix(&z.q, params) * qd));
    let p = super::payload_position(&z.q, params);
    kinetic + params.m_payload * params.gravity * p[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crane::payload_position;

    fn state() -> CraneState {
        CraneState {
            q: [0.8, 0.4, 0.35, 0.02, -0.03],
            qdot: [0.2, -0.1, 0.05, 0.1, -0.2],
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = CraneParams::default();
        let q = state().q;
        let j = payload_jacobian(&q, &p);
        let h = 1e-6;
        for c in 0..5 {
            let (mut qp, mut qm) = (q, q);
            qp[c] += h;
            qm[c] -= h;
            let (a, b) = (payload_position(&qp, &p), payload_position(&qm, &p));
            for r in 0..3 {
                assert!((j[(r, c)] - (a[r] - b[r]) / (2.0 * h)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let p = CraneParams::default();
        let z = CraneState::at_rest([1.0, 0.5, 0.4, 0.0, 0.0]);
        let u = ControlInput {
            u: [0.0, 0.0, p.m_payload * p.gravity],
        };
        let dz = dynamics(&z, &u, &p).unwrap();
        assert!(dz.iter().all(|v| v.abs() < 1e-14), "{dz:?}");
    }

    #[test]
    fn singular_at_zero_rope_length() {
        let p = CraneParams::default();
        let z = CraneState::at_rest([1.0, 0.5, p.h0, 0.0, 0.0]);
        assert_eq!(
            dynamics(&z, &ControlInput::default(), &p),
            Err(CraneError::SingularMass)
        );
    }

    #[test]
    fn inverse_and_forward_dynamics_agree() {
        let p = CraneParams::default();
        let z = state();
        let qdd = [0.3, -0.2, 0.1, 0.5, -0.4];
        let tau = generalized_forces(&z, &qdd, &p);
        // Feed the actuated part forward; the sway part acts as an external load.
        let m = mass_matrix(&z.q, &p);
        let qd = Vector5::from_column_slice(&z.qdot);
        let rhs = Vector5::from_column_slice(&tau)
            - coriolis_matrix(&z, &p) * qd
            - gravity_vector(&z.q, &p);
        let back = m.cholesky().unwrap().solve(&rhs);
        for i in 0..5 {
            assert!((back[i] - qdd[i]).abs() < 1e-10);
        }
    }
}
