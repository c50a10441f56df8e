use serde::{Deserialize, Serialize};

use super::{ControlInput, CraneState};
use crate::error::CraneError;

const STATE_NAMES: [&str; 10] = [
    "s_x", "s_y", "s_z", "alpha", "beta", "ds_x", "ds_y", "ds_z", "dalpha", "dbeta",
];
const INPUT_NAMES: [&str; 3] = ["u1", "u2", "u3"];

/// Box bounds on state and input plus the sway limit. All intervals closed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityBounds {
    pub z_lo: [f64; 10],
    pub z_hi: [f64; 10],
    pub u_lo: [f64; 3],
    pub u_hi: [f64; 3],
    pub sway_max: f64,
}

impl Default for FeasibilityBounds {
    fn default() -> Self {
        let half_pi = std::f64::consts::FRAC_PI_2;
        Self {
            z_lo: [
                0.0, 0.0, 0.0, -half_pi, -half_pi, -0.6, -0.6, -0.3, -1.0, -1.0,
            ],
            z_hi: [3.0, 1.2, 1.0, half_pi, half_pi, 0.6, 0.6, 0.3, 1.0, 1.0],
            u_lo: [-30.0, -30.0, 0.0],
            u_hi: [30.0, 30.0, 60.0],
            sway_max: 2f64.to_radians(),
        }
    }
}

impl FeasibilityBounds {
    pub fn validate(&self) -> Result<(), CraneError> {
        let ordered = self.z_lo.iter().zip(&self.z_hi).all(|(lo, hi)| lo < hi)
            && self.u_lo.iter().zip(&self.u_hi).all(|(lo, hi)| lo < hi);
        if !ordered {
            return Err(CraneError::InvalidBounds(
                "every lower bound must be below its upper bound",
            ));
        }
        if !(self.sway_max > 0.0) {
            return Err(CraneError::InvalidBounds("sway limit must be positive"));
        }
        Ok(())
    }

    /// Velocity bounds of the three actuated coordinates.
    pub fn velocity_box(&self) -> ([f64; 3], [f64; 3]) {
        (
            [self.z_lo[5], self.z_lo[6], self.z_lo[7]],
            [self.z_hi[5], self.z_hi[6], self.z_hi[7]],
        )
    }
}

/// One violated bound. `margin` is the signed distance into the
/// infeasible side (positive when violated).
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub component: &'static str,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundsReport {
    pub violations: Vec<Violation>,
}

impl BoundsReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.violations.iter().map(|v| v.component).collect()
    }
}

fn visit(
    z: &CraneState,
    u: &ControlInput,
    b: &FeasibilityBounds,
    mut on_violation: impl FnMut(Violation) -> bool,
) {
    let zv = z.to_vector();
    let mut check = |name: &'static str, value: f64, lo: f64, hi: f64| -> bool {
        if value >= lo && value <= hi {
            return true;
        }
        let margin = if value.is_nan() {
            f64::INFINITY
        } else {
            (lo - value).max(value - hi)
        };
        on_violation(Violation {
            component: name,
            value,
            lo,
            hi,
            margin,
        })
    };
    for i in 0..10 {
        let (mut lo, mut hi) = (b.z_lo[i], b.z_hi[i]);
        if i == 3 || i == 4 {
            lo = lo.max(-b.sway_max);
            hi = hi.min(b.sway_max);
        }
        if !check(STATE_NAMES[i], zv[i], lo, hi) {
            return;
        }
    }
    for i in 0..3 {
        if !check(INPUT_NAMES[i], u.u[i], b.u_lo[i], b.u_hi[i]) {
            return;
        }
    }
}

/// Check every bound and report all violations.
pub fn check_bounds(z: &CraneState, u: &ControlInput, b: &FeasibilityBounds) -> BoundsReport {
    let mut report = BoundsReport::default();
    visit(z, u, b, |v| {
        report.violations.push(v);
        true
    });
    report
}

/// Same as [`check_bounds`] but stops at the first violation.
pub fn is_within_bounds(z: &CraneState, u: &ControlInput, b: &FeasibilityBounds) -> bool {
    let mut ok = true;
    visit(z, u, b, |_| {
        ok = false;
        false
    });
    ok
}
