//! Scenario files: JSON with the unit of every quantity in its field name.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::crane::{CraneParams, FeasibilityBounds};
use crate::error::{FormatError, WorldError};
use crate::planner::Environment;
use crate::steer::FlatState;
use crate::world::{Aabb, Workspace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    /// Minimum corner.
    pub origin_m: [f64; 3],
    /// Extents along x, y, z.
    pub size_m: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceSpec {
    pub lo_m: [f64; 3],
    pub hi_m: [f64; 3],
}

impl Default for WorkspaceSpec {
    fn default() -> Self {
        let ws = Workspace::default();
        Self {
            lo_m: ws.lo,
            hi_m: ws.hi,
        }
    }
}

/// Payload flat state; derivatives default to zero (rest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatStateSpec {
    pub position_m: [f64; 3],
    #[serde(default)]
    pub velocity_m_s: [f64; 3],
    #[serde(default)]
    pub acceleration_m_s2: [f64; 3],
    #[serde(default)]
    pub jerk_m_s3: [f64; 3],
}

impl FlatStateSpec {
    pub fn at_rest(p: [f64; 3]) -> Self {
        Self {
            position_m: p,
            velocity_m_s: [0.0; 3],
            acceleration_m_s2: [0.0; 3],
            jerk_m_s3: [0.0; 3],
        }
    }

    pub fn to_state(&self) -> FlatState {
        FlatState::from_parts(
            self.position_m,
            self.velocity_m_s,
            self.acceleration_m_s2,
            self.jerk_m_s3,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CraneSpec {
    pub payload_mass_kg: f64,
    pub trolley_mass_kg: f64,
    pub bridge_mass_kg: f64,
    pub suspension_height_m: f64,
    pub gravity_m_s2: f64,
    pub payload_radius_m: f64,
}

impl From<&CraneParams> for CraneSpec {
    fn from(p: &CraneParams) -> Self {
        Self {
            payload_mass_kg: p.m_payload,
            trolley_mass_kg: p.m_trolley,
            bridge_mass_kg: p.m_bridge,
            suspension_height_m: p.h0,
            gravity_m_s2: p.gravity,
            payload_radius_m: p.payload_radius,
        }
    }
}

impl Default for CraneSpec {
    fn default() -> Self {
        Self::from(&CraneParams::default())
    }
}

impl CraneSpec {
    pub fn to_params(&self) -> CraneParams {
        CraneParams {
            m_payload: self.payload_mass_kg,
            m_trolley: self.trolley_mass_kg,
            m_bridge: self.bridge_mass_kg,
            h0: self.suspension_height_m,
            gravity: self.gravity_m_s2,
            payload_radius: self.payload_radius_m,
        }
    }
}

/// State order `s_x, s_y, s_z, alpha, beta` and their rates (m, rad, m/s,
/// rad/s); inputs are the two drive forces and the hoist force in N.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub state_lo_si: [f64; 10],
    pub state_hi_si: [f64; 10],
    pub input_lo_n: [f64; 3],
    pub input_hi_n: [f64; 3],
    pub sway_max_deg: f64,
}

impl From<&FeasibilityBounds> for BoundsSpec {
    fn from(b: &FeasibilityBounds) -> Self {
        Self {
            state_lo_si: b.z_lo,
            state_hi_si: b.z_hi,
            input_lo_n: b.u_lo,
            input_hi_n: b.u_hi,
            sway_max_deg: b.sway_max.to_degrees(),
        }
    }
}

impl Default for BoundsSpec {
    fn default() -> Self {
        Self::from(&FeasibilityBounds::default())
    }
}

impl BoundsSpec {
    pub fn to_bounds(&self) -> FeasibilityBounds {
        FeasibilityBounds {
            z_lo: self.state_lo_si,
            z_hi: self.state_hi_si,
            u_lo: self.input_lo_n,
            u_hi: self.input_hi_n,
            sway_max: self.sway_max_deg.to_radians(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub workspace: WorkspaceSpec,
    #[serde(default)]
    pub obstacles: Vec<BoxSpec>,
    pub start: FlatStateSpec,
    pub target: FlatStateSpec,
    #[serde(default)]
    pub crane: CraneSpec,
    #[serde(default)]
    pub bounds: BoundsSpec,
    pub resolution_m: f64,
    pub margin_m: f64,
}

const SCENARIO1: &str = include_str!("../scenarios/scenario1.json");
const SCENARIO2: &str = include_str!("../scenarios/scenario2.json");

impl Scenario {
    /// Two boxes between start and target.
    pub fn scenario1() -> Self {
        Self::from_json(SCENARIO1).expect("bundled scenario is valid")
    }

    /// Three boxes, including a narrow wall near the target row.
    pub fn scenario2() -> Self {
        Self::from_json(SCENARIO2).expect("bundled scenario is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, FormatError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String, FormatError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            lo: self.workspace.lo_m,
            hi: self.workspace.hi_m,
        }
    }

    pub fn obstacles(&self) -> Result<Vec<Aabb>, WorldError> {
        self.obstacles
            .iter()
            .map(|b| Aabb::new(b.origin_m, b.size_m))
            .collect()
    }

    pub fn start_state(&self) -> FlatState {
        self.start.to_state()
    }

    pub fn target_state(&self) -> FlatState {
        self.target.to_state()
    }

    pub fn params(&self) -> CraneParams {
        self.crane.to_params()
    }

    pub fn bounds(&self) -> FeasibilityBounds {
        self.bounds.to_bounds()
    }

    /// Schema-level checks: positive sizes, endpoints inside the workspace,
    /// valid physical parameters and bounds.
    pub fn validate(&self) -> Result<(), FormatError> {
        let invalid = |m: String| FormatError::InvalidScenario(m);
        let ws = self.workspace();
        ws.validate().map_err(|e| invalid(e.to_string()))?;
        self.obstacles().map_err(|e| invalid(e.to_string()))?;
        if !(self.resolution_m > 0.0 && self.resolution_m.is_finite()) {
            return Err(invalid("resolution_m must be positive".into()));
        }
        if !(self.margin_m >= 0.0 && self.margin_m.is_finite()) {
            return Err(invalid("margin_m must be non-negative".into()));
        }
        for (what, s) in [("start", &self.start), ("target", &self.target)] {
            if !s.to_state().is_finite() {
                return Err(invalid(format!("{what} has non-finite entries")));
            }
            if !ws.contains(&s.position_m) {
                return Err(invalid(format!("{what} lies outside the workspace")));
            }
        }
        self.params()
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        self.bounds()
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        Ok(())
    }

    /// Rasterize the obstacles and build the distance field.
    pub fn environment(&self) -> Result<Environment, WorldError> {
        Environment::new(
            self.workspace(),
            self.obstacles()?,
            self.resolution_m,
            self.params(),
            self.bounds(),
            self.margin_m,
        )
    }
}
