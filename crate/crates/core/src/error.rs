use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteerError {
    #[error("transit time must be positive, got {0}")]
    NonPositiveDuration(f64),
    #[error("sample step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("Gramian factorization failed at dt = {0}")]
    IllConditioned(f64),
    #[error("empty transit-time bracket [{dt_min}, {dt_max}]")]
    EmptyBracket { dt_min: f64, dt_max: f64 },
    #[error("cost is not finite anywhere in the bracket")]
    NoFiniteCost,
    #[error("arrival-time grid needs at least 3 samples, got {0}")]
    GridTooCoarse(usize),
    #[error("input weights must be positive and finite: {0:?}")]
    InvalidWeights([f64; 3]),
    #[error("flat state contains non-finite entries")]
    NonFiniteState,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CraneError {
    #[error("rope direction points downwards (vertical thrust {0} <= 0)")]
    RopeInverted(f64),
    #[error("payload at or above the suspension plane (rope length {0} <= 0)")]
    RopeSlack(f64),
    #[error("sway rows of the inverse dynamics do not vanish (residual {0:e})")]
    UnactuatedResidual(f64),
    #[error("mass matrix is not positive definite")]
    SingularMass,
    #[error("invalid crane parameters: {0}")]
    InvalidParams(&'static str),
    #[error("invalid feasibility bounds: {0}")]
    InvalidBounds(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("degenerate workspace or resolution: {0}")]
    DegenerateWorkspace(&'static str),
    #[error("point {0:?} lies outside the workspace")]
    OutOfWorkspace([f64; 3]),
    #[error("obstacle size must be positive: {0:?}")]
    InvalidObstacle([f64; 3]),
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("start or target is not in free space: {0}")]
    InfeasibleEndpoints(String),
    #[error("no solution found within the planning budget")]
    NoSolutionFound,
    #[error("tree has no solution to extract")]
    NoSolution,
    #[error("no free space found after {0} rejected samples")]
    NoFreeSpace(usize),
    #[error("trees cannot be merged: {0}")]
    IncompatibleTrees(String),
    #[error("invalid planner configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Steer(#[from] SteerError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Crane(#[from] CraneError),
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("incompatible tree dump: {0}")]
    IncompatibleDump(String),
    #[error(transparent)]
    Crane(#[from] CraneError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("integration step must be positive and not exceed the horizon (dt = {dt}, horizon = {horizon})")]
    InvalidStep { dt: f64, horizon: f64 },
    #[error("trajectory has no edges")]
    EmptyTrajectory,
    #[error(transparent)]
    Crane(#[from] CraneError),
}
