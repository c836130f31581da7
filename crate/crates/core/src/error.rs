use alloc::string::String;

/// Failure modes of the estimation and planning core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Agent and target positions coincide, so the bearing (and hence the
    /// measurement Jacobian) is undefined.
    #[error("jacobian-singular: agent and target positions coincide")]
    JacobianSingular,
    #[error("control-out-of-bounds: |{bank}| exceeds u_max = {u_max}")]
    ControlOutOfBounds { bank: f64, u_max: f64 },
    /// Every particle likelihood evaluated to zero (or NaN).
    #[error("weight-collapse: no particle has a finite likelihood")]
    WeightCollapse,
    /// The moment-matched measurement covariance is not positive definite.
    #[error("moment-degenerate: mixture covariance is not positive definite")]
    MomentDegenerate,
    #[error("planner-starved: every candidate action was rejected")]
    PlannerStarved,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = core::result::Result<T, Error>;
