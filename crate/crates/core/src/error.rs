use thiserror::Error;

/// Errors produced by the shock-profile solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown coefficient model `{0}` (expected constant, power_law or eek)")]
    UnknownModel(String),

    #[error("temperature {theta:e} is below the evaluation guard {guard:e}")]
    TemperatureOutOfRange { theta: f64, guard: f64 },

    #[error("coefficient {name} is not positive at theta = {theta}: value {value}")]
    NonPositiveCoefficient { name: &'static str, theta: f64, value: f64 },

    #[error("degenerate amplitude: eps must be positive (eps = {0})")]
    DegenerateAmplitude(f64),

    #[error("amplitude eps = {eps} exceeds the admissible ceiling {ceiling}")]
    AmplitudeTooLarge { eps: f64, ceiling: f64 },

    #[error("right end state has non-positive temperature {0}")]
    NonPositiveTemperature(f64),

    #[error("end states violate the Lax entropy condition: {0}")]
    LaxViolation(String),

    #[error("Rankine-Hugoniot residual {0:e} too large for a consistent shock")]
    InconsistentShock(f64),

    #[error("eigenstructure classification failed: {0}")]
    Classification(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("singular Jacobian in Newton iteration (determinant {0:e})")]
    SingularJacobian(f64),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("trajectory left the monotone octant at xi = {xi}: {detail}")]
    LeftOctant { xi: f64, detail: String },

    #[error("trajectory did not reach the right end state (closest approach {closest:e} at xi = {xi})")]
    MissedRightState { closest: f64, xi: f64 },

    #[error("midpoint value is not bracketed by the profile")]
    MidpointNotBracketed,

    #[error("under-resolved {tail} tail: fit window is empty")]
    EmptyFitWindow { tail: &'static str },

    #[error("profile data error: {0}")]
    ProfileData(String),

    #[error("eps = {eps}: {source}")]
    Sweep {
        eps: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
