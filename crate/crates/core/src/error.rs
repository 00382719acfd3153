use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    ParamRange(String),

    #[error(
        "inadmissible pinching parameters (n, m, alpha) = ({n}, {m}, {alpha}): \
         requires m < alpha + min(n/2, 2(n-1)/3) = {threshold}"
    )]
    Inadmissible {
        n: usize,
        m: usize,
        alpha: f64,
        threshold: f64,
    },

    #[error("eta = {eta} outside the admissible range [0, eta0) with eta0 = {eta0}")]
    EtaRange { eta: f64, eta0: f64 },

    #[error("(n, m) = ({n}, {m}) is outside the quadratic pinching case table")]
    PinchingCase { n: usize, m: usize },

    #[error("degenerate torus: radius parameter r = {r} must lie strictly inside (0, 1)")]
    DegenerateTorus { r: f64 },

    #[error("invalid profile: {0}")]
    Profile(String),

    #[error("grid too coarse near the axis: {0}")]
    Resolution(String),

    #[error("check not applicable to this trace: {0}")]
    NotApplicable(String),

    #[error("optimizer found no feasible start: {0}")]
    Infeasible(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
