use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("cannot contract {k} slots of a rank-{rank} tensor")]
    RankUnderflow { rank: usize, k: usize },

    #[error("invalid tensor shape: rank {rank}, dim {dim}")]
    InvalidShape { rank: usize, dim: usize },

    #[error("order-{order} root of non-positive radicand {radicand:e}")]
    SignDomain { order: usize, radicand: f64 },

    #[error("Lagrangian {value:e} too close to zero for a homogeneity estimate")]
    ZeroLagrangian { value: f64 },

    #[error("singular system (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("gauge not applicable: {0}")]
    GaugeInvalid(String),

    #[error("non-finite value encountered at tau = {tau}")]
    NonFinite { tau: f64 },

    #[error("no convergence after {levels} refinements (last change {last_change:e})")]
    NoConvergence { levels: usize, last_change: f64 },

    #[error("reparametrization is not strictly increasing at {at}")]
    NonMonotone { at: f64 },

    #[error("path arc length {length:e} below threshold")]
    DegeneratePath { length: f64 },

    #[error("metric is singular at the requested point")]
    SingularMetric,

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("preset `{preset}` requires parameter `{param}`")]
    MissingParam { preset: String, param: String },

    #[error("radial velocity {v:e} too small: acceleration diverges")]
    ZeroVelocity { v: f64 },

    #[error("profile function vanishes at r = {r}")]
    ZeroProfile { r: f64 },

    #[error("embedding Jacobian has rank below {dim}")]
    DegenerateJacobian { dim: usize },

    #[error("worldvolume radicand {radicand:e} is numerically null")]
    NullWorldvolume { radicand: f64 },

    #[error("reparametrization Jacobian determinant {det:e} is not positive")]
    NonOrientation { det: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
