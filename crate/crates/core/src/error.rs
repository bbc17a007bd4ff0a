use thiserror::Error;

/// Errors raised by the propagation, bounding, reachability and planning routines.
///
/// Numeric payloads are reported as `f64` regardless of the scalar type used
/// for the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid orbit parameters: {0}")]
    InvalidOrbit(String),

    #[error("flight time {dt} s outside the admissible window [0, {limit}) s (π/κ)")]
    DtOutOfRange { dt: f64, limit: f64 },

    #[error("transfer matrix F_rv is ill-conditioned at dt = {dt} s (condition estimate {condition:e})")]
    SingularTransfer { dt: f64, condition: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("empty list")]
    EmptyList,

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("cone axis must be a unit vector with nonnegative components")]
    BadAxis,

    #[error("all components are zero")]
    AllZero,

    #[error("invalid grid: {0}")]
    BadGrid(String),

    #[error("target is unreachable (best residual {residual:e} km)")]
    Unreachable { residual: f64 },

    #[error("witness point violates the constraint")]
    NoWitness,

    #[error("boundary trajectory at dt = {dt} s violates the constraint")]
    BoundaryNotClear { dt: f64 },

    #[error("trajectory sampling too coarse: spacing {spacing} s exceeds resolution {resolution} s")]
    InsufficientSampling { spacing: f64, resolution: f64 },

    #[error("invalid path constraint: {0}")]
    InvalidConstraint(String),

    #[error("leg endpoint {index} lies inside the keep-out region")]
    EndpointInside { index: usize },

    #[error("legs {index} and {next} do not chain (endpoint gap {gap:e} km)")]
    ChainBroken { index: usize, next: usize, gap: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
