use thiserror::Error;

/// Errors produced by the simulator and protocol constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty basis: {atoms} atoms do not fit into {sites} sites x 2 modes with at most {cap} per mode")]
    EmptyBasis { sites: usize, atoms: usize, cap: usize },

    #[error("site {site} out of range for a lattice of {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |M - M^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("state is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("time {t} lies outside the schedule [0, {total}]")]
    TimeOutOfRange { t: f64, total: f64 },

    #[error("physical constraint violated: {0}")]
    Constraint(String),

    #[error("no convergence after {steps} steps per ramp (last change {change:e})")]
    Convergence { steps: usize, change: f64 },

    #[error("unknown gate `{0}`")]
    UnknownGate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
