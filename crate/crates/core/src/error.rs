//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("denominator vanishes at the requested point (|q(z)| = {magnitude:.3e})")]
    PoleHit { magnitude: f64 },

    #[error("orbit magnitude exceeded the representable range at step {step}")]
    Overflow { step: usize },

    #[error("Moebius transform is degenerate (|det| = {det:.3e})")]
    DegenerateTransform { det: f64 },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("two preimages collide near a critical value (separation {separation:.3e})")]
    CriticalValueCollision { separation: f64 },

    #[error("preimage cannot be uniquely assigned to a component (margin {margin:.3e} at step {step})")]
    BranchAmbiguity { margin: f64, step: usize },

    #[error("no Cantor full-shift coding: {0}")]
    NotCantor(String),

    #[error("degree {degree} exceeds the configured cap {cap}")]
    DegreeCapExceeded { degree: usize, cap: usize },

    #[error("root polishing failed for {failed} of {total} roots")]
    RootPolishFailure { failed: usize, total: usize },

    #[error("iteration did not converge after {sweeps} sweeps")]
    NonConvergence { sweeps: usize },

    #[error("forward image of a point does not match any enumerated point (distance {distance:.3e})")]
    OrbitGroupingConflict { distance: f64 },

    #[error("t = {t:.6e} exceeds the reliability horizon {horizon:.6e}; counts may be incomplete")]
    HorizonExceeded { t: f64, horizon: f64 },

    #[error("no periodic points stored for level {level}")]
    EmptyLevel { level: usize },

    #[error("pressure does not bracket a root on [0, 2]: P({s_left}) = {p_left:.3e}, P({s_right}) = {p_right:.3e}")]
    BracketFailure {
        s_left: f64,
        p_left: f64,
        s_right: f64,
        p_right: f64,
    },

    #[error("argument {value} outside the domain: {reason}")]
    DomainError { value: f64, reason: String },

    #[error("orbit passes within {distance:.3e} of a critical point")]
    CriticalProximity { distance: f64 },

    #[error("Euler factor base within {distance:.3e} of 1; product is singular")]
    FactorSingular { distance: f64 },

    #[error("truncation is untrustworthy over the whole rectangle: {0}")]
    UntrustworthyRegion(String),

    #[error("transfer operator input is missing values: expected {expected}, got {got}")]
    ClosureViolation { expected: usize, got: usize },

    #[error("decay fit is degenerate: {0}")]
    FitDegenerate(String),

    #[error("grid point {point} lies outside the coding base region")]
    GridOutsideBase { point: String },

    #[error("cylinder sample has {got} points, need at least {need}")]
    InsufficientPoints { got: usize, need: usize },

    #[error("radius {radius:.3e} is below the measure resolution floor {floor:.3e}")]
    ResolutionTooFine { radius: f64, floor: f64 },

    #[error("the Julia set lies in a circle; only the untwisted count applies: {0}")]
    CircleCase(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable identifier of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::PoleHit { .. } => "PoleHit",
            Error::Overflow { .. } => "Overflow",
            Error::DegenerateTransform { .. } => "DegenerateTransform",
            Error::InvalidMap(_) => "InvalidMap",
            Error::CriticalValueCollision { .. } => "CriticalValueCollision",
            Error::BranchAmbiguity { .. } => "BranchAmbiguity",
            Error::NotCantor(_) => "NotCantor",
            Error::DegreeCapExceeded { .. } => "DegreeCapExceeded",
            Error::RootPolishFailure { .. } => "RootPolishFailure",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::OrbitGroupingConflict { .. } => "OrbitGroupingConflict",
            Error::HorizonExceeded { .. } => "HorizonExceeded",
            Error::EmptyLevel { .. } => "EmptyLevel",
            Error::BracketFailure { .. } => "BracketFailure",
            Error::DomainError { .. } => "DomainError",
            Error::CriticalProximity { .. } => "CriticalProximity",
            Error::FactorSingular { .. } => "FactorSingular",
            Error::UntrustworthyRegion(_) => "UntrustworthyRegion",
            Error::ClosureViolation { .. } => "ClosureViolation",
            Error::FitDegenerate(_) => "FitDegenerate",
            Error::GridOutsideBase { .. } => "GridOutsideBase",
            Error::InsufficientPoints { .. } => "InsufficientPoints",
            Error::ResolutionTooFine { .. } => "ResolutionTooFine",
            Error::CircleCase(_) => "CircleCase",
            Error::Invalid(_) => "Invalid",
            Error::Io(_) => "Io",
            Error::Serde(_) => "Serde",
        }
    }

    /// True when the error reflects bad user input rather than a numeric
    /// failure; drives the CLI exit code (2 vs 3).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidMap(_)
                | Error::DegreeCapExceeded { .. }
                | Error::DomainError { .. }
                | Error::CircleCase(_)
                | Error::Invalid(_)
                | Error::Io(_)
                | Error::Serde(_)
        )
    }
}
