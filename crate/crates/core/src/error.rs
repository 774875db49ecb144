use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index out of range: {0}")]
    Index(String),
    #[error("invalid weight sequence: {0}")]
    InvalidSequence(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("missing (A, H) witness for the stability constants")]
    MissingWitness,
    #[error("grid too large: {0}")]
    GridTooLarge(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("derivative order exceeds grid resolution: {0}")]
    Resolution(String),
    #[error("precision cap reached: {0}")]
    PrecisionCap(String),
    #[error("input is not exact: {0}")]
    UncertifiedInput(String),
    #[error("not solvable: obstruction on {} mode(s), first {:?}", .modes.len(), .modes.first())]
    NotSolvable { modes: Vec<String> },
    #[error("missing primitive: {0}")]
    MissingPrimitive(String),
    #[error("right-hand side has resonant content on {} mode(s), first {:?}", .modes.len(), .modes.first())]
    NotInK { modes: Vec<String> },
    #[error("right-hand side is outside the compatibility set: resonant mass {resonant_mass:.3e} on {} mode(s)", .modes.len())]
    NotInJ {
        resonant_mass: f64,
        modes: Vec<String>,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
