use thiserror::Error;

/// Unified error type for mesh handling, assembly, solving and reporting.
#[derive(Debug, Error)]
pub enum BiharmError {
    #[error("mesh parse error: {0}")]
    Parse(String),

    #[error("mesh is not conforming: {0}")]
    NonConforming(String),

    #[error("point ({x}, {y}) is outside the mesh domain")]
    Location { x: f64, y: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("no characteristic root found in the search window for omega = {omega}")]
    SearchWindow { omega: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BiharmError>;
