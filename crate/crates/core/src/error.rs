use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("unsupported element family: {0}")]
    UnsupportedFamily(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("linear solve residual {residual:.3e} exceeds {limit:.3e}")]
    Residual { residual: f64, limit: f64 },

    #[error("{method} did not converge in {iterations} iterations (residual trail: {})", format_trail(.trail))]
    NotConverged {
        method: String,
        iterations: usize,
        trail: Vec<f64>,
    },

    #[error("conjugate gradient breakdown: non-positive curvature {curvature:.3e} at iteration {iteration}")]
    Breakdown { iteration: usize, curvature: f64 },

    #[error("dense oracle limited to {limit} unknowns, got {size}")]
    TooLarge { size: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_trail(trail: &[f64]) -> String {
    // Last few entries are enough to see the trend.
    let start = trail.len().saturating_sub(6);
    trail[start..]
        .iter()
        .map(|r| format!("{r:.3e}"))
        .collect::<Vec<_>>()
        .join(" -> ")
}
