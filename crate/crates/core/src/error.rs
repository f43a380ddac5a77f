use thiserror::Error;

/// Diagnostics attached to a failed radial integration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverDiagnostics {
    pub n_star: f64,
    pub l: u32,
    pub r_inner: f64,
    pub r_outer: f64,
    pub grid_points: usize,
    pub detail: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("cannot parse `{token}`: {reason}")]
    Parse { token: String, reason: String },

    #[error("species data: {0}")]
    SpeciesData(String),

    #[error("radial solver failed (n*={:.4}, l={}): {}", .0.n_star, .0.l, .0.detail)]
    Solver(Box<SolverDiagnostics>),

    #[error("pair basis has {count} states, above the cap of {cap}")]
    BasisTooLarge { count: usize, cap: usize },

    #[error("pair channel {channel} is {defect_hz:.3e} Hz from resonance; use the resonant two-channel treatment")]
    ForsterProximity { channel: String, defect_hz: f64 },

    #[error("eigensolver did not converge for a {dim}x{dim} matrix (max |H_ij| = {max_abs:.3e} Hz)")]
    Eigensolver { dim: usize, max_abs: f64 },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("Hilbert space for {0} atoms exceeds the dense limit of 14")]
    DimensionOverflow(usize),

    #[error("initial state is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("scenario field `{field}`: {reason}")]
    Scenario { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(token: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse { token: token.into(), reason: reason.into() }
    }
}
