use thiserror::Error;

/// Errors raised anywhere in the screening pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscaError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {context} (expected {expected}, got {actual})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate sample: mean pairwise distance is zero")]
    DegenerateSample,

    #[error("convexity violated: xi - psi = {gap} must be positive")]
    ConvexityViolation { gap: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("solver failure after {restarts} restarts: {diagnostics}")]
    SolverFailure { restarts: usize, diagnostics: String },

    #[error("elimination stopped after {} completed steps: {cause}", trace.steps.len())]
    PartialElimination {
        trace: Box<crate::engine::EliminationTrace>,
        cause: Box<DiscaError>,
    },

    #[error("subspace comparison requires equal rank ({left} vs {right})")]
    RankMismatch { left: usize, right: usize },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("csv error at {location}: {message}")]
    Csv { location: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl DiscaError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Self::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl DiscaError {
    /// True when the inputs were acceptable but the optimiser could not
    /// produce a result.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Self::SolverFailure { .. }
                | Self::NumericalFailure(_)
                | Self::ConvexityViolation { .. }
                | Self::PartialElimination { .. }
        )
    }

    /// Process exit status: 2 for solver failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        if self.is_solver_failure() {
            2
        } else {
            1
        }
    }
}

impl From<std::io::Error> for DiscaError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, DiscaError>;
