use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Farkas-style proof that the population constraints admit no density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct InfeasibilityCertificate {
    /// Multipliers on the lower bounds `Tr[ρ P_k] ≥ a_k`.
    pub lower_multipliers: [f64; 2],
    /// Multipliers on the upper bounds `Tr[ρ P_k] ≤ b_k`.
    pub upper_multipliers: [f64; 2],
    /// Multiplier on `Tr ρ = 1`.
    pub trace_multiplier: f64,
    /// Strictly positive when the combination proves infeasibility.
    pub violation: f64,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("{what} = {value} outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("{n} qubits exceeds the dense capacity of {max}")]
    Capacity { n: usize, max: usize },

    #[error("operator is not Hermitian: max |H - H^dagger| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("density matrix invalid: {0}")]
    InvalidDensityMatrix(String),

    #[error("probe constraint violated: {0}")]
    ProbeConstraint(String),

    #[error("eigensolver did not converge for a {dim}x{dim} operator")]
    EigenNonConvergence { dim: usize },

    #[error("degenerate ground state (gap {gap:e} GHz); a non-degenerate ground state is required")]
    DegenerateGround { gap: f64 },

    #[error("no coupling crosses the cut with A-mask {mask:#b}")]
    UndefinedCut { mask: u32 },

    #[error("state is separable across cut {mask:#b} (min partial-transpose eigenvalue {lambda_min:e}); no witness")]
    NoWitness { mask: u32, lambda_min: f64 },

    #[error("population constraints infeasible: {}", .0.reason)]
    Infeasible(InfeasibilityCertificate),

    #[error("probe never tunneled (P^L = {0}); population undefined")]
    ProbeSaturated(f64),

    #[error("peak fit did not converge (residual norm {residual_norm:e}): {reason}")]
    FitFailed { residual_norm: f64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("instance file: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenNonConvergence { .. }
                | Error::FitFailed { .. }
                | Error::DegenerateGround { .. }
                | Error::NoWitness { .. }
                | Error::Infeasible(_)
                | Error::ProbeSaturated(_)
        )
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
