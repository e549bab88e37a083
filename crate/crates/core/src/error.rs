use thiserror::Error;

/// Failures reported by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("operator is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not positive semidefinite (eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("not of determinant class{}: log-integral fell below {partial:e}", degree_suffix(.degree))]
    NotDeterminantClass { degree: Option<usize>, partial: f64 },

    #[error("{what} did not converge (error estimate {achieved:e})")]
    NonConvergence { what: String, achieved: f64 },

    #[error("spectral resolution insufficient: {0}")]
    Unresolved(String),

    #[error("eigenvalue {eigenvalue} lies in the guard band [{lo}, {hi}]")]
    GuardBand { eigenvalue: f64, lo: f64, hi: f64 },

    #[error("map in degree {degree} is not invertible")]
    NotInvertible { degree: usize },

    #[error("not a chain map in degree {degree} (defect {defect:e})")]
    NotChainMap { degree: usize, defect: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("least-squares fit is ill-conditioned (condition number {condition:e})")]
    IllConditioned { condition: f64 },
}

fn degree_suffix(degree: &Option<usize>) -> String {
    match degree {
        Some(k) => format!(" in degree {k}"),
        None => String::new(),
    }
}

impl Error {
    /// True for failures caused by malformed or inconsistent input data.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::Validation(_)
                | Error::NotSquare { .. }
                | Error::NotPositive { .. }
                | Error::Unsupported(_)
                | Error::NotInvertible { .. }
                | Error::NotChainMap { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
