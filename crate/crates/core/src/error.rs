use thiserror::Error;

/// Errors raised by the solvers and validators in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{0}")]
    Undefined(&'static str),

    #[error("inadmissible interface state: max|f| = {max_f:.6}, max|h| = {max_h:.6} (limit 1/2)")]
    Inadmissible { max_f: f64, max_h: f64 },

    #[error("degenerate domain mapping: denominator {min_denominator:.3e} below floor")]
    DegenerateMapping { min_denominator: f64 },

    #[error("singular {system} system (condition estimate {condition:.3e})")]
    SingularSystem {
        system: &'static str,
        condition: f64,
    },

    #[error("flat state is not exponentially stable (spectral bound {spectral_bound:.6e})")]
    NotStable { spectral_bound: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("branch too short: {0}")]
    BranchTooShort(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Inadmissible { .. }
                | Error::DegenerateMapping { .. }
                | Error::SingularSystem { .. }
                | Error::NotStable { .. }
                | Error::NoConvergence { .. }
                | Error::BranchTooShort(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
