use thiserror::Error;

use crate::integrate::Trajectory;
use crate::model::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", format_violations(.0))]
    InvalidParameters(Vec<Violation>),

    #[error("invalid settings: {0}")]
    InvalidSettings(String),

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// The step-size controller asked for a step below `h_min`.
    /// Carries everything integrated up to the failure.
    #[error("step size underflow at t = {t}: h = {h:e} < h_min")]
    StepSizeUnderflow {
        t: f64,
        h: f64,
        partial: Box<Trajectory>,
    },

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64, partial: Box<Trajectory> },
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::StepSizeUnderflow { .. } | Error::NonFiniteState { .. }
        )
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
