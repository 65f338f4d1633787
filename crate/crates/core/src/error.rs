use num_complex::Complex64;
use thiserror::Error;

use crate::correspondence::Certificate;
use crate::measure::PointMeasure;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("root finder did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("total degree {degree} exceeds the shifted-basis degree {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    #[error("curve vanishes identically on the line through {at}")]
    DegenerateLine { at: Complex64 },

    #[error("critical fiber at z = {z}, w = {w}: the w-derivative of the curve vanishes")]
    CriticalFiber { z: Complex64, w: Complex64 },

    #[error("branch collision near z = {z}: step fell below the minimum")]
    BranchCollision { z: Complex64 },

    #[error("point ({z}, {w}) is not on the curve (residual {residual:e})")]
    OffCurve {
        z: Complex64,
        w: Complex64,
        residual: f64,
    },

    #[error("no escape radius up to {last_radius:e}")]
    NoEscape { last_radius: f64 },

    #[error("polynomial S(w) has clustered zeros (min separation {separation:e})")]
    SimpleZeroViolation { separation: f64 },

    #[error("degree n = {n} is smaller than the operator order k = {k}")]
    OrderTooLarge { n: u64, k: usize },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("hypothesis for seeding at infinity unmet: {0}")]
    HypothesisUnmet(String),

    #[error("contraction certificate failed ({} witnesses)", .0.witnesses.len())]
    NotCertified(Box<Certificate>),

    #[error("atom budget {budget} exceeded after level {completed_level}")]
    BudgetExceeded {
        budget: usize,
        completed_level: usize,
        measure: Box<PointMeasure>,
    },

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }

    /// True for errors that signal a failed computation rather than bad input.
    pub fn is_computational(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::CriticalFiber { .. }
                | Error::BranchCollision { .. }
                | Error::NoEscape { .. }
                | Error::NotCertified(_)
                | Error::BudgetExceeded { .. }
                | Error::SimpleZeroViolation { .. }
                | Error::HypothesisViolation(_)
                | Error::HypothesisUnmet(_)
                | Error::DegenerateLine { .. }
        )
    }
}
