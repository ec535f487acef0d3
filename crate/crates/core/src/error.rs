//! Error types shared across the library.

use thiserror::Error;

/// Denominators appearing in the indifference-threshold and first-order
/// condition formulas. Each can vanish for admissible-looking inputs, so
/// degeneracy reports name the offending expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Denominator {
    Alpha,
    Theta,
    OneMinusTheta,
    AlphaMinusOne,
    AlphaMinusTheta,
    TwoAlphaMinusThetaMinusOne,
}

impl Denominator {
    /// The defining expression, for diagnostics.
    pub fn expression(self) -> &'static str {
        match self {
            Denominator::Alpha => "alpha",
            Denominator::Theta => "theta",
            Denominator::OneMinusTheta => "1 - theta",
            Denominator::AlphaMinusOne => "alpha - 1",
            Denominator::AlphaMinusTheta => "alpha - theta",
            Denominator::TwoAlphaMinusThetaMinusOne => "2*alpha - theta - 1",
        }
    }
}

impl std::fmt::Display for Denominator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.expression())
    }
}

/// Errors raised by threshold evaluation, regime classification, and demand.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("degenerate denominator: {which} = {value:e} is treated as zero")]
    DegenerateDenominator { which: Denominator, value: f64 },

    /// Two compared thresholds coincide, so no regime case applies. The
    /// boundary is a measure-zero set; callers decide how to proceed.
    #[error("tie between thresholds {left} and {right} (both ~{value:e}); no case applies")]
    TieCase {
        left: &'static str,
        right: &'static str,
        value: f64,
    },
}

/// Errors raised while computing or cross-checking equilibrium prices.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EquilibriumError {
    /// The shared closed-form denominator m*(2 + 4*alpha*(-4 + theta) +
    /// 11*theta - theta^2) vanished.
    #[error("singular closed-form denominator ({value:e}); optimal prices are undefined here")]
    SingularDenominator { value: f64 },

    /// The stationarity system is numerically singular.
    #[error("singular first-order-condition system (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors raised by the numeric verification oracles.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum OracleError {
    /// The analytic best-response root lies outside the requested bracket.
    #[error("best-response root {root:e} outside bracket [{lo:e}, {hi:e}]")]
    BracketMiss { root: f64, lo: f64, hi: f64 },
}

/// Errors raised by sweep construction and summarization.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),

    /// Too few evaluable rows to compare consecutive values.
    #[error("insufficient data: {rows} evaluable row(s), need at least 2")]
    InsufficientData { rows: usize },
}
