use thiserror::Error;

/// Every failure the library reports. Variants carry enough context to tell
/// which inequality or precondition broke.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("valuation of zero is infinite at this precision")]
    InfiniteValuation,
    #[error("{0} is not invertible modulo p^N")]
    NonInvertible(String),
    #[error("no square root: {0}")]
    NoSquareRoot(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("value is not p-integral: {0}")]
    NotIntegral(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("mixed precision or prime: {0}")]
    Mismatch(String),
    #[error("series does not converge: {0}")]
    Divergent(String),
    #[error("argument lies outside the disk of convergence: {0}")]
    OutsideDisk(String),
    #[error("substitution not justified: {0}")]
    SubstitutionNotJustified(String),
    #[error("constant term must vanish: {0}")]
    NonVanishingConstant(String),
    #[error("hypotheses not met: {0}")]
    HypothesesUnmet(String),
    #[error("sign mismatch: {0}")]
    SignMismatch(String),
    #[error("not periodic: {0}")]
    PeriodViolation(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("iteration did not stabilise: {0}")]
    NoConvergence(String),
    #[error("guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("numerical quadrature failed: {0}")]
    Quadrature(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
