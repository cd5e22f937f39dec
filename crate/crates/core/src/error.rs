use thiserror::Error;

/// Errors surfaced by model builders, solvers, and checkers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix not positive definite: pivot {pivot:.3e} at index {index} below floor {floor:.3e}")]
    NotPositiveDefinite { index: usize, pivot: f64, floor: f64 },

    #[error("eigensolver did not converge within {max_iter} iterations (eigenvalue {index})")]
    NoConvergence { index: usize, max_iter: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid asymptotic law: {0}")]
    InvalidLaw(String),

    #[error("eigenvalues not strictly decreasing at rank {rank}")]
    NotDecreasing { rank: usize },

    #[error("two-sequence interleaving violated at rank {rank}")]
    InterleaveViolation { rank: usize },

    #[error("kernel not positive semidefinite: {negative} retained eigenvalues negative out of {retained}")]
    KernelNotPsd { negative: usize, retained: usize },

    #[error("fit window has {points} points, need at least {min}")]
    WindowTooSmall { points: usize, min: usize },

    #[error("nonpositive value {value:.3e} at index {index}")]
    NonpositiveValue { index: usize, value: f64 },

    #[error("incompatible fits: {0}")]
    IncompatibleFits(String),

    #[error("zero vector")]
    ZeroVector,

    #[error("perturbation is not sign-definite: {0}")]
    WrongSign(String),

    #[error("degenerate spectral gap between indices {k} and {n}")]
    DegenerateGap { k: usize, n: usize },

    #[error("kernel expression: {0}")]
    KernelExpr(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
