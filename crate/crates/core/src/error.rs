use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("root is not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    NoBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("tolerance not reached after {iterations} iterations")]
    MaxIterExceeded { iterations: usize },

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation requires {expected} marginals")]
    TypeMismatch { expected: &'static str },

    #[error("level set L(x, y) = {s} does not meet the support (s is {side})")]
    EmptyLevelSet { s: f64, side: LevelSide },

    #[error(
        "attaining construction not verified: empirical P(L < s) = {empirical:.6} vs target {target:.6} ({sigmas:.2} sigma)"
    )]
    ConstructionUnverified {
        empirical: f64,
        target: f64,
        sigmas: f64,
    },
}

/// Which side of the support range of `L` an empty level set falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSide {
    Below,
    Above,
}

impl std::fmt::Display for LevelSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LevelSide::Below => f.write_str("below the range of L"),
            LevelSide::Above => f.write_str("above the range of L"),
        }
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
