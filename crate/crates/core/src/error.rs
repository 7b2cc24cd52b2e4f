use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ensemble must contain at least one atom")]
    EmptyEnsemble,
    #[error("state norm deviates from unity by {0:.3e}")]
    NotNormalized(f64),
    #[error("direction must be a unit vector (norm deviates by {0:.3e})")]
    NonUnitDirection(f64),
    #[error("zero vector cannot be normalized into a direction")]
    ZeroDirection,
    #[error("mean spin length {0:.3e} is too small to define a transverse plane")]
    VanishingMeanSpin(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("contrast target must lie strictly inside (0, 1), got {0}")]
    ContrastOutOfRange(f64),
    #[error("omega/chi ratio must be positive, got {0}")]
    NonPositiveRatio(f64),
    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),
    #[error(
        "contrast {target} is unreachable for N = {n_atoms}: no omega/chi bracket found within [{lo:.3e}, {hi:.3e}]"
    )]
    BracketFailure {
        target: f64,
        n_atoms: usize,
        lo: f64,
        hi: f64,
    },
    #[error("fringe slope {0:.3e} is below resolution: phase sensitivity diverges")]
    DivergentSensitivity(f64),
    #[error("normalized shearing strength must be non-negative, got {0}")]
    NegativeShear(f64),
    #[error("scattering scale gamma must be non-negative, got {0}")]
    NegativeGamma(f64),
    #[error("corrected_xi2 needs xi2 > 0 and 0 < c_sc <= 1 (got xi2 = {xi2}, c_sc = {c_sc})")]
    InvalidCorrection { xi2: f64, c_sc: f64 },
    #[error("pulse parameters must come in (shear, rotation) pairs, got {0} values")]
    OddParameterCount(usize),
    #[error("pulse count must be an even number >= 2, got {0}")]
    InvalidPulseCount(usize),
    #[error("power-law fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("power-law fit requires N >= 1 and y > 0, offending point ({0}, {1})")]
    NonPositivePoint(f64, f64),
    #[error("husimi grid must be at least 2x2, got {0}x{1}")]
    GridTooSmall(usize, usize),
    #[error("sweep rows must be unique on (N, contrast, q_tilde); duplicate at N = {0}")]
    DuplicateSweepKey(usize),
    #[error("eigensolver failed to converge ({0} iterations)")]
    EigenFailure(usize),
}
