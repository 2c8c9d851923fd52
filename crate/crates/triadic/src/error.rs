//! Error types shared across the crate.

/// Errors reported by family construction, procedures, the closure engine,
/// the statistical models and the Monte Carlo driver.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An exhaustive enumeration was requested for a family larger than the
    /// operation supports.
    #[error("family of {m} couples exceeds the limit of {limit} for this operation")]
    SizeLimitExceeded { m: usize, limit: usize },

    /// Two sequences that must describe the same family have different lengths.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// Significance level outside the open interval (0, 1).
    #[error("significance level {alpha} is outside (0, 1)")]
    InvalidLevel { alpha: f64 },

    /// A family with zero couples was supplied.
    #[error("family must contain at least one hypothesis/alternative couple")]
    DegenerateFamily,

    /// A p-value pair violates p_h + p_k = 1 and no override was given.
    /// `couple` is the 1-based couple number.
    #[error("couple {couple} is not complementary: p_h + p_k = {sum}")]
    ComplementarityViolation { couple: usize, sum: f64 },

    /// The calibrated per-test level is not below 1/2, so no three-way
    /// split of [0, 1] into rejection, acceptance and uncertainty bands exists.
    #[error("calibrated threshold {threshold} is not below 1/2; three-way classification is undefined")]
    ThresholdAboveHalf { threshold: f64 },

    /// Both the hypothesis and the alternative of one couple were rejected.
    /// `couple` is the 1-based couple number.
    #[error("hypothesis and alternative both rejected at couple {couple}")]
    InternalInconsistency { couple: usize },

    /// The two nested thresholds are not strictly ordered.
    #[error("theta1 ({theta1}) must be strictly less than theta2 ({theta2})")]
    InvalidOrdering { theta1: f64, theta2: f64 },

    /// A numeric argument fell outside its valid domain.
    #[error("{what} = {value} is outside its valid domain")]
    DomainError { what: &'static str, value: f64 },

    /// A probability-valued argument fell outside [0, 1].
    #[error("{what} = {value} is outside [0, 1]")]
    ProbabilityOutOfRange { what: &'static str, value: f64 },

    /// A data column is constant, so correlations involving it are undefined.
    #[error("column {index} is constant; correlation tests are undefined")]
    DegenerateColumn { index: usize },

    /// Too few observations for the requested test.
    #[error("need at least {required} observations, got {actual}")]
    InsufficientSamples { required: usize, actual: usize },

    /// A loss specification outside identity mode was passed to an operation
    /// that needs a = c, b = l and a + b = 1.
    #[error("loss specification is not in identity mode (requires a = c, b = l, a + b = 1)")]
    IdentityModeRequired,

    /// The operation is only valid for free-combination families.
    #[error("family structure must satisfy free combination for this operation")]
    NotFreeCombination,

    /// An explicit local-test schedule increases with the intersection size.
    #[error("local test schedule must be non-increasing in the intersection size")]
    ScheduleNotMonotone,

    /// Index sets that must be disjoint overlap.
    #[error("index sets overlap; intersections with J1 \u{2229} J2 \u{2260} \u{2205} are empty")]
    OverlappingIndexSets,

    /// A truth assignment does not split {1..M} into true hypotheses and
    /// true alternatives.
    #[error("truth assignment must partition the couple indices")]
    InvalidTruthAssignment,

    /// Mutually incompatible model/procedure configuration.
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
