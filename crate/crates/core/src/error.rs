use thiserror::Error;

/// Unified error type for the whole engine.
///
/// The CLI maps these onto process exit codes: degenerate input (2),
/// tracking failure (3); everything else surfaces as a failed run (1).
#[derive(Debug, Error)]
pub enum Error {
    #[error("permutation degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),

    #[error("images do not form a bijection on 0..{degree}: {detail}")]
    NotABijection { degree: usize, detail: String },

    #[error("pair set not closed under the coordinatewise action: pair ({0}, {1}) maps outside the set")]
    ClosureViolation(usize, usize),

    #[error("cover violates its surface relation or well-formedness: {0}")]
    InvalidCover(String),

    #[error("cover map violates equivariance or fiber-size constraints: {0}")]
    InvalidCoverMap(String),

    #[error("operation requires a connected cover")]
    Disconnected,

    #[error("Riemann-Hurwitz count is not a non-negative even integer: 2-2g = {0}")]
    NonIntegralGenus(i64),

    #[error("marked point index {0} out of range (cover has {1})")]
    IndexOutOfRange(usize, usize),

    #[error("duplicate marked-point label: {0}")]
    DuplicateLabel(String),

    #[error("homology modulus {0} is not a supported prime")]
    UnsupportedModulus(u64),

    #[error("homology rank {rank} differs from 2*genus = {expected}")]
    HomologyRankMismatch { rank: usize, expected: usize },

    #[error("conjugacy search exceeded its node budget (timeout, not a verdict)")]
    ConjugacyTimeout,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("tracking failure: {0}")]
    TrackingFailure(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code the CLI should use for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateInput(_) | Error::InvalidConfig(_) => 2,
            Error::TrackingFailure(_) => 3,
            _ => 1,
        }
    }
}
