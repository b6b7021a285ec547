use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside a function's mathematical domain (e.g. h(x) with x <= -1).
    #[error("domain: {0}")]
    Domain(String),
    /// A theorem/corollary precondition is violated (e.g. x < 1 for the
    /// bounded-differences theorem, n < 8x for the empirical corollary).
    #[error("precondition: {0}")]
    Precondition(String),
    /// A baseline evaluated outside its stated validity range.
    #[error("range: {0}")]
    Range(String),
    /// An Orlicz norm that is infinite for every finite threshold.
    #[error("divergent: {0}")]
    Divergent(String),
    /// An iterative routine failed to meet its tolerance within max_iter.
    #[error("iteration: {0}")]
    Iteration(String),
    /// Malformed matrix / sample-set / simulation input.
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
