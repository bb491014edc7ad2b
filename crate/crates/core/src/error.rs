use thiserror::Error;

/// Errors produced by the nonceforge library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid length for {what}: expected {expected} bytes, got {got}")]
    InvalidLength {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The operating system entropy facility failed. Never degraded to a
    /// weaker source; callers must treat this as fatal.
    #[error("system entropy unavailable: {0}")]
    EntropyUnavailable(String),

    /// The deterministic stream ran out of 64-bit block indices.
    #[error("deterministic random stream counter overflow")]
    CounterOverflow,

    /// Parameter generation exhausted its attempt budget; retryable.
    #[error("parameter generation gave up after {0} attempts; retry with fresh randomness")]
    GenerationExceeded(u64),

    #[error("signing rejected {0} consecutive nonces; domain parameters look broken")]
    TooManyRejections(u32),

    #[error("byte stream exhausted: {needed} bytes required, {available} available")]
    StreamExhausted { needed: usize, available: usize },

    #[error("key recovery failed: {0}")]
    Recovery(String),

    #[error("constants table rejected: {0}")]
    Constants(String),
}

pub type Result<T> = core::result::Result<T, Error>;
