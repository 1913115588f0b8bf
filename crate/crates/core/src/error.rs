use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("scaled LCG width must be in [4, 20] bits, got {0}")]
    ScaledWidth(u32),
    #[error("a generator needs at least one stream")]
    NoStreams,
    #[error("stream count {0} exceeds 2^63 - 1")]
    TooManyStreams(u64),
    #[error("batch size must be positive")]
    ZeroBatch,
    #[error("lane count must be in [1, 64], got {0}")]
    InvalidLanes(usize),
    #[error("stream index {index} out of range for {count} streams")]
    StreamOutOfRange { index: usize, count: usize },
    #[error("stream set is empty")]
    EmptyStreamSet,
    #[error("sequence lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("correlation needs at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("correlation is undefined for a constant sequence")]
    ConstantInput,
    #[error("pairwise scan needs at least two streams, got {0}")]
    NotEnoughStreams(usize),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("draw count must be positive")]
    ZeroDraws,
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
