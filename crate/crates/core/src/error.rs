use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("invalid character {found:?} at position {position}")]
    InvalidCharacter { position: usize, found: char },
    #[error("sequence of length {len} exceeds the maximum of {max}")]
    TooLong { len: usize, max: usize },
    #[error("run length {run} must be smaller than the sequence length {len}")]
    RunTooLong { run: u32, len: usize },
    #[error("run length must be at least 1")]
    InvalidRunLength,
    #[error("{0} is not a conditional frequency statistic")]
    NotAFrequency(String),
    #[error("empty list of groups")]
    EmptyList,
    #[error("hit probability {0} is outside (0, 1)")]
    InvalidProbability(f64),
    #[error("sequence length must be at least 1")]
    InvalidLength,
    #[error("k = {k} exceeds the enumeration limit {limit}")]
    KTooLarge { k: u32, limit: u32 },
    #[error("invalid range: {min} > {max}")]
    InvalidRange { min: u32, max: u32 },
    #[error("pattern of length {pattern} is longer than k = {k}")]
    PatternTooLong { pattern: usize, k: u32 },
    #[error("the include-as-zero policy is not defined for the difference statistic")]
    PolicyNotSupported,
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error("the statistic is undefined for every sequence of length {k}")]
    NoDefinedSequences { k: u32 },
    #[error("every draw produced an undefined statistic")]
    ZeroDefinedDraws,
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("input contains no sequences")]
    EmptyFile,
    #[error("the statistic is undefined for every unit of the record")]
    AllUndefined,
    #[error("empirical hit rate {0} is degenerate; supply an explicit hit probability")]
    DegenerateHitRate(f64),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
