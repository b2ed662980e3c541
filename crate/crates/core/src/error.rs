use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid multislice weights: {0}")]
    InvalidWeights(String),
    #[error("histogram mismatch: word colour counts do not match the weights")]
    HistogramMismatch,
    #[error("colour {color} out of range for {colors} colours")]
    ColorOutOfRange { color: usize, colors: usize },
    #[error("coordinate {coordinate} out of range for {points} points")]
    CoordinateOutOfRange { coordinate: usize, points: usize },
    #[error("coordinates must be distinct, both are {0}")]
    CoordinatesEqual(usize),
    #[error("rank {rank} out of range for domain of size {size}")]
    RankOutOfRange { rank: u64, size: u64 },
    #[error("domain size overflows 64-bit integer arithmetic")]
    DomainSizeOverflow,
    #[error("budget exceeded: domain size {size} is larger than the dense-table cap {cap}")]
    DenseBudgetExceeded { size: u64, cap: u64 },
    #[error("budget exceeded: search over {candidates} candidate subsets is larger than the cap {cap}")]
    SearchBudgetExceeded { candidates: u64, cap: u64 },
    #[error("table length {len} does not match domain size {size}")]
    TableLengthMismatch { len: usize, size: u64 },
    #[error("operands are defined on different multislices")]
    SpecMismatch,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("subset is empty")]
    EmptySubset,
    #[error("function is not Boolean at rank {rank} (value {value})")]
    NotBoolean { rank: u64, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
