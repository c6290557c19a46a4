use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The file is a JPEG, but not one this codec handles (progressive,
    /// arithmetic-coded, 12-bit, multi-scan, ...). Callers should store it
    /// unmodified.
    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    #[error("malformed stream: {0}")]
    MalformedStream(String),

    #[error("huffman decode error: {0}")]
    HuffmanDecode(String),

    #[error("coefficient {value} out of range at position {position}")]
    CoefficientOutOfRange { value: i32, position: usize },

    #[error("symbol {symbol:#04x} has no code in huffman table")]
    MissingCode { symbol: u16 },

    #[error("insufficient samples to fit buckets: {0}")]
    InsufficientSamples(String),

    #[error("table set version mismatch: found {found}, expected {expected}")]
    VersionMismatch { found: u16, expected: u16 },

    #[error("corrupt table set: {0}")]
    CorruptTableSet(String),

    #[error("container was encoded with a different table set")]
    TableSetMismatch,

    #[error("corrupt payload: {0}")]
    CorruptPayload(String),

    #[error("coefficient at position {position} is not a thresholding candidate")]
    NotCandidate { position: usize },

    #[error("baseline size must be positive")]
    ZeroBaseline,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by damaged or inconsistent input data, as
    /// opposed to inputs that are merely out of scope.
    pub fn is_corruption(&self) -> bool {
        matches!(
            self,
            Error::MalformedStream(_)
                | Error::HuffmanDecode(_)
                | Error::CorruptTableSet(_)
                | Error::CorruptPayload(_)
                | Error::TableSetMismatch
                | Error::VersionMismatch { .. }
        )
    }
}
