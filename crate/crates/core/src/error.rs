use thiserror::Error;

/// Errors raised by signal construction, basis handling, the transform and
/// the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("signal length {0} is odd; an even number of samples is required")]
    OddLength(usize),
    #[error("signal length {0} is too short; at least 4 samples are required")]
    TooShort(usize),
    #[error("sample {index} is not finite")]
    NonFiniteSample { index: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("bin {bin} does not fit below the Nyquist bin of a {n}-sample signal")]
    BinOverflow { bin: usize, n: usize },

    #[error("basis has no fundamental harmonic (m = 1 with nonzero amplitude)")]
    NoFundamental,
    #[error("harmonic index {0} appears more than once")]
    DuplicateHarmonic(usize),
    #[error("invalid harmonic entry: {0}")]
    InvalidHarmonic(String),
    #[error("unknown built-in basis {0:?} (expected square, sawtooth, triangle or cosine)")]
    UnknownName(String),
    #[error("max_harmonic must be at least 1")]
    BadHarmonicCount,
    #[error("frequency {k} is out of range for a {n}-sample signal (1 <= k < {half})", half = n / 2)]
    FrequencyOutOfRange { k: usize, n: usize },

    #[error("transfer function covers {gains} bins but the spectrum has {bins}")]
    GainLengthMismatch { gains: usize, bins: usize },
    #[error("transfer function gain for bin {0} is not finite")]
    NonFiniteGain(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("eigen check candidate is identically zero")]
    ZeroCandidate,

    #[error("signal length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("coefficient count {count} is out of range 1..={n}")]
    BadCount { count: usize, n: usize },
    #[error("invalid order list: {0}")]
    BadOrders(String),
    #[error("cutoff {cutoff} is out of range 1..={k_max}")]
    BadCutoff { cutoff: usize, k_max: usize },

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by reading or writing files rather than by the
    /// numbers themselves.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Format { .. })
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        let line = err.position().map(|p| p.line() as usize).unwrap_or(0);
        match err.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Format {
                line,
                message: format!("{other:?}"),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
