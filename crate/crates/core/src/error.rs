use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("seed {q} and length {n_zc} are not coprime (gcd = {gcd})")]
    NotCoprime { q: u64, n_zc: u64, gcd: u64 },

    #[error("invalid sequence parameters: {0}")]
    InvalidParams(String),

    #[error("sequence length {0} is not prime")]
    NotPrime(u64),

    #[error("transform length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("a spectrum of {n} bins cannot hold a length-{n_zc} sequence plus the DC bin")]
    SpectrumTooSmall { n: usize, n_zc: usize },

    #[error("requested {requested} codes but length {n_zc} supports at most {max}")]
    TooManyCodes {
        requested: usize,
        n_zc: u64,
        max: usize,
    },

    #[error("invalid beam plan: {0}")]
    InvalidPlan(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error(
        "target {index} at {range_m} m needs {needed} samples but the receive window holds {window}"
    )]
    EchoOutsideWindow {
        index: usize,
        range_m: f64,
        needed: usize,
        window: usize,
    },

    #[error("subcarrier block of {0} bins is too narrow (minimum is 16)")]
    DegenerateBlock(usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether the error is a violated precondition of the simulation
    /// (as opposed to a parse or I/O failure).
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::Config(_) | Error::Io(_) | Error::Csv(_))
    }
}
