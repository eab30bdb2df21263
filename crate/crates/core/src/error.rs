use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid window length {0}: must be even and at least 16")]
    InvalidWindowLength(usize),

    #[error("invalid range: lower bound {lo} exceeds upper bound {hi}")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("unstable allpass parameters: |alpha| * (1 + |beta|) = {product} must be < 1 (alpha = {alpha}, beta = {beta})")]
    Unstable { alpha: f64, beta: f64, product: f64 },

    #[error("non-finite sample produced at index {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("signal too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("length mismatch: {0} vs {1} samples")]
    LengthMismatch(usize, usize),

    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    SampleRateMismatch(u32, u32),

    #[error("expected {expected} channel(s), got {got}")]
    ChannelCount { expected: usize, got: usize },

    #[error("unsupported WAV format: {0}")]
    UnsupportedFormat(String),

    #[error("corrupt WAV header: {0}")]
    CorruptHeader(String),

    #[error("adaptive filter diverged: misalignment {misalignment_db:.1} dB at block {block}")]
    Divergence { block: usize, misalignment_db: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
