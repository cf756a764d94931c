use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("chain size must be odd, got N = {0}")]
    EvenChainSize(usize),
    #[error("chain size must be at least 3, got N = {0}")]
    ChainTooSmall(usize),
    #[error("anisotropy must be non-negative, got gamma = {0}")]
    NegativeAnisotropy(f64),
    #[error("parameter `{0}` is not finite")]
    NonFinite(&'static str),
    #[error("mode index {k} outside 1..={max}")]
    ModeOutOfRange { k: usize, max: usize },
    #[error("mode {0} listed more than once in excitation pattern")]
    DuplicateMode(usize),
    #[error("central qubit amplitudes not normalized: |alpha|^2 + |beta|^2 = {0}")]
    Unnormalized(f64),
    #[error("decoherence factor modulus {0} exceeds 1")]
    InvalidFactor(f64),
    #[error("echo value {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("invalid axis: {0}")]
    InvalidAxis(String),
    #[error("invalid time grid: {0}")]
    InvalidTimes(String),
    #[error("annihilator kernel has dimension {0}, expected 1")]
    KernelNotFound(usize),
    #[error("exact diagonalization supports N <= {max}, got N = {n}")]
    ChainTooLarge { n: usize, max: usize },
    #[error("ground state is degenerate (gap {gap:e})")]
    DegenerateGroundState { gap: f64 },
    #[error("eigensolver did not converge (residual {0:e})")]
    NoConvergence(f64),
    #[error("invalid excitation pattern `{0}`")]
    PatternSyntax(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
