use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,

    #[error("SVD did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid algebra signature: {0}")]
    InvalidSignature(String),

    #[error("algebra signatures differ")]
    SignatureMismatch,

    #[error("subspace basis is linearly dependent (smallest/largest singular value {ratio:e})")]
    DependentBasis { ratio: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no feasible certificate found (residual {residual:e}, gap {gap:e})")]
    CertificateNotFound { residual: f64, gap: f64 },

    #[error("brute force search supports at most 2 basis elements, got {0}")]
    TooManyDimensions(usize),

    #[error("element is not a contraction (operator norm {0})")]
    NotAContraction(f64),

    #[error("element is zero")]
    ZeroElement,

    #[error("element is not smooth for the trace norm")]
    NotSmooth,

    #[error("unsupported tail operator: {0}")]
    UnsupportedForm(String),

    #[error("truncation size {requested} is smaller than the head dimension {head}")]
    TooSmall { requested: usize, head: usize },

    #[error("tail bound does not reach {target:e} within {cap} coordinates")]
    NoFiniteN { target: f64, cap: usize },
}
