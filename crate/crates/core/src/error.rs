//! Error type shared by every module in the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in entry {index}")]
    NonFiniteFeature { index: usize },

    #[error("class prior must lie strictly inside (0, 1), got {0}")]
    PriorOutOfRange(f64),

    #[error(
        "estimator undefined at pi_plus = {0}: the similar/dissimilar reweighting \
         divides by pi_plus - pi_minus, which vanishes at 0.5"
    )]
    DegeneratePrior(f64),

    #[error("the zero-one loss has no derivative; train with the logistic loss")]
    NonDifferentiableLoss,

    #[error("need at least one similar and one dissimilar pair (n_s = {n_s}, n_d = {n_d})")]
    MissingPairKind { n_s: usize, n_d: usize },

    #[error("gamma must lie in [0, 1], got {0}")]
    GammaOutOfRange(f64),

    #[error("lambda must lie in [0, 1], got {0}")]
    LambdaOutOfRange(f64),

    #[error("need at least 2 samples to draw pairs, got {0}")]
    InsufficientSamples(usize),

    #[error("training data contains one class only")]
    SingleClassData,

    #[error("test set contains one class only; AUC is undefined")]
    SingleClassTest,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("training risk became non-finite at epoch {epoch}")]
    NonFiniteRisk { epoch: usize },

    #[error("quadrature supports 1-dimensional inputs only, got d = {0}")]
    QuadratureUnsupportedDim(usize),

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
