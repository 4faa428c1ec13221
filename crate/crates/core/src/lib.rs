//! Learning binary classifiers from pairwise weak supervision.
//!
//! Instead of per-instance labels, the training signal is a collection of
//! instance pairs, each carrying two weak annotations:
//!
//! - an SD label saying whether the two instances share a class
//!   (`s = +1` similar, `s = -1` dissimilar), and
//! - a preference ordering saying which instance is more likely to be
//!   positive (encoded by pair order: `first` is the preferred one).
//!
//! From such pairs alone, together with the positive-class prior, the
//! classification risk of a scorer can be estimated without ever seeing a
//! label. This crate implements the whole toolchain:
//!
//! - [`estimators`]: the risk estimators (SD-only, comparison-only, their
//!   convex combination, the unified pair estimator with optional ReLU/ABS
//!   risk correction, and a weighted blend with ordinarily labeled data),
//!   together with exact parameter gradients.
//! - [`datagen`]: synthetic Gaussian tasks, pair generation with an
//!   annotator-based preference ordering, label-noise corruption, and
//!   class-prior estimation from pair statistics.
//! - [`model`]: linear and MLP scorers with manual backprop, plus SGD and
//!   Adam (decoupled weight decay) optimizers.
//! - [`train`]: the minibatch training loop, trial runner, and report
//!   serialization.
//! - [`metrics`]: accuracy and tie-aware rank-based AUC.
//! - [`oracle`]: independent ground-truth computations (quadrature /
//!   Monte-Carlo true risk, Bayes accuracy, naive estimator recomputation)
//!   used by tests and the acceptance suite.
//!
//! Every stochastic operation takes an explicit seed and is bit-for-bit
//! reproducible on a given platform. All arithmetic is `f64`.

pub mod datagen;
pub mod error;
pub mod estimators;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod train;
pub mod types;

pub use error::{Error, Result};
pub use loss::{corrected_loss, Loss};
pub use types::{
    class_prior_from, validate_pair_dataset, ClassPrior, Correction, EstimatorKind, LabeledPair,
    NoiseRates, PairCounts, RiskSpec, Sample, Sign,
};
