//! Core domain types: signs, samples, labeled pairs, class priors, noise
//! rates, and the risk-estimator selection.
//!
//! All types are immutable value records and safe to share across threads.

use crate::error::{Error, Result};
use crate::loss::Loss;

/// Estimators containing the factor `1 / (pi_plus - pi_minus)` reject priors
/// closer than this to 0.5, where that factor is singular.
pub const PRIOR_SEPARATION_EPS: f64 = 1e-6;

/// A binary sign in `{-1, +1}`, used for class labels and SD labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_int(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(Error::invalid(format!(
                "sign must be +1 or -1, got {other}"
            ))),
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

/// A feature vector with an optional class label.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: Option<Sign>,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: Option<Sign>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::invalid("sample must have at least one feature"));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { index: i });
        }
        Ok(Sample { features, label })
    }

    pub fn labeled(features: Vec<f64>, label: Sign) -> Result<Self> {
        Sample::new(features, Some(label))
    }
}

/// One training unit: an ordered instance pair plus its SD label.
///
/// Ordering convention: `first` is the preference-ordered instance, the one
/// judged more likely to be positive. The SD label says whether the two
/// instances share a class.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPair {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub sd: Sign,
}

impl LabeledPair {
    pub fn new(first: Vec<f64>, second: Vec<f64>, sd: Sign) -> Result<Self> {
        if first.is_empty() {
            return Err(Error::invalid("pair instances must have dimension > 0"));
        }
        if first.len() != second.len() {
            return Err(Error::DimensionMismatch {
                expected: first.len(),
                got: second.len(),
            });
        }
        for (i, v) in first.iter().chain(second.iter()).enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteFeature { index: i });
            }
        }
        Ok(LabeledPair { first, second, sd })
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    /// The same pair with `first` and `second` exchanged.
    pub fn swapped(&self) -> Self {
        LabeledPair {
            first: self.second.clone(),
            second: self.first.clone(),
            sd: self.sd,
        }
    }
}

/// Counts returned by [`validate_pair_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    pub n_similar: usize,
    pub n_dissimilar: usize,
    pub dim: usize,
}

/// Validate a pair dataset and return its composition.
///
/// Rejects empty datasets, mixed dimensions, and non-finite features.
pub fn validate_pair_dataset(pairs: &[LabeledPair]) -> Result<PairCounts> {
    let first = pairs.first().ok_or(Error::EmptyDataset)?;
    let dim = first.dim();
    if dim == 0 {
        return Err(Error::invalid("pairs must have dimension > 0"));
    }
    let mut n_similar = 0;
    let mut n_dissimilar = 0;
    for (i, p) in pairs.iter().enumerate() {
        if p.first.len() != dim || p.second.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: if p.first.len() != dim {
                    p.first.len()
                } else {
                    p.second.len()
                },
            });
        }
        if p.first.iter().chain(p.second.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { index: i });
        }
        match p.sd {
            Sign::Plus => n_similar += 1,
            Sign::Minus => n_dissimilar += 1,
        }
    }
    Ok(PairCounts {
        n_similar,
        n_dissimilar,
        dim,
    })
}

/// The positive-class prior `pi_plus` with derived pair-level quantities.
///
/// `pi_similar = pi_plus^2 + pi_minus^2` is the probability that a random
/// pair shares a class, `pi_dissimilar = 2 pi_plus pi_minus` that it does
/// not; the two always sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassPrior {
    pi_plus: f64,
}

impl ClassPrior {
    pub fn new(pi_plus: f64) -> Result<Self> {
        if !pi_plus.is_finite() || pi_plus <= 0.0 || pi_plus >= 1.0 {
            return Err(Error::PriorOutOfRange(pi_plus));
        }
        Ok(ClassPrior { pi_plus })
    }

    pub fn pi_plus(&self) -> f64 {
        self.pi_plus
    }

    pub fn pi_minus(&self) -> f64 {
        1.0 - self.pi_plus
    }

    pub fn pi_similar(&self) -> f64 {
        self.pi_plus * self.pi_plus + self.pi_minus() * self.pi_minus()
    }

    pub fn pi_dissimilar(&self) -> f64 {
        2.0 * self.pi_plus * self.pi_minus()
    }

    /// `pi_plus - pi_minus`, the denominator of the corrected loss.
    pub fn separation(&self) -> f64 {
        self.pi_plus - self.pi_minus()
    }

    /// Fail with [`Error::DegeneratePrior`] when the prior is within
    /// [`PRIOR_SEPARATION_EPS`] of 0.5.
    pub fn ensure_separated(&self) -> Result<()> {
        if (self.pi_plus - 0.5).abs() < PRIOR_SEPARATION_EPS {
            Err(Error::DegeneratePrior(self.pi_plus))
        } else {
            Ok(())
        }
    }
}

/// Construct a [`ClassPrior`], rejecting values outside (0, 1).
pub fn class_prior_from(pi_plus: f64) -> Result<ClassPrior> {
    ClassPrior::new(pi_plus)
}

/// Flip probabilities of the pair-label noise model: similar observed as
/// dissimilar (`rho_s`), dissimilar observed as similar (`rho_d`), and
/// preference order reversed (`rho_c`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseRates {
    pub rho_s: f64,
    pub rho_d: f64,
    pub rho_c: f64,
}

impl NoiseRates {
    pub const NONE: NoiseRates = NoiseRates {
        rho_s: 0.0,
        rho_d: 0.0,
        rho_c: 0.0,
    };

    pub fn new(rho_s: f64, rho_d: f64, rho_c: f64) -> Result<Self> {
        for (name, v) in [("rho_s", rho_s), ("rho_d", rho_d), ("rho_c", rho_c)] {
            if !v.is_finite() || !(0.0..1.0).contains(&v) {
                return Err(Error::invalid(format!(
                    "{name} must lie in [0, 1), got {v}"
                )));
            }
        }
        Ok(NoiseRates { rho_s, rho_d, rho_c })
    }

    /// True when `rho_s + rho_d >= 1`, where the SD flips no longer leave a
    /// majority of labels intact; callers should warn.
    pub fn sd_rates_overlap(&self) -> bool {
        self.rho_s + self.rho_d >= 1.0
    }
}

/// Which empirical risk estimator to minimize or evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorKind {
    /// SD-only estimator over corrected losses.
    Sd,
    /// Comparison-only estimator; ignores SD labels.
    Pc,
    /// `gamma * Sd + (1 - gamma) * Pc`.
    Convex(f64),
    /// Unified pair estimator over both label types.
    Sdpc,
    /// `lambda * Sdpc(identity) + (1 - lambda) * ordinary risk`.
    Combined(f64),
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::Sd => "sd",
            EstimatorKind::Pc => "pc",
            EstimatorKind::Convex(_) => "convex",
            EstimatorKind::Sdpc => "sdpc",
            EstimatorKind::Combined(_) => "combined",
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            EstimatorKind::Convex(g) => Some(*g),
            _ => None,
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            EstimatorKind::Combined(l) => Some(*l),
            _ => None,
        }
    }
}

/// Correction applied to each signed partial-risk term to keep the
/// empirical risk from going negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correction {
    Identity,
    Relu,
    Abs,
}

impl Correction {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Correction::Identity => x,
            Correction::Relu => x.max(0.0),
            Correction::Abs => x.abs(),
        }
    }

    /// Subgradient, with the convention `d/dx = 0` exactly at the kink.
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Correction::Identity => 1.0,
            Correction::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Correction::Abs => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Correction::Identity => "id",
            Correction::Relu => "relu",
            Correction::Abs => "abs",
        }
    }
}

/// Full description of a risk to minimize or evaluate.
///
/// `correction` is honored by the unified estimator only; the other
/// estimators have no corrected form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskSpec {
    pub estimator: EstimatorKind,
    pub correction: Correction,
    pub loss: Loss,
}

impl RiskSpec {
    pub fn new(estimator: EstimatorKind, correction: Correction, loss: Loss) -> RiskSpec {
        RiskSpec {
            estimator,
            correction,
            loss,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.estimator {
            EstimatorKind::Convex(g) if !(0.0..=1.0).contains(&g) => {
                Err(Error::GammaOutOfRange(g))
            }
            EstimatorKind::Combined(l) if !(0.0..=1.0).contains(&l) => {
                Err(Error::LambdaOutOfRange(l))
            }
            _ => Ok(()),
        }
    }

    /// Training additionally requires a differentiable loss.
    pub fn validate_for_training(&self) -> Result<()> {
        self.validate()?;
        if !self.loss.is_differentiable() {
            return Err(Error::NonDifferentiableLoss);
        }
        Ok(())
    }
}
