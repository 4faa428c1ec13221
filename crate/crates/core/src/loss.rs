//! Binary surrogate losses and the prior-corrected loss.

use crate::error::{Error, Result};
use crate::types::{ClassPrior, Sign};

/// A binary loss `l(z, y)` on a real score `z` and a label `y` in `{-1,+1}`.
///
/// Only the logistic loss is differentiable; the zero-one loss is for
/// evaluation only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    Logistic,
    ZeroOne,
}

impl Loss {
    pub fn is_differentiable(self) -> bool {
        matches!(self, Loss::Logistic)
    }

    /// Evaluate the loss.
    ///
    /// Logistic is `ln(1 + exp(-y z))` computed through `log1p` on the
    /// stable branch so it never overflows. Zero-one counts `y z <= 0` as an
    /// error: a score of exactly 0 is a misclassification regardless of `y`.
    pub fn value(self, z: f64, y: Sign) -> f64 {
        let m = y.as_f64() * z;
        match self {
            Loss::Logistic => {
                if m >= 0.0 {
                    (-m).exp().ln_1p()
                } else {
                    -m + m.exp().ln_1p()
                }
            }
            Loss::ZeroOne => {
                if m <= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `dl/dz`. Defined for the logistic loss only.
    pub fn grad(self, z: f64, y: Sign) -> Result<f64> {
        match self {
            Loss::Logistic => {
                let m = y.as_f64() * z;
                // exp saturates to +inf for large m, giving the correct limit 0.
                Ok(-y.as_f64() / (1.0 + m.exp()))
            }
            Loss::ZeroOne => Err(Error::NonDifferentiableLoss),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Loss::Logistic => "logistic",
            Loss::ZeroOne => "zero_one",
        }
    }
}

/// The prior-corrected loss
/// `L(z, t) = pi_plus/(pi_plus - pi_minus) * l(z, t)
///          - pi_minus/(pi_plus - pi_minus) * l(z, -t)`.
///
/// This is the affine reweighting that makes the SD estimator unbiased. It
/// may be negative, and it is singular at `pi_plus = 0.5`.
pub fn corrected_loss(prior: &ClassPrior, loss: Loss, z: f64, target: Sign) -> Result<f64> {
    prior.ensure_separated()?;
    let sep = prior.separation();
    Ok(prior.pi_plus() / sep * loss.value(z, target)
        - prior.pi_minus() / sep * loss.value(z, target.flip()))
}

/// `d/dz` of [`corrected_loss`].
pub fn corrected_loss_grad(
    prior: &ClassPrior,
    loss: Loss,
    z: f64,
    target: Sign,
) -> Result<f64> {
    prior.ensure_separated()?;
    let sep = prior.separation();
    Ok(prior.pi_plus() / sep * loss.grad(z, target)?
        - prior.pi_minus() / sep * loss.grad(z, target.flip())?)
}
