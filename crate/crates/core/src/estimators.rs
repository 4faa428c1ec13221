//! Empirical risk estimators over scored instance pairs, and their exact
//! parameter gradients.
//!
//! All estimators are pure functions of (scores, class prior, loss). Five
//! are provided:
//!
//! - [`risk_sd`]: uses SD labels only; averages the prior-corrected loss
//!   over similar pairs (target `+1`) and dissimilar pairs (target `-1`),
//!   reweighted by `pi_similar` / `pi_dissimilar`.
//! - [`risk_pcomp`]: uses the preference ordering only; one signed
//!   four-loss term per pair.
//! - [`risk_convex`]: `gamma * risk_sd + (1 - gamma) * risk_pcomp`.
//! - [`risk_sdpc`]: the unified estimator over both label types. Its eight
//!   signed partial sums ([`eight_terms`]) are exposed because the ReLU/ABS
//!   risk corrections apply per term; the identity correction reproduces
//!   the plain unbiased form. [`risk_sdpc_alpha_form`] recomputes the same
//!   linear functional grouped by slot weights instead of by term, which
//!   tests use as an algebraic cross-check.
//! - [`risk_combined`]: `lambda`-weighted blend of the unified estimator
//!   with an ordinary supervised risk.
//!
//! The estimators with a `1 / (pi_plus - pi_minus)` factor (`sd`, `sdpc`,
//! `convex` with `gamma > 0`) reject degenerate priors near 0.5.

use crate::error::{Error, Result};
use crate::loss::{corrected_loss, corrected_loss_grad, Loss};
use crate::model::Scorer;
use crate::types::{ClassPrior, Correction, EstimatorKind, LabeledPair, RiskSpec, Sample, Sign};

/// Scores of an ordered pair dataset: `first[i]` is the score of the
/// preference-ordered instance of pair `i`, `second[i]` of the other one.
#[derive(Debug, Clone, PartialEq)]
pub struct PairScores {
    first: Vec<f64>,
    second: Vec<f64>,
    sd: Vec<Sign>,
}

impl PairScores {
    pub fn new(first: Vec<f64>, second: Vec<f64>, sd: Vec<Sign>) -> Result<Self> {
        if first.len() != second.len() {
            return Err(Error::LengthMismatch {
                left: first.len(),
                right: second.len(),
            });
        }
        if first.len() != sd.len() {
            return Err(Error::LengthMismatch {
                left: first.len(),
                right: sd.len(),
            });
        }
        if first.iter().chain(second.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("scores must be finite"));
        }
        Ok(PairScores { first, second, sd })
    }

    /// Score every pair with `scorer`.
    pub fn from_pairs(pairs: &[LabeledPair], scorer: &Scorer) -> Result<Self> {
        let mut first = Vec::with_capacity(pairs.len());
        let mut second = Vec::with_capacity(pairs.len());
        let mut sd = Vec::with_capacity(pairs.len());
        for p in pairs {
            first.push(scorer.forward(&p.first)?);
            second.push(scorer.forward(&p.second)?);
            sd.push(p.sd);
        }
        PairScores::new(first, second, sd)
    }

    pub fn len(&self) -> usize {
        self.sd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sd.is_empty()
    }

    pub fn n_similar(&self) -> usize {
        self.sd.iter().filter(|s| **s == Sign::Plus).count()
    }

    pub fn n_dissimilar(&self) -> usize {
        self.len() - self.n_similar()
    }

    fn iter(&self) -> impl Iterator<Item = (f64, f64, Sign)> + '_ {
        self.first
            .iter()
            .zip(&self.second)
            .zip(&self.sd)
            .map(|((&f, &s), &sd)| (f, s, sd))
    }

    fn require_both_kinds(&self) -> Result<(usize, usize)> {
        let n_s = self.n_similar();
        let n_d = self.len() - n_s;
        if n_s == 0 || n_d == 0 {
            return Err(Error::MissingPairKind { n_s, n_d });
        }
        Ok((n_s, n_d))
    }
}

/// Loss weights of the unified estimator, one `[weight on l(.,+1),
/// weight on l(.,-1)]` pair per (SD kind, pair slot).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotLossWeights {
    pub similar_first: [f64; 2],
    pub similar_second: [f64; 2],
    pub dissimilar_first: [f64; 2],
    pub dissimilar_second: [f64; 2],
}

/// Slot weights of the unified estimator, a function of the prior alone.
pub fn alpha_coefficients(prior: &ClassPrior) -> Result<SlotLossWeights> {
    prior.ensure_separated()?;
    let (pp, pm) = (prior.pi_plus(), prior.pi_minus());
    let sep = prior.separation();
    Ok(SlotLossWeights {
        similar_first: [pp * pp / sep * pp, pp * pp / sep * -pm],
        similar_second: [pm * pm / sep * pp, pm * pm / sep * -pm],
        dissimilar_first: [pm * (pp * pp - pm) / sep, pp * (pm - pp * pp) / sep],
        dissimilar_second: [pm * (pm * pm - pp) / sep, pp * (pp - pm * pm) / sep],
    })
}

/// The eight signed partial sums of the unified estimator. Their plain sum
/// is the identity-corrected risk; ReLU/ABS corrections apply per field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskTerms {
    pub s_first_pos: f64,
    pub s_first_neg: f64,
    pub s_second_pos: f64,
    pub s_second_neg: f64,
    pub d_first_pos: f64,
    pub d_first_neg: f64,
    pub d_second_pos: f64,
    pub d_second_neg: f64,
}

impl RiskTerms {
    pub fn as_array(&self) -> [f64; 8] {
        [
            self.s_first_pos,
            self.s_first_neg,
            self.s_second_pos,
            self.s_second_neg,
            self.d_first_pos,
            self.d_first_neg,
            self.d_second_pos,
            self.d_second_neg,
        ]
    }

    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }

    pub fn corrected_sum(&self, correction: Correction) -> f64 {
        self.as_array().iter().map(|&t| correction.apply(t)).sum()
    }
}

/// Numerators of the eight term coefficients; each term divides by
/// `(pi_plus - pi_minus) * n` of its stratum. Order matches the four loss
/// slots `(first,+1), (first,-1), (second,+1), (second,-1)`.
fn term_numerators(prior: &ClassPrior) -> ([f64; 4], [f64; 4]) {
    let (pp, pm) = (prior.pi_plus(), prior.pi_minus());
    let similar = [pp * pp * pp, -pp * pp * pm, pp * pm * pm, -pm * pm * pm];
    let dissimilar = [
        pm * (pp * pp - pm),
        pp * (pm - pp * pp),
        pm * (pm * pm - pp),
        pp * (pp - pm * pm),
    ];
    (similar, dissimilar)
}

/// SD-only estimator: prior-corrected losses toward `+1` on similar pairs
/// and `-1` on dissimilar pairs, each slot weighted half.
pub fn risk_sd(scores: &PairScores, prior: &ClassPrior, loss: Loss) -> Result<f64> {
    prior.ensure_separated()?;
    let (n_s, n_d) = scores.require_both_kinds()?;
    let mut sum_s = 0.0;
    let mut sum_d = 0.0;
    for (f, s, sd) in scores.iter() {
        match sd {
            Sign::Plus => {
                sum_s += 0.5
                    * (corrected_loss(prior, loss, f, Sign::Plus)?
                        + corrected_loss(prior, loss, s, Sign::Plus)?);
            }
            Sign::Minus => {
                sum_d += 0.5
                    * (corrected_loss(prior, loss, f, Sign::Minus)?
                        + corrected_loss(prior, loss, s, Sign::Minus)?);
            }
        }
    }
    Ok(prior.pi_similar() / n_s as f64 * sum_s + prior.pi_dissimilar() / n_d as f64 * sum_d)
}

/// Comparison-only estimator; SD labels are ignored. Valid at any prior,
/// including 0.5.
pub fn risk_pcomp(scores: &PairScores, prior: &ClassPrior, loss: Loss) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (pp, pm) = (prior.pi_plus(), prior.pi_minus());
    let mut sum = 0.0;
    for (f, s, _) in scores.iter() {
        sum += loss.value(f, Sign::Plus) - pp * loss.value(f, Sign::Minus)
            + loss.value(s, Sign::Minus)
            - pm * loss.value(s, Sign::Plus);
    }
    Ok(sum / scores.len() as f64)
}

/// Convex combination of the SD-only and comparison-only estimators. Each
/// constituent is evaluated (and its preconditions enforced) only when its
/// weight is nonzero, so the endpoints reproduce the constituents exactly.
pub fn risk_convex(scores: &PairScores, prior: &ClassPrior, loss: Loss, gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    if gamma == 1.0 {
        return risk_sd(scores, prior, loss);
    }
    if gamma == 0.0 {
        return risk_pcomp(scores, prior, loss);
    }
    Ok(gamma * risk_sd(scores, prior, loss)? + (1.0 - gamma) * risk_pcomp(scores, prior, loss)?)
}

/// The eight signed partial sums of the unified estimator.
pub fn eight_terms(scores: &PairScores, prior: &ClassPrior, loss: Loss) -> Result<RiskTerms> {
    prior.ensure_separated()?;
    let (n_s, n_d) = scores.require_both_kinds()?;
    let (sim, dis) = term_numerators(prior);
    let sep = prior.separation();
    let scale_s = sep * n_s as f64;
    let scale_d = sep * n_d as f64;

    let mut acc_s = [0.0; 4];
    let mut acc_d = [0.0; 4];
    for (f, s, sd) in scores.iter() {
        let slots = [
            loss.value(f, Sign::Plus),
            loss.value(f, Sign::Minus),
            loss.value(s, Sign::Plus),
            loss.value(s, Sign::Minus),
        ];
        match sd {
            Sign::Plus => {
                for k in 0..4 {
                    acc_s[k] += sim[k] * slots[k];
                }
            }
            Sign::Minus => {
                for k in 0..4 {
                    acc_d[k] += dis[k] * slots[k];
                }
            }
        }
    }
    Ok(RiskTerms {
        s_first_pos: acc_s[0] / scale_s,
        s_first_neg: acc_s[1] / scale_s,
        s_second_pos: acc_s[2] / scale_s,
        s_second_neg: acc_s[3] / scale_s,
        d_first_pos: acc_d[0] / scale_d,
        d_first_neg: acc_d[1] / scale_d,
        d_second_pos: acc_d[2] / scale_d,
        d_second_neg: acc_d[3] / scale_d,
    })
}

/// Unified estimator over both label types, with the chosen per-term
/// correction. `Identity` is the plain unbiased form.
pub fn risk_sdpc(
    scores: &PairScores,
    prior: &ClassPrior,
    loss: Loss,
    correction: Correction,
) -> Result<f64> {
    Ok(eight_terms(scores, prior, loss)?.corrected_sum(correction))
}

/// The unified estimator computed through the slot-weight form instead of
/// the eight-term form. Same linear functional, regrouped; tests assert the
/// two agree.
pub fn risk_sdpc_alpha_form(scores: &PairScores, prior: &ClassPrior, loss: Loss) -> Result<f64> {
    let weights = alpha_coefficients(prior)?;
    let (n_s, n_d) = scores.require_both_kinds()?;
    let mut sum_s = 0.0;
    let mut sum_d = 0.0;
    for (f, s, sd) in scores.iter() {
        let (w_first, w_second, acc): (_, _, &mut f64) = match sd {
            Sign::Plus => (weights.similar_first, weights.similar_second, &mut sum_s),
            Sign::Minus => (
                weights.dissimilar_first,
                weights.dissimilar_second,
                &mut sum_d,
            ),
        };
        *acc += w_first[0] * loss.value(f, Sign::Plus)
            + w_first[1] * loss.value(f, Sign::Minus)
            + w_second[0] * loss.value(s, Sign::Plus)
            + w_second[1] * loss.value(s, Sign::Minus);
    }
    Ok(sum_s / n_s as f64 + sum_d / n_d as f64)
}

/// Weighted blend of the unified estimator (identity correction) with an
/// ordinary supervised risk over `(score, label)` points.
pub fn risk_combined(
    scores: &PairScores,
    ordinary: &[(f64, Sign)],
    prior: &ClassPrior,
    loss: Loss,
    lambda: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    if lambda < 1.0 && ordinary.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if lambda == 1.0 {
        return risk_sdpc(scores, prior, loss, Correction::Identity);
    }
    let ord = ordinary.iter().map(|&(z, y)| loss.value(z, y)).sum::<f64>()
        / ordinary.len() as f64;
    if lambda == 0.0 {
        return Ok(ord);
    }
    Ok(lambda * risk_sdpc(scores, prior, loss, Correction::Identity)? + (1.0 - lambda) * ord)
}

/// Evaluate the risk selected by `spec` on raw pair data. `ordinary` is
/// consumed by the combined estimator only.
pub fn risk_value(
    spec: &RiskSpec,
    pairs: &[LabeledPair],
    ordinary: &[Sample],
    scorer: &Scorer,
    prior: &ClassPrior,
) -> Result<f64> {
    spec.validate()?;
    let scores = PairScores::from_pairs(pairs, scorer)?;
    match spec.estimator {
        EstimatorKind::Sd => risk_sd(&scores, prior, spec.loss),
        EstimatorKind::Pc => risk_pcomp(&scores, prior, spec.loss),
        EstimatorKind::Convex(g) => risk_convex(&scores, prior, spec.loss, g),
        EstimatorKind::Sdpc => risk_sdpc(&scores, prior, spec.loss, spec.correction),
        EstimatorKind::Combined(l) => {
            let ord = score_ordinary(ordinary, scorer)?;
            risk_combined(&scores, &ord, prior, spec.loss, l)
        }
    }
}

fn score_ordinary(ordinary: &[Sample], scorer: &Scorer) -> Result<Vec<(f64, Sign)>> {
    ordinary
        .iter()
        .map(|s| {
            let y = s
                .label
                .ok_or_else(|| Error::invalid("ordinary samples must be labeled"))?;
            Ok((scorer.forward(&s.features)?, y))
        })
        .collect()
}

/// Per-slot derivatives `d(risk)/d(score)` for every pair, used by the
/// chain rule through the scorer.
fn slot_derivatives(
    spec: &RiskSpec,
    scores: &PairScores,
    prior: &ClassPrior,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = scores.len();
    let loss = spec.loss;
    let mut df = vec![0.0; n];
    let mut ds = vec![0.0; n];

    match spec.estimator {
        EstimatorKind::Sd => {
            prior.ensure_separated()?;
            let (n_s, n_d) = scores.require_both_kinds()?;
            let w_s = prior.pi_similar() / (2.0 * n_s as f64);
            let w_d = prior.pi_dissimilar() / (2.0 * n_d as f64);
            for (i, (f, s, sd)) in scores.iter().enumerate() {
                let (w, target) = match sd {
                    Sign::Plus => (w_s, Sign::Plus),
                    Sign::Minus => (w_d, Sign::Minus),
                };
                df[i] = w * corrected_loss_grad(prior, loss, f, target)?;
                ds[i] = w * corrected_loss_grad(prior, loss, s, target)?;
            }
        }
        EstimatorKind::Pc => {
            if scores.is_empty() {
                return Err(Error::EmptyDataset);
            }
            let inv_n = 1.0 / n as f64;
            let (pp, pm) = (prior.pi_plus(), prior.pi_minus());
            for (i, (f, s, _)) in scores.iter().enumerate() {
                df[i] = inv_n * (loss.grad(f, Sign::Plus)? - pp * loss.grad(f, Sign::Minus)?);
                ds[i] = inv_n * (loss.grad(s, Sign::Minus)? - pm * loss.grad(s, Sign::Plus)?);
            }
        }
        EstimatorKind::Convex(gamma) => {
            if !(0.0..=1.0).contains(&gamma) {
                return Err(Error::GammaOutOfRange(gamma));
            }
            if gamma > 0.0 {
                let sd_spec = RiskSpec::new(EstimatorKind::Sd, spec.correction, loss);
                let (a, b) = slot_derivatives(&sd_spec, scores, prior)?;
                for i in 0..n {
                    df[i] += gamma * a[i];
                    ds[i] += gamma * b[i];
                }
            }
            if gamma < 1.0 {
                let pc_spec = RiskSpec::new(EstimatorKind::Pc, spec.correction, loss);
                let (a, b) = slot_derivatives(&pc_spec, scores, prior)?;
                for i in 0..n {
                    df[i] += (1.0 - gamma) * a[i];
                    ds[i] += (1.0 - gamma) * b[i];
                }
            }
        }
        EstimatorKind::Sdpc | EstimatorKind::Combined(_) => {
            let correction = match spec.estimator {
                // the combined blend always uses the identity-corrected form
                EstimatorKind::Combined(_) => Correction::Identity,
                _ => spec.correction,
            };
            let terms = eight_terms(scores, prior, loss)?;
            let t = terms.as_array();
            let fprime: Vec<f64> = t.iter().map(|&v| correction.derivative(v)).collect();
            let (sim, dis) = term_numerators(prior);
            let sep = prior.separation();
            let (n_s, n_d) = scores.require_both_kinds()?;
            let scale_s = sep * n_s as f64;
            let scale_d = sep * n_d as f64;
            let outer = match spec.estimator {
                EstimatorKind::Combined(l) => l,
                _ => 1.0,
            };
            for (i, (f, s, sd)) in scores.iter().enumerate() {
                match sd {
                    Sign::Plus => {
                        df[i] = outer
                            * (fprime[0] * sim[0] * loss.grad(f, Sign::Plus)?
                                + fprime[1] * sim[1] * loss.grad(f, Sign::Minus)?)
                            / scale_s;
                        ds[i] = outer
                            * (fprime[2] * sim[2] * loss.grad(s, Sign::Plus)?
                                + fprime[3] * sim[3] * loss.grad(s, Sign::Minus)?)
                            / scale_s;
                    }
                    Sign::Minus => {
                        df[i] = outer
                            * (fprime[4] * dis[0] * loss.grad(f, Sign::Plus)?
                                + fprime[5] * dis[1] * loss.grad(f, Sign::Minus)?)
                            / scale_d;
                        ds[i] = outer
                            * (fprime[6] * dis[2] * loss.grad(s, Sign::Plus)?
                                + fprime[7] * dis[3] * loss.grad(s, Sign::Minus)?)
                            / scale_d;
                    }
                }
            }
        }
    }
    Ok((df, ds))
}

/// Gradient of the selected empirical risk with respect to the scorer
/// parameters. Corrected estimators propagate the per-term subgradient
/// (zero exactly at a kink) into every loss slot of that term.
pub fn risk_gradient(
    spec: &RiskSpec,
    pairs: &[LabeledPair],
    ordinary: &[Sample],
    scorer: &Scorer,
    prior: &ClassPrior,
) -> Result<Vec<f64>> {
    spec.validate_for_training()?;
    let scores = PairScores::from_pairs(pairs, scorer)?;
    let (df, ds) = slot_derivatives(spec, &scores, prior)?;

    let mut grad = vec![0.0; scorer.params().len()];
    for (i, p) in pairs.iter().enumerate() {
        scorer.accumulate_gradient(&p.first, df[i], &mut grad)?;
        scorer.accumulate_gradient(&p.second, ds[i], &mut grad)?;
    }

    if let EstimatorKind::Combined(lambda) = spec.estimator {
        if lambda < 1.0 {
            if ordinary.is_empty() {
                return Err(Error::EmptyDataset);
            }
            let w = (1.0 - lambda) / ordinary.len() as f64;
            for s in ordinary {
                let y = s
                    .label
                    .ok_or_else(|| Error::invalid("ordinary samples must be labeled"))?;
                let z = scorer.forward(&s.features)?;
                scorer.accumulate_gradient(&s.features, w * spec.loss.grad(z, y)?, &mut grad)?;
            }
        }
    }
    Ok(grad)
}
