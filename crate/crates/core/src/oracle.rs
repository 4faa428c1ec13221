//! Independent ground-truth computations for tests and acceptance runs.
//!
//! Everything here is deliberately written as a separate code path from the
//! production modules: the estimator recomputation below transcribes each
//! formula term by term with its own loss evaluation, so a transcription
//! error in either copy of the coefficient algebra shows up as a
//! dual-implementation mismatch.

use crate::datagen::GaussianMixtureSpec;
use crate::error::{Error, Result};
use crate::loss::Loss;
use crate::model::Scorer;
use crate::rng::rng_from_seed;
use crate::types::{ClassPrior, Correction, EstimatorKind, LabeledPair, Sample, Sign};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

/// How to compute the population risk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrueRiskMethod {
    /// Adaptive Simpson over `mean +- 10 sigma` per class, absolute
    /// tolerance 1e-9. One-dimensional specs only.
    Quadrature1D,
    MonteCarlo { n: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct TrueRiskQuery<'a> {
    pub scorer: &'a Scorer,
    pub spec: &'a GaussianMixtureSpec,
    pub loss: Loss,
    pub method: TrueRiskMethod,
}

/// A risk value with its numeric uncertainty: the quadrature tolerance, or
/// the Monte-Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueRiskEstimate {
    pub value: f64,
    pub error: f64,
}

const QUADRATURE_TOL: f64 = 1e-9;

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Population risk `pi_plus E_plus[l(g, +1)] + pi_minus E_minus[l(g, -1)]`.
pub fn true_risk(query: &TrueRiskQuery) -> Result<TrueRiskEstimate> {
    let spec = query.spec;
    let prior = &spec.prior;
    match query.method {
        TrueRiskMethod::Quadrature1D => {
            if spec.dim() != 1 {
                return Err(Error::QuadratureUnsupportedDim(spec.dim()));
            }
            let sigma = spec.sigma;
            let class_expectation = |mean: f64, target: Sign| -> Result<f64> {
                let scorer = query.scorer;
                let loss = query.loss;
                let integrand = move |x: f64| -> f64 {
                    let z = scorer.forward(&[x]).expect("1-d scorer");
                    let u = (x - mean) / sigma;
                    let pdf = (-0.5 * u * u).exp()
                        / (sigma * (2.0 * std::f64::consts::PI).sqrt());
                    loss.value(z, target) * pdf
                };
                Ok(integrate(
                    &integrand,
                    mean - 10.0 * sigma,
                    mean + 10.0 * sigma,
                    QUADRATURE_TOL / 2.0,
                ))
            };
            let e_plus = class_expectation(spec.mean_plus[0], Sign::Plus)?;
            let e_minus = class_expectation(spec.mean_minus[0], Sign::Minus)?;
            Ok(TrueRiskEstimate {
                value: prior.pi_plus() * e_plus + prior.pi_minus() * e_minus,
                error: QUADRATURE_TOL,
            })
        }
        TrueRiskMethod::MonteCarlo { n, seed } => {
            if n == 0 {
                return Err(Error::invalid("Monte Carlo needs n >= 1 draws"));
            }
            let mut rng = rng_from_seed(seed);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..n {
                let y = if rng.random::<f64>() < prior.pi_plus() {
                    Sign::Plus
                } else {
                    Sign::Minus
                };
                let mean = match y {
                    Sign::Plus => &spec.mean_plus,
                    Sign::Minus => &spec.mean_minus,
                };
                let x: Vec<f64> = mean
                    .iter()
                    .map(|m| m + spec.sigma * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let v = query.loss.value(query.scorer.forward(&x)?, y);
                sum += v;
                sum_sq += v * v;
            }
            let mean = sum / n as f64;
            let var = (sum_sq / n as f64 - mean * mean).max(0.0);
            Ok(TrueRiskEstimate {
                value: mean,
                error: (var / n as f64).sqrt(),
            })
        }
    }
}

/// Accuracy of the optimal decision rule under the mixture, in closed form
/// along the mean-difference axis.
pub fn bayes_accuracy(spec: &GaussianMixtureSpec) -> f64 {
    let prior = &spec.prior;
    let delta: f64 = spec
        .mean_plus
        .iter()
        .zip(&spec.mean_minus)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if delta == 0.0 {
        return prior.pi_plus().max(prior.pi_minus());
    }
    // projected coordinate: classes sit at +-delta/2 with std sigma; the
    // optimal threshold shifts by the prior log-odds
    let t_star = -spec.sigma * spec.sigma * (prior.pi_plus() / prior.pi_minus()).ln() / delta;
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let p_correct_pos = 1.0 - std_normal.cdf((t_star - delta / 2.0) / spec.sigma);
    let p_correct_neg = std_normal.cdf((t_star + delta / 2.0) / spec.sigma);
    prior.pi_plus() * p_correct_pos + prior.pi_minus() * p_correct_neg
}

// ---------------------------------------------------------------------------
// Naive estimator recomputation
// ---------------------------------------------------------------------------

// Literal loss evaluation; fine for the moderate scores tests use.
fn naive_loss(loss: Loss, z: f64, y: f64) -> f64 {
    match loss {
        Loss::Logistic => (1.0 + (-y * z).exp()).ln(),
        Loss::ZeroOne => {
            if y * z <= 0.0 {
                1.0
            } else {
                0.0
            }
        }
    }
}

type ScoredPairs = Vec<(f64, f64)>;

fn split_scores(pairs: &[LabeledPair], scorer: &Scorer) -> Result<(ScoredPairs, ScoredPairs)> {
    let mut similar = Vec::new();
    let mut dissimilar = Vec::new();
    for p in pairs {
        let pair = (scorer.forward(&p.first)?, scorer.forward(&p.second)?);
        match p.sd {
            Sign::Plus => similar.push(pair),
            Sign::Minus => dissimilar.push(pair),
        }
    }
    Ok((similar, dissimilar))
}

fn naive_sd(pairs: &[LabeledPair], scorer: &Scorer, prior: &ClassPrior, loss: Loss) -> Result<f64> {
    prior.ensure_separated()?;
    let (similar, dissimilar) = split_scores(pairs, scorer)?;
    if similar.is_empty() || dissimilar.is_empty() {
        return Err(Error::MissingPairKind {
            n_s: similar.len(),
            n_d: dissimilar.len(),
        });
    }
    let (pp, pm) = (prior.pi_plus(), prior.pi_minus());
    let corrected = |z: f64, t: f64| -> f64 {
        pp / (pp - pm) * naive_loss(loss, z, t) - pm / (pp - pm) * naive_loss(loss, z, -t)
    };
    let pi_s = pp * pp + pm * pm;
    let pi_d = 2.0 * pp * pm;
    let mut r_s = 0.0;
    for &(f, s) in &similar {
        r_s += (corrected(f, 1.0) + corrected(s, 1.0)) / 2.0;
    }
    let mut r_d = 0.0;
    for &(f, s) in &dissimilar {
        r_d += (corrected(f, -1.0) + corrected(s, -1.0)) / 2.0;
    }
    Ok(pi_s / similar.len() as f64 * r_s + pi_d / dissimilar.len() as f64 * r_d)
}

fn naive_pcomp(
    pairs: &[LabeledPair],
    scorer: &Scorer,
    prior: &ClassPrior,
    loss: Loss,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (pp, pm) = (prior.pi_plus(), prior.pi_minus());
    let mut total = 0.0;
    for p in pairs {
        let f = scorer.forward(&p.first)?;
        let s = scorer.forward(&p.second)?;
        total += naive_loss(loss, f, 1.0) - pp * naive_loss(loss, f, -1.0)
            + naive_loss(loss, s, -1.0)
            - pm * naive_loss(loss, s, 1.0);
    }
    Ok(total / pairs.len() as f64)
}

fn naive_sdpc(
    pairs: &[LabeledPair],
    scorer: &Scorer,
    prior: &ClassPrior,
    loss: Loss,
    correction: Correction,
) -> Result<f64> {
    prior.ensure_separated()?;
    let (similar, dissimilar) = split_scores(pairs, scorer)?;
    if similar.is_empty() || dissimilar.is_empty() {
        return Err(Error::MissingPairKind {
            n_s: similar.len(),
            n_d: dissimilar.len(),
        });
    }
    let (pp, pm) = (prior.pi_plus(), prior.pi_minus());
    let sep = pp - pm;
    let n_s = similar.len() as f64;
    let n_d = dissimilar.len() as f64;

    let mut a_s = 0.0;
    let mut b_s = 0.0;
    let mut c_s = 0.0;
    let mut d_s = 0.0;
    for &(f, s) in &similar {
        a_s += pp * pp * pp * naive_loss(loss, f, 1.0) / (sep * n_s);
        b_s += -pp * pp * pm * naive_loss(loss, f, -1.0) / (sep * n_s);
        c_s += pp * pm * pm * naive_loss(loss, s, 1.0) / (sep * n_s);
        d_s += -pm * pm * pm * naive_loss(loss, s, -1.0) / (sep * n_s);
    }
    let mut a_d = 0.0;
    let mut b_d = 0.0;
    let mut c_d = 0.0;
    let mut d_d = 0.0;
    for &(f, s) in &dissimilar {
        a_d += pm * (pp * pp - pm) * naive_loss(loss, f, 1.0) / (sep * n_d);
        b_d += pp * (pm - pp * pp) * naive_loss(loss, f, -1.0) / (sep * n_d);
        c_d += pm * (pm * pm - pp) * naive_loss(loss, s, 1.0) / (sep * n_d);
        d_d += pp * (pp - pm * pm) * naive_loss(loss, s, -1.0) / (sep * n_d);
    }
    Ok([a_s, b_s, c_s, d_s, a_d, b_d, c_d, d_d]
        .iter()
        .map(|&t| match correction {
            Correction::Identity => t,
            Correction::Relu => {
                if t > 0.0 {
                    t
                } else {
                    0.0
                }
            }
            Correction::Abs => t.abs(),
        })
        .sum())
}

/// Recompute the estimator selected by `estimator` with an independent,
/// deliberately unoptimized implementation. Agreement with the production
/// path is asserted by the acceptance suite.
pub fn naive_estimator_recompute(
    pairs: &[LabeledPair],
    ordinary: &[Sample],
    scorer: &Scorer,
    prior: &ClassPrior,
    loss: Loss,
    estimator: &EstimatorKind,
    correction: Correction,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    match estimator {
        EstimatorKind::Sd => naive_sd(pairs, scorer, prior, loss),
        EstimatorKind::Pc => naive_pcomp(pairs, scorer, prior, loss),
        EstimatorKind::Convex(gamma) => {
            if !(0.0..=1.0).contains(gamma) {
                return Err(Error::GammaOutOfRange(*gamma));
            }
            let mut total = 0.0;
            if *gamma > 0.0 {
                total += gamma * naive_sd(pairs, scorer, prior, loss)?;
            }
            if *gamma < 1.0 {
                total += (1.0 - gamma) * naive_pcomp(pairs, scorer, prior, loss)?;
            }
            Ok(total)
        }
        EstimatorKind::Sdpc => naive_sdpc(pairs, scorer, prior, loss, correction),
        EstimatorKind::Combined(lambda) => {
            if !(0.0..=1.0).contains(lambda) {
                return Err(Error::LambdaOutOfRange(*lambda));
            }
            if *lambda >= 1.0 {
                return naive_sdpc(pairs, scorer, prior, loss, Correction::Identity);
            }
            if ordinary.is_empty() {
                return Err(Error::EmptyDataset);
            }
            let mut ord = 0.0;
            for s in ordinary {
                let y = s
                    .label
                    .ok_or_else(|| Error::invalid("ordinary samples must be labeled"))?;
                ord += naive_loss(loss, scorer.forward(&s.features)?, y.as_f64());
            }
            ord /= ordinary.len() as f64;
            if *lambda <= 0.0 {
                return Ok(ord);
            }
            Ok(lambda * naive_sdpc(pairs, scorer, prior, loss, Correction::Identity)?
                + (1.0 - lambda) * ord)
        }
    }
}
