//! Synthetic tasks, pair generation, label noise, and class-prior
//! estimation.
//!
//! Two families of pair generators are provided:
//!
//! - The annotation pipeline used for end-to-end experiments:
//!   [`make_sd_pairs`] draws instance pairs from a labeled pool and tags
//!   them with the true SD label, then [`order_by_confidence`] puts the
//!   instance a probabilistic annotator ranks higher in front, and
//!   [`corrupt`] optionally flips labels and order. This is how observed
//!   data would look in the wild.
//! - Process-exact generators for statistical tests:
//!   [`stratified_pairs`] draws a fixed number of similar and dissimilar
//!   pairs from the exact pair-conditional distributions with exchangeable
//!   presentation, and [`comparison_pairs`] draws label-ordered pairs by
//!   rejection, the process under which the comparison-only estimator is
//!   unbiased. The unbiasedness and convergence harnesses rely on these.

use crate::error::{Error, Result};
use crate::loss::Loss;
use crate::model::{Architecture, Optimizer, OptimizerKind, Scorer};
use crate::rng::{derive_seed, rng_from_seed, SeededRng};
use crate::types::{ClassPrior, LabeledPair, NoiseRates, Sample, Sign};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

/// Two isotropic Gaussian class conditionals with a shared scale.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixtureSpec {
    pub mean_plus: Vec<f64>,
    pub mean_minus: Vec<f64>,
    pub sigma: f64,
    pub prior: ClassPrior,
}

impl GaussianMixtureSpec {
    pub fn new(
        mean_plus: Vec<f64>,
        mean_minus: Vec<f64>,
        sigma: f64,
        prior: ClassPrior,
    ) -> Result<Self> {
        if mean_plus.is_empty() || mean_plus.len() != mean_minus.len() {
            return Err(Error::DimensionMismatch {
                expected: mean_plus.len(),
                got: mean_minus.len(),
            });
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
        }
        Ok(GaussianMixtureSpec {
            mean_plus,
            mean_minus,
            sigma,
            prior,
        })
    }

    /// Class means `+-gap/2` along the first axis, zero elsewhere.
    pub fn axis_aligned(dim: usize, mean_gap: f64, sigma: f64, prior: ClassPrior) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        let mut mean_plus = vec![0.0; dim];
        let mut mean_minus = vec![0.0; dim];
        mean_plus[0] = mean_gap / 2.0;
        mean_minus[0] = -mean_gap / 2.0;
        GaussianMixtureSpec::new(mean_plus, mean_minus, sigma, prior)
    }

    pub fn dim(&self) -> usize {
        self.mean_plus.len()
    }

    fn mean_of(&self, y: Sign) -> &[f64] {
        match y {
            Sign::Plus => &self.mean_plus,
            Sign::Minus => &self.mean_minus,
        }
    }

    fn draw_label(&self, rng: &mut SeededRng) -> Sign {
        if rng.random::<f64>() < self.prior.pi_plus() {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    fn draw_features(&self, y: Sign, rng: &mut SeededRng) -> Vec<f64> {
        self.mean_of(y)
            .iter()
            .map(|m| m + self.sigma * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    /// Exact `p(y = +1 | x)` under this mixture.
    pub fn posterior(&self, x: &[f64]) -> f64 {
        let sq = |mean: &[f64]| -> f64 {
            mean.iter()
                .zip(x)
                .map(|(m, xi)| (xi - m) * (xi - m))
                .sum()
        };
        let log_odds = (self.prior.pi_plus() / self.prior.pi_minus()).ln()
            + (sq(&self.mean_minus) - sq(&self.mean_plus)) / (2.0 * self.sigma * self.sigma);
        clamp_unit(1.0 / (1.0 + (-log_odds).exp()))
    }
}

fn clamp_unit(r: f64) -> f64 {
    r.clamp(1e-12, 1.0 - 1e-12)
}

/// Draw `n` labeled samples i.i.d. from the mixture.
pub fn sample_labeled(spec: &GaussianMixtureSpec, n: usize, seed: u64) -> Vec<Sample> {
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|_| {
            let y = spec.draw_label(&mut rng);
            Sample {
                features: spec.draw_features(y, &mut rng),
                label: Some(y),
            }
        })
        .collect()
}

/// An instance pair with its true SD label, before preference ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct SdPair {
    pub x: Vec<f64>,
    pub x_prime: Vec<f64>,
    pub sd: Sign,
}

/// Draw `n_pairs` pairs of instances from a labeled pool (independently,
/// with replacement) and tag each with the label-agreement SD sign.
pub fn make_sd_pairs(samples: &[Sample], n_pairs: usize, seed: u64) -> Result<Vec<SdPair>> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples(samples.len()));
    }
    if n_pairs == 0 {
        return Err(Error::invalid("n_pairs must be positive"));
    }
    let labeled: Vec<(&Vec<f64>, Sign)> = samples
        .iter()
        .map(|s| {
            s.label
                .map(|y| (&s.features, y))
                .ok_or_else(|| Error::invalid("pair generation requires labeled samples"))
        })
        .collect::<Result<_>>()?;
    let mut rng = rng_from_seed(seed);
    Ok((0..n_pairs)
        .map(|_| {
            let (xa, ya) = labeled[rng.random_range(0..labeled.len())];
            let (xb, yb) = labeled[rng.random_range(0..labeled.len())];
            SdPair {
                x: xa.clone(),
                x_prime: xb.clone(),
                sd: if ya == yb { Sign::Plus } else { Sign::Minus },
            }
        })
        .collect())
}

/// A probabilistic scorer `r(x) ~ p(y = +1 | x)` with outputs strictly
/// inside (0, 1), used to order pairs by positive confidence.
#[derive(Debug, Clone)]
pub struct AnnotatorModel {
    kind: AnnotatorKind,
}

#[derive(Debug, Clone)]
enum AnnotatorKind {
    /// Sigmoid of a trained scorer.
    Fitted(Scorer),
    /// Exact posterior of a known mixture; test harnesses use this to
    /// remove annotator fitting error from the pipeline.
    Posterior(GaussianMixtureSpec),
}

impl AnnotatorModel {
    pub fn from_scorer(scorer: Scorer) -> Self {
        AnnotatorModel {
            kind: AnnotatorKind::Fitted(scorer),
        }
    }

    pub fn exact(spec: GaussianMixtureSpec) -> Self {
        AnnotatorModel {
            kind: AnnotatorKind::Posterior(spec),
        }
    }

    pub fn confidence(&self, x: &[f64]) -> Result<f64> {
        match &self.kind {
            AnnotatorKind::Fitted(scorer) => {
                let z = scorer.forward(x)?;
                Ok(clamp_unit(1.0 / (1.0 + (-z).exp())))
            }
            AnnotatorKind::Posterior(spec) => Ok(spec.posterior(x)),
        }
    }
}

/// Fit a logistic-link linear scorer on true labels with Adam, the
/// confidence model of the pair-ordering step.
pub fn train_annotator(samples: &[Sample], epochs: usize, seed: u64) -> Result<AnnotatorModel> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if epochs == 0 {
        return Err(Error::invalid("annotator epochs must be positive"));
    }
    let labeled: Vec<(&[f64], Sign)> = samples
        .iter()
        .map(|s| {
            s.label
                .map(|y| (s.features.as_slice(), y))
                .ok_or_else(|| Error::invalid("annotator training requires labeled samples"))
        })
        .collect::<Result<_>>()?;
    let first_label = labeled[0].1;
    if labeled.iter().all(|(_, y)| *y == first_label) {
        return Err(Error::SingleClassData);
    }

    let dim = labeled[0].0.len();
    let mut scorer = Scorer::new(Architecture::Linear, dim, seed)?;
    let mut opt = Optimizer::new(OptimizerKind::ADAM_DEFAULT, 1e-3, 0.0, scorer.params().len());
    let mut rng = rng_from_seed(derive_seed(seed, 1));
    let mut order: Vec<usize> = (0..labeled.len()).collect();
    let batch = 256;

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let mut grad = vec![0.0; scorer.params().len()];
            for &i in chunk {
                let (x, y) = labeled[i];
                let z = scorer.forward(x)?;
                let up = Loss::Logistic.grad(z, y)? / chunk.len() as f64;
                scorer.accumulate_gradient(x, up, &mut grad)?;
            }
            let mut params = scorer.params().to_vec();
            opt.step(&mut params, &grad)?;
            scorer.params_mut().copy_from_slice(&params);
        }
    }
    Ok(AnnotatorModel::from_scorer(scorer))
}

/// Order each pair so that `first` is the instance the annotator assigns
/// the strictly greater confidence; ties swap. SD labels are preserved.
pub fn order_by_confidence(pairs: &[SdPair], annotator: &AnnotatorModel) -> Result<Vec<LabeledPair>> {
    pairs
        .iter()
        .map(|p| {
            let r = annotator.confidence(&p.x)?;
            let r_prime = annotator.confidence(&p.x_prime)?;
            // swap on r <= r', so ties break toward swapping
            let (first, second) = if r <= r_prime {
                (p.x_prime.clone(), p.x.clone())
            } else {
                (p.x.clone(), p.x_prime.clone())
            };
            Ok(LabeledPair {
                first,
                second,
                sd: p.sd,
            })
        })
        .collect()
}

/// Apply label noise: flip the SD sign of a similar pair with probability
/// `rho_s` and of a dissimilar pair with probability `rho_d`, then swap the
/// pair order with probability `rho_c`. All flips are independent; instance
/// values are never altered.
pub fn corrupt(pairs: &[LabeledPair], rates: &NoiseRates, seed: u64) -> Vec<LabeledPair> {
    let mut rng = rng_from_seed(seed);
    pairs
        .iter()
        .map(|p| {
            let flip_rate = match p.sd {
                Sign::Plus => rates.rho_s,
                Sign::Minus => rates.rho_d,
            };
            let flip_sd = rng.random::<f64>() < flip_rate;
            let swap = rng.random::<f64>() < rates.rho_c;
            let mut out = if swap { p.swapped() } else { p.clone() };
            if flip_sd {
                out.sd = out.sd.flip();
            }
            out
        })
        .collect()
}

/// Which side of 0.5 the true class prior lies on; the pair statistics
/// alone cannot decide this.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorSide {
    GeHalf,
    LtHalf,
}

/// A class-prior estimate from pair counts. `clamped` flags that the
/// similar fraction fell below 1/2, where the inversion has no real root
/// and the radicand was clamped to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorEstimate {
    pub pi_plus: f64,
    pub clamped: bool,
}

/// Invert the similar-pair fraction into a class-prior estimate:
/// `pi_plus = (1 +- sqrt(2 pi_s_hat - 1)) / 2`, the sign chosen by `side`.
pub fn estimate_prior(n_similar: usize, n_dissimilar: usize, side: PriorSide) -> Result<PriorEstimate> {
    let total = n_similar + n_dissimilar;
    if total == 0 {
        return Err(Error::EmptyDataset);
    }
    let pi_s_hat = n_similar as f64 / total as f64;
    let radicand = 2.0 * pi_s_hat - 1.0;
    let clamped = radicand < 0.0;
    let root = radicand.max(0.0).sqrt();
    let pi_plus = match side {
        PriorSide::GeHalf => (1.0 + root) / 2.0,
        PriorSide::LtHalf => (1.0 - root) / 2.0,
    };
    Ok(PriorEstimate { pi_plus, clamped })
}

// ---------------------------------------------------------------------------
// Process-exact generators for statistical harnesses
// ---------------------------------------------------------------------------

/// Draw exactly `n_similar` pairs from the similar-pair conditional and
/// `n_dissimilar` from the dissimilar one. Presentation order is
/// exchangeable (same-class slots are i.i.d.; the mixed pair's positive
/// goes first on a fair coin), so the ordering carries no information.
pub fn stratified_pairs(
    spec: &GaussianMixtureSpec,
    n_similar: usize,
    n_dissimilar: usize,
    seed: u64,
) -> Vec<LabeledPair> {
    let mut rng = rng_from_seed(seed);
    let prior = &spec.prior;
    let p_both_plus = prior.pi_plus() * prior.pi_plus() / prior.pi_similar();
    let mut out = Vec::with_capacity(n_similar + n_dissimilar);
    for _ in 0..n_similar {
        let y = if rng.random::<f64>() < p_both_plus {
            Sign::Plus
        } else {
            Sign::Minus
        };
        out.push(LabeledPair {
            first: spec.draw_features(y, &mut rng),
            second: spec.draw_features(y, &mut rng),
            sd: Sign::Plus,
        });
    }
    for _ in 0..n_dissimilar {
        let pos = spec.draw_features(Sign::Plus, &mut rng);
        let neg = spec.draw_features(Sign::Minus, &mut rng);
        let (first, second) = if rng.random::<bool>() {
            (pos, neg)
        } else {
            (neg, pos)
        };
        out.push(LabeledPair {
            first,
            second,
            sd: Sign::Minus,
        });
    }
    out
}

/// Draw `n` pairs from the label-ordered comparison process: two i.i.d.
/// labeled draws, kept only when the first label is not below the second.
/// The first slot then follows the preferred-instance mixture and the
/// second the non-preferred one; SD labels record label agreement.
pub fn comparison_pairs(spec: &GaussianMixtureSpec, n: usize, seed: u64) -> Vec<LabeledPair> {
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let ya = spec.draw_label(&mut rng);
        let yb = spec.draw_label(&mut rng);
        if ya == Sign::Minus && yb == Sign::Plus {
            continue;
        }
        out.push(LabeledPair {
            first: spec.draw_features(ya, &mut rng),
            second: spec.draw_features(yb, &mut rng),
            sd: if ya == yb { Sign::Plus } else { Sign::Minus },
        });
    }
    out
}

// ---------------------------------------------------------------------------
// Full generation pipeline
// ---------------------------------------------------------------------------

/// Annotator fitting epochs of the generation pipeline.
pub const ANNOTATOR_EPOCHS: usize = 10;

/// The end-to-end pair-generation pipeline: sample a labeled pool of
/// `2 * n_pairs` instances, fit the annotator on it, draw SD pairs from the
/// pool, order each pair by annotator confidence, then apply label noise.
/// Seed streams: 0 pool, 1 pairing, 2 annotator, 3 noise.
pub fn generate_sd_pcomp_dataset(
    spec: &GaussianMixtureSpec,
    n_pairs: usize,
    rates: &NoiseRates,
    seed: u64,
) -> Result<Vec<LabeledPair>> {
    let pool = sample_labeled(spec, 2 * n_pairs.max(1), derive_seed(seed, 0));
    let raw = make_sd_pairs(&pool, n_pairs, derive_seed(seed, 1))?;
    let annotator = train_annotator(&pool, ANNOTATOR_EPOCHS, derive_seed(seed, 2))?;
    let ordered = order_by_confidence(&raw, &annotator)?;
    Ok(corrupt(&ordered, rates, derive_seed(seed, 3)))
}
