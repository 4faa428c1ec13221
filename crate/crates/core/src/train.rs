//! Minibatch training over labeled pairs, the end-to-end trial runner, and
//! report serialization.

use crate::datagen::{
    corrupt, estimate_prior, generate_sd_pcomp_dataset, sample_labeled, GaussianMixtureSpec,
    PriorEstimate, PriorSide,
};
use crate::error::{Error, Result};
use crate::estimators::{risk_gradient, risk_value};
use crate::metrics::{accuracy, auc};
use crate::model::{Architecture, Optimizer, OptimizerKind, Scorer};
use crate::rng::{derive_seed, rng_from_seed, SeededRng};
use crate::types::{
    validate_pair_dataset, ClassPrior, EstimatorKind, LabeledPair, NoiseRates, RiskSpec, Sample,
};
use rand::seq::SliceRandom;
use std::time::Instant;

/// Where the class prior used for training comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorSource {
    Known(f64),
    /// Estimate from the observed SD counts; the caller supplies which side
    /// of 0.5 the prior lies on.
    Estimated(PriorSide),
}

/// Training hyperparameters. The defaults are 100 epochs, batch 256,
/// learning rate 1e-3, weight decay 1e-5, Adam.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub seed: u64,
    pub risk: RiskSpec,
    pub prior_source: PriorSource,
    pub optimizer: OptimizerKind,
}

impl TrainConfig {
    pub fn new(risk: RiskSpec, prior_source: PriorSource, seed: u64) -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 256,
            learning_rate: 1e-3,
            weight_decay: 1e-5,
            seed,
            risk,
            prior_source,
            optimizer: OptimizerKind::ADAM_DEFAULT,
        }
    }
}

/// Result of [`train`]: the final scorer, the full-data risk after each
/// epoch, parameter snapshots of the last (up to) ten epochs, and the prior
/// that was used.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub scorer: Scorer,
    pub risk_trace: Vec<(usize, f64)>,
    pub last_epoch_params: Vec<Vec<f64>>,
    pub prior_used: ClassPrior,
    pub prior_estimate: Option<PriorEstimate>,
}

impl TrainOutput {
    pub fn final_risk(&self) -> f64 {
        self.risk_trace.last().map(|&(_, r)| r).unwrap_or(f64::NAN)
    }
}

fn resolve_prior(
    source: &PriorSource,
    n_similar: usize,
    n_dissimilar: usize,
) -> Result<(ClassPrior, Option<PriorEstimate>)> {
    match source {
        PriorSource::Known(v) => Ok((ClassPrior::new(*v)?, None)),
        PriorSource::Estimated(side) => {
            let est = estimate_prior(n_similar, n_dissimilar, *side)?;
            Ok((ClassPrior::new(est.pi_plus)?, Some(est)))
        }
    }
}

fn needs_both_kinds(estimator: &EstimatorKind) -> bool {
    match estimator {
        EstimatorKind::Sd | EstimatorKind::Sdpc => true,
        EstimatorKind::Convex(g) => *g > 0.0,
        EstimatorKind::Combined(l) => *l > 0.0,
        EstimatorKind::Pc => false,
    }
}

/// Split `0..n` into batches of `batch_size` (last one kept when short).
/// When `both_kinds` is set, every batch must hold at least one similar and
/// one dissimilar pair: a shuffled partition is resampled until it
/// qualifies, falling back to dealing one pair of each kind into every
/// batch first. Fails with [`Error::MissingPairKind`] when no valid
/// partition exists at all.
fn partition_batches(
    rng: &mut SeededRng,
    pairs: &[LabeledPair],
    batch_size: usize,
    both_kinds: bool,
) -> Result<Vec<Vec<usize>>> {
    let n = pairs.len();
    let n_batches = n.div_ceil(batch_size);
    let size_of = |b: usize| -> usize {
        if b + 1 < n_batches {
            batch_size
        } else {
            n - batch_size * (n_batches - 1)
        }
    };
    let mut idx: Vec<usize> = (0..n).collect();

    if !both_kinds {
        idx.shuffle(rng);
        return Ok(idx.chunks(batch_size).map(|c| c.to_vec()).collect());
    }

    let is_similar: Vec<bool> = pairs
        .iter()
        .map(|p| p.sd == crate::types::Sign::Plus)
        .collect();
    let n_s = is_similar.iter().filter(|&&s| s).count();
    let n_d = n - n_s;
    let feasible =
        n_s >= n_batches && n_d >= n_batches && (0..n_batches).all(|b| size_of(b) >= 2);
    if !feasible {
        return Err(Error::MissingPairKind { n_s, n_d });
    }

    let valid = |batches: &[Vec<usize>]| {
        batches.iter().all(|b| {
            b.iter().any(|&i| is_similar[i]) && b.iter().any(|&i| !is_similar[i])
        })
    };

    for _ in 0..64 {
        idx.shuffle(rng);
        let batches: Vec<Vec<usize>> = idx.chunks(batch_size).map(|c| c.to_vec()).collect();
        if valid(&batches) {
            return Ok(batches);
        }
    }

    // deal one pair of each kind per batch, then fill with the rest
    let mut sim: Vec<usize> = (0..n).filter(|&i| is_similar[i]).collect();
    let mut dis: Vec<usize> = (0..n).filter(|&i| !is_similar[i]).collect();
    sim.shuffle(rng);
    dis.shuffle(rng);
    let mut batches: Vec<Vec<usize>> = (0..n_batches)
        .map(|b| vec![sim[b], dis[b]])
        .collect();
    let mut rest: Vec<usize> = sim[n_batches..]
        .iter()
        .chain(dis[n_batches..].iter())
        .copied()
        .collect();
    rest.shuffle(rng);
    let mut cursor = 0;
    for (b, batch) in batches.iter_mut().enumerate() {
        while batch.len() < size_of(b) {
            batch.push(rest[cursor]);
            cursor += 1;
        }
    }
    Ok(batches)
}

/// Train a scorer by minibatch gradient descent on the configured risk.
///
/// Pairs are reshuffled every epoch under the run seed; the trace records
/// the full-dataset risk after each epoch. Training aborts with
/// [`Error::NonFiniteRisk`] the first time that risk leaves the finite
/// range.
pub fn train(pairs: &[LabeledPair], config: &TrainConfig, scorer_init: &Scorer) -> Result<TrainOutput> {
    train_with_ordinary(pairs, &[], config, scorer_init)
}

/// [`train`] with an additional ordinarily labeled dataset, consumed by the
/// combined estimator (resolved per minibatch alongside the pair batches).
pub fn train_with_ordinary(
    pairs: &[LabeledPair],
    ordinary: &[Sample],
    config: &TrainConfig,
    scorer_init: &Scorer,
) -> Result<TrainOutput> {
    let counts = validate_pair_dataset(pairs)?;
    config.risk.validate_for_training()?;
    if config.epochs == 0 {
        return Err(Error::invalid("epochs must be positive"));
    }
    if config.batch_size == 0 {
        return Err(Error::invalid("batch size must be positive"));
    }
    if !(config.learning_rate.is_finite() && config.learning_rate >= 0.0) {
        return Err(Error::invalid("learning rate must be nonnegative"));
    }
    let (prior, prior_estimate) =
        resolve_prior(&config.prior_source, counts.n_similar, counts.n_dissimilar)?;

    // estimator preconditions, surfaced before the first epoch
    let both = needs_both_kinds(&config.risk.estimator);
    if both {
        prior.ensure_separated()?;
        if counts.n_similar == 0 || counts.n_dissimilar == 0 {
            return Err(Error::MissingPairKind {
                n_s: counts.n_similar,
                n_d: counts.n_dissimilar,
            });
        }
    }
    if let EstimatorKind::Combined(l) = config.risk.estimator {
        if l < 1.0 && ordinary.is_empty() {
            return Err(Error::EmptyDataset);
        }
    }

    let mut scorer = scorer_init.clone();
    let mut optimizer = Optimizer::new(
        config.optimizer,
        config.learning_rate,
        config.weight_decay,
        scorer.params().len(),
    );
    let mut rng = rng_from_seed(derive_seed(config.seed, 0xB41C));
    let mut ord_idx: Vec<usize> = (0..ordinary.len()).collect();
    let mut trace = Vec::with_capacity(config.epochs);
    let mut last_epoch_params: Vec<Vec<f64>> = Vec::new();
    let keep_from = config.epochs.saturating_sub(10);

    for epoch in 1..=config.epochs {
        let batches = partition_batches(&mut rng, pairs, config.batch_size, both)?;
        ord_idx.shuffle(&mut rng);
        let n_batches = batches.len();

        for (b, batch) in batches.iter().enumerate() {
            let batch_pairs: Vec<LabeledPair> =
                batch.iter().map(|&i| pairs[i].clone()).collect();
            // the ordinary samples are spread over the same number of batches
            let ord_batch: Vec<Sample> = if ordinary.is_empty() {
                Vec::new()
            } else {
                let lo = b * ordinary.len() / n_batches;
                let hi = (b + 1) * ordinary.len() / n_batches;
                ord_idx[lo..hi].iter().map(|&i| ordinary[i].clone()).collect()
            };
            let grad = risk_gradient(&config.risk, &batch_pairs, &ord_batch, &scorer, &prior)?;
            let mut params = scorer.params().to_vec();
            optimizer.step(&mut params, &grad)?;
            scorer.params_mut().copy_from_slice(&params);
        }

        let full_risk = risk_value(&config.risk, pairs, ordinary, &scorer, &prior)?;
        if !full_risk.is_finite() {
            return Err(Error::NonFiniteRisk { epoch });
        }
        trace.push((epoch, full_risk));
        if epoch > keep_from {
            last_epoch_params.push(scorer.params().to_vec());
        }
    }

    Ok(TrainOutput {
        scorer,
        risk_trace: trace,
        last_epoch_params,
        prior_used: prior,
        prior_estimate,
    })
}

/// Data source of a trial.
#[derive(Debug, Clone)]
pub enum TrialData {
    Synthetic {
        spec: GaussianMixtureSpec,
        n_pairs: usize,
        n_test: usize,
        n_ordinary: usize,
    },
    Loaded {
        pairs: Vec<LabeledPair>,
        test: Vec<Sample>,
        ordinary: Vec<Sample>,
    },
}

/// Full description of one experiment run.
#[derive(Debug, Clone)]
pub struct TrialSpec {
    pub data: TrialData,
    pub noise: NoiseRates,
    pub arch: Architecture,
    pub config: TrainConfig,
}

/// Metrics record of one trial. All fields except `wall_seconds` are a
/// pure function of the trial seed and configuration.
#[derive(Debug, Clone)]
pub struct TrialReport {
    pub final_accuracy: Option<f64>,
    pub accuracy_last10: Option<f64>,
    pub final_auc: Option<f64>,
    pub risk_trace: Vec<(usize, f64)>,
    pub pi_hat: Option<f64>,
    pub prior_used: f64,
    pub wall_seconds: f64,
}

impl TrialReport {
    pub fn final_risk(&self) -> Option<f64> {
        self.risk_trace.last().map(|&(_, r)| r)
    }
}

/// Generate (or take) the data, corrupt, order, train, and evaluate.
/// Deterministic per seed up to `wall_seconds`.
pub fn run_trial(trial: &TrialSpec) -> Result<TrialReport> {
    let started = Instant::now();
    let seed = trial.config.seed;

    let (pairs, test, ordinary) = match &trial.data {
        TrialData::Synthetic {
            spec,
            n_pairs,
            n_test,
            n_ordinary,
        } => {
            if *n_test == 0 {
                return Err(Error::invalid("n_test must be positive"));
            }
            let pairs =
                generate_sd_pcomp_dataset(spec, *n_pairs, &trial.noise, derive_seed(seed, 10))?;
            let test = sample_labeled(spec, *n_test, derive_seed(seed, 11));
            let ordinary = sample_labeled(spec, *n_ordinary, derive_seed(seed, 12));
            (pairs, test, ordinary)
        }
        TrialData::Loaded {
            pairs,
            test,
            ordinary,
        } => {
            let pairs = corrupt(pairs, &trial.noise, derive_seed(seed, 10));
            (pairs, test.clone(), ordinary.clone())
        }
    };

    let counts = validate_pair_dataset(&pairs)?;
    let scorer_init = Scorer::new(trial.arch.clone(), counts.dim, derive_seed(seed, 13))?;
    let out = train_with_ordinary(&pairs, &ordinary, &trial.config, &scorer_init)?;

    let final_accuracy = accuracy(&out.scorer, &test)?;
    let final_auc = match auc(&out.scorer, &test) {
        Ok(v) => Some(v),
        Err(Error::SingleClassTest) => None,
        Err(e) => return Err(e),
    };
    let accuracy_last10 =
        accuracy_over_snapshots(&trial.arch, counts.dim, &out.last_epoch_params, &test)?;

    Ok(TrialReport {
        final_accuracy: Some(final_accuracy),
        accuracy_last10: Some(accuracy_last10),
        final_auc,
        risk_trace: out.risk_trace,
        pi_hat: out.prior_estimate.map(|e| e.pi_plus),
        prior_used: out.prior_used.pi_plus(),
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Mean test accuracy over parameter snapshots (the last-epochs average the
/// reports carry alongside the raw final-epoch value).
pub fn accuracy_over_snapshots(
    arch: &Architecture,
    dim: usize,
    snapshots: &[Vec<f64>],
    test: &[Sample],
) -> Result<f64> {
    if snapshots.is_empty() {
        return Err(Error::invalid("no parameter snapshots to evaluate"));
    }
    let mut sum = 0.0;
    for params in snapshots {
        let snap = Scorer::from_params(arch.clone(), dim, params.clone())?;
        sum += accuracy(&snap, test)?;
    }
    Ok(sum / snapshots.len() as f64)
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

/// Context columns of a report row that live outside [`TrialReport`].
#[derive(Debug, Clone)]
pub struct ReportContext {
    pub seed: u64,
    pub estimator: String,
    pub correction: String,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub rho_s: f64,
    pub rho_d: f64,
    pub rho_c: f64,
    pub n_pairs: usize,
}

impl ReportContext {
    pub fn from_parts(config: &TrainConfig, noise: &NoiseRates, n_pairs: usize) -> Self {
        ReportContext {
            seed: config.seed,
            estimator: config.risk.estimator.name().to_string(),
            correction: config.risk.correction.name().to_string(),
            gamma: config.risk.estimator.gamma(),
            lambda: config.risk.estimator.lambda(),
            rho_s: noise.rho_s,
            rho_d: noise.rho_d,
            rho_c: noise.rho_c,
            n_pairs,
        }
    }
}

pub const REPORT_CSV_HEADER: &str =
    "seed,estimator,correction,gamma,lambda,pi_plus,pi_hat,rho_s,rho_d,rho_c,n_pairs,accuracy,accuracy_last10,auc";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl TrialReport {
    /// One CSV row in the frozen column order of [`REPORT_CSV_HEADER`].
    pub fn to_csv_row(&self, ctx: &ReportContext) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            ctx.seed,
            ctx.estimator,
            ctx.correction,
            opt(ctx.gamma),
            opt(ctx.lambda),
            self.prior_used,
            opt(self.pi_hat),
            ctx.rho_s,
            ctx.rho_d,
            ctx.rho_c,
            ctx.n_pairs,
            opt(self.final_accuracy),
            opt(self.accuracy_last10),
            opt(self.final_auc),
        )
    }

    /// Flat `key=value` block, one field per line.
    pub fn to_kv(&self, ctx: &ReportContext) -> String {
        let mut s = String::new();
        s.push_str(&format!("seed={}\n", ctx.seed));
        s.push_str(&format!("estimator={}\n", ctx.estimator));
        s.push_str(&format!("correction={}\n", ctx.correction));
        s.push_str(&format!("gamma={}\n", opt(ctx.gamma)));
        s.push_str(&format!("lambda={}\n", opt(ctx.lambda)));
        s.push_str(&format!("pi_plus={}\n", self.prior_used));
        s.push_str(&format!("pi_hat={}\n", opt(self.pi_hat)));
        s.push_str(&format!("rho_s={}\n", ctx.rho_s));
        s.push_str(&format!("rho_d={}\n", ctx.rho_d));
        s.push_str(&format!("rho_c={}\n", ctx.rho_c));
        s.push_str(&format!("n_pairs={}\n", ctx.n_pairs));
        s.push_str(&format!("epochs={}\n", self.risk_trace.len()));
        s.push_str(&format!("final_risk={}\n", opt(self.final_risk())));
        s.push_str(&format!("accuracy={}\n", opt(self.final_accuracy)));
        s.push_str(&format!("accuracy_last10={}\n", opt(self.accuracy_last10)));
        s.push_str(&format!("auc={}\n", opt(self.final_auc)));
        s.push_str(&format!("wall_seconds={}\n", self.wall_seconds));
        s
    }
}
