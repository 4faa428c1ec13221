//! Command-line driver: generate synthetic pair datasets, train scorers
//! with any of the pairwise risk estimators, evaluate saved models, and run
//! sweeps over a parameter grid.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime or data error. Errors go
//! to stderr only.

mod formats;
mod grid;

use clap::{Args, Parser, Subcommand};
use pairlearn::datagen::{generate_sd_pcomp_dataset, sample_labeled, GaussianMixtureSpec, PriorSide};
use pairlearn::model::{Architecture, Scorer};
use pairlearn::rng::derive_seed;
use pairlearn::train::{
    accuracy_over_snapshots, run_trial, train_with_ordinary, PriorSource, ReportContext,
    TrainConfig, TrialData, TrialReport, TrialSpec, REPORT_CSV_HEADER,
};
use pairlearn::{
    validate_pair_dataset, ClassPrior, Correction, EstimatorKind, Error, Loss, NoiseRates,
    RiskSpec,
};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "pairlearn",
    version,
    about = "Binary classification from similar/dissimilar and preference-ordered pairs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic pair dataset and test set
    Generate(GenerateArgs),
    /// Train a scorer on a pair CSV
    Train(TrainArgs),
    /// Evaluate a saved model on a test CSV
    Eval(EvalArgs),
    /// Run a grid of trials and collect one CSV row per cell
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Positive-class prior in (0, 1)
    #[arg(long)]
    pi_plus: f64,
    #[arg(long)]
    n_pairs: usize,
    #[arg(long)]
    n_test: usize,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Distance between the class means
    #[arg(long, default_value_t = 2.0)]
    mean_gap: f64,
    #[arg(long, default_value_t = 0.7)]
    sigma: f64,
    /// Similar-observed-as-dissimilar flip rate
    #[arg(long, default_value_t = 0.0)]
    rho_s: f64,
    /// Dissimilar-observed-as-similar flip rate
    #[arg(long, default_value_t = 0.0)]
    rho_d: f64,
    /// Pair-order reversal rate
    #[arg(long, default_value_t = 0.0)]
    rho_c: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Pair CSV produced by `generate`
    #[arg(long)]
    pairs: PathBuf,
    /// One of sd | pc | convex | sdpc | combined
    #[arg(long)]
    estimator: String,
    /// One of id | relu | abs (honored by the sdpc estimator)
    #[arg(long, default_value = "id")]
    correction: String,
    /// Mixing weight of the convex estimator
    #[arg(long)]
    gamma: Option<f64>,
    /// Pair-vs-ordinary weight of the combined estimator
    #[arg(long)]
    lambda: Option<f64>,
    /// Known class prior (conflicts with --estimate-prior)
    #[arg(long, conflicts_with = "estimate_prior")]
    pi_plus: Option<f64>,
    /// Estimate the prior from pair counts; value is the side of 0.5 the
    /// prior lies on: ge | lt
    #[arg(long)]
    estimate_prior: Option<String>,
    /// Ordinarily labeled CSV (test-file format) for the combined estimator
    #[arg(long)]
    ordinary: Option<PathBuf>,
    /// linear | mlp:w1,w2,...
    #[arg(long, default_value = "linear")]
    arch: String,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 256)]
    batch: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 1e-5)]
    wd: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional test CSV; fills the accuracy/AUC report fields
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long)]
    out_model: PathBuf,
    #[arg(long)]
    out_report: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Append one report CSV row to this file
    #[arg(long)]
    append: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Grid description (TOML)
    #[arg(long)]
    grid: PathBuf,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

type CliResult<T> = Result<T, Failure>;

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn runtime(msg: impl Into<String>) -> Failure {
    Failure::Runtime(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

// ---------------------------------------------------------------------------
// Shared parsing
// ---------------------------------------------------------------------------

fn parse_estimator(
    name: &str,
    gamma: Option<f64>,
    lambda: Option<f64>,
) -> Result<EstimatorKind, String> {
    let kind = match name {
        "sd" => EstimatorKind::Sd,
        "pc" => EstimatorKind::Pc,
        "convex" => EstimatorKind::Convex(gamma.ok_or("--gamma is required for convex")?),
        "sdpc" => EstimatorKind::Sdpc,
        "combined" => EstimatorKind::Combined(lambda.ok_or("--lambda is required for combined")?),
        other => return Err(format!("unknown estimator `{other}`")),
    };
    if gamma.is_some() && !matches!(kind, EstimatorKind::Convex(_)) {
        return Err("--gamma only applies to the convex estimator".into());
    }
    if lambda.is_some() && !matches!(kind, EstimatorKind::Combined(_)) {
        return Err("--lambda only applies to the combined estimator".into());
    }
    Ok(kind)
}

fn parse_correction(name: &str) -> Result<Correction, String> {
    match name {
        "id" => Ok(Correction::Identity),
        "relu" => Ok(Correction::Relu),
        "abs" => Ok(Correction::Abs),
        other => Err(format!("unknown correction `{other}` (use id | relu | abs)")),
    }
}

fn parse_arch(text: &str) -> Result<Architecture, String> {
    if text == "linear" {
        return Ok(Architecture::Linear);
    }
    if let Some(widths) = text.strip_prefix("mlp:") {
        let parsed: Result<Vec<usize>, _> = widths.split(',').map(|w| w.trim().parse()).collect();
        let widths = parsed.map_err(|_| format!("bad mlp widths in `{text}`"))?;
        if widths.is_empty() || widths.contains(&0) {
            return Err("mlp widths must be positive".into());
        }
        return Ok(Architecture::Mlp(widths));
    }
    Err(format!("unknown architecture `{text}` (use linear | mlp:w1,w2,...)"))
}

fn parse_side(text: &str) -> Result<PriorSide, String> {
    match text {
        "ge" => Ok(PriorSide::GeHalf),
        "lt" => Ok(PriorSide::LtHalf),
        other => Err(format!("prior side must be ge or lt, got `{other}`")),
    }
}

fn quote_csv(text: &str) -> String {
    format!("\"{}\"", text.replace('"', "\"\""))
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

fn cmd_generate(args: GenerateArgs) -> CliResult<()> {
    let prior = ClassPrior::new(args.pi_plus).map_err(|e| usage(e.to_string()))?;
    let rates =
        NoiseRates::new(args.rho_s, args.rho_d, args.rho_c).map_err(|e| usage(e.to_string()))?;
    if args.n_pairs == 0 {
        return Err(usage("--n-pairs must be positive"));
    }
    if args.n_test == 0 {
        return Err(usage("--n-test must be positive"));
    }
    let spec = GaussianMixtureSpec::axis_aligned(args.dim, args.mean_gap, args.sigma, prior)
        .map_err(|e| usage(e.to_string()))?;
    if rates.sd_rates_overlap() {
        eprintln!("warning: rho_s + rho_d >= 1 leaves no majority of intact SD labels");
    }

    let pairs = generate_sd_pcomp_dataset(&spec, args.n_pairs, &rates, derive_seed(args.seed, 10))?;
    let test = sample_labeled(&spec, args.n_test, derive_seed(args.seed, 11));

    fs::create_dir_all(&args.out_dir)
        .map_err(|e| runtime(format!("cannot create {}: {e}", args.out_dir.display())))?;
    formats::write_pairs_csv(&args.out_dir.join("pairs.csv"), &pairs).map_err(runtime)?;
    formats::write_test_csv(&args.out_dir.join("test.csv"), &test).map_err(runtime)?;

    let counts = validate_pair_dataset(&pairs)?;
    println!(
        "n_similar={} n_dissimilar={} similar_fraction={:.4}",
        counts.n_similar,
        counts.n_dissimilar,
        counts.n_similar as f64 / pairs.len() as f64
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

fn cmd_train(args: TrainArgs) -> CliResult<()> {
    let estimator =
        parse_estimator(&args.estimator, args.gamma, args.lambda).map_err(usage)?;
    let correction = parse_correction(&args.correction).map_err(usage)?;
    let arch = parse_arch(&args.arch).map_err(usage)?;
    let prior_source = match (args.pi_plus, &args.estimate_prior) {
        (Some(v), None) => PriorSource::Known(v),
        (None, Some(side)) => PriorSource::Estimated(parse_side(side).map_err(usage)?),
        (None, None) => return Err(usage("one of --pi-plus or --estimate-prior is required")),
        (Some(_), Some(_)) => unreachable!("clap conflict"),
    };
    if args.epochs == 0 {
        return Err(usage("--epochs must be positive"));
    }
    if args.batch == 0 {
        return Err(usage("--batch must be positive"));
    }
    let spec = RiskSpec::new(estimator, correction, Loss::Logistic);
    spec.validate().map_err(|e| usage(e.to_string()))?;

    let pairs = formats::read_pairs_csv(&args.pairs).map_err(runtime)?;
    let counts = validate_pair_dataset(&pairs)?;
    let ordinary = match &args.ordinary {
        Some(path) => formats::read_test_csv(path).map_err(runtime)?,
        None => Vec::new(),
    };

    let mut config = TrainConfig::new(spec, prior_source, args.seed);
    config.epochs = args.epochs;
    config.batch_size = args.batch;
    config.learning_rate = args.lr;
    config.weight_decay = args.wd;

    let scorer_init = Scorer::new(arch.clone(), counts.dim, derive_seed(args.seed, 13))?;
    let out = train_with_ordinary(&pairs, &ordinary, &config, &scorer_init)?;

    let (final_accuracy, accuracy_last10, final_auc) = match &args.test {
        Some(path) => {
            let test = formats::read_test_csv(path).map_err(runtime)?;
            let acc = pairlearn::metrics::accuracy(&out.scorer, &test)?;
            let acc10 = accuracy_over_snapshots(&arch, counts.dim, &out.last_epoch_params, &test)?;
            let auc = match pairlearn::metrics::auc(&out.scorer, &test) {
                Ok(v) => Some(v),
                Err(Error::SingleClassTest) => None,
                Err(e) => return Err(e.into()),
            };
            (Some(acc), Some(acc10), auc)
        }
        None => (None, None, None),
    };

    let report = TrialReport {
        final_accuracy,
        accuracy_last10,
        final_auc,
        risk_trace: out.risk_trace.clone(),
        pi_hat: out.prior_estimate.map(|e| e.pi_plus),
        prior_used: out.prior_used.pi_plus(),
        wall_seconds: 0.0,
    };
    let ctx = ReportContext::from_parts(&config, &NoiseRates::NONE, pairs.len());

    fs::write(&args.out_model, out.scorer.to_text())
        .map_err(|e| runtime(format!("cannot write {}: {e}", args.out_model.display())))?;
    fs::write(&args.out_report, report.to_kv(&ctx))
        .map_err(|e| runtime(format!("cannot write {}: {e}", args.out_report.display())))?;
    println!(
        "trained estimator={} final_risk={}",
        ctx.estimator,
        out.final_risk()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    let model_text = fs::read_to_string(&args.model)
        .map_err(|e| runtime(format!("cannot read {}: {e}", args.model.display())))?;
    let scorer = Scorer::from_text(&model_text)?;
    let test = formats::read_test_csv(&args.test).map_err(runtime)?;

    let acc = pairlearn::metrics::accuracy(&scorer, &test)?;
    let auc = match pairlearn::metrics::auc(&scorer, &test) {
        Ok(v) => Some(v),
        Err(Error::SingleClassTest) => None,
        Err(e) => return Err(e.into()),
    };
    println!("accuracy {acc:.3}");
    match auc {
        Some(v) => println!("auc {v:.3}"),
        None => println!("auc n/a"),
    }

    if let Some(path) = &args.append {
        // context columns of the training run are unknown here
        let mut fields = vec![String::new(); 14];
        fields[11] = acc.to_string();
        fields[13] = auc.map(|v| v.to_string()).unwrap_or_default();
        append_csv_row(path, REPORT_CSV_HEADER, &fields.join(",")).map_err(runtime)?;
    }
    Ok(())
}

fn append_csv_row(path: &Path, header: &str, row: &str) -> Result<(), String> {
    let needs_header = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut content = String::new();
    if needs_header {
        content.push_str(header);
        content.push('\n');
    }
    content.push_str(row);
    content.push('\n');
    use std::io::Write;
    let mut file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| format!("cannot open {}: {e}", path.display()))?;
    file.write_all(content.as_bytes())
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn cmd_sweep(args: SweepArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.grid)
        .map_err(|e| runtime(format!("cannot read {}: {e}", args.grid.display())))?;
    let grid = grid::parse_grid(&text).map_err(runtime)?;
    for (name, empty) in [
        ("estimators", grid.estimators.is_empty()),
        ("corrections", grid.corrections.is_empty()),
        ("priors", grid.priors.is_empty()),
        ("noise", grid.noise.is_empty()),
        ("seeds", grid.seeds.is_empty()),
    ] {
        if empty {
            return Err(runtime(format!("grid axis `{name}` is empty")));
        }
    }
    let arch = parse_arch(&grid.arch).map_err(runtime)?;

    let header = format!("{REPORT_CSV_HEADER},wall_seconds,error");
    let mut rows = vec![header];
    let mut failures = 0usize;

    for estimator_name in &grid.estimators {
        for correction_name in &grid.corrections {
            for &pi in &grid.priors {
                for noise in &grid.noise {
                    for &seed in &grid.seeds {
                        let row = sweep_cell(
                            &grid,
                            &arch,
                            estimator_name,
                            correction_name,
                            pi,
                            noise,
                            seed,
                        );
                        let row = match row {
                            Ok(r) => r,
                            Err(msg) => {
                                failures += 1;
                                let gamma = grid.gamma.map(|g| g.to_string()).unwrap_or_default();
                                let lambda =
                                    grid.lambda.map(|l| l.to_string()).unwrap_or_default();
                                format!(
                                    "{seed},{estimator_name},{correction_name},{gamma},{lambda},{pi},,{},{},{},{},,,,,{}",
                                    noise[0], noise[1], noise[2], grid.n_pairs, quote_csv(&msg)
                                )
                            }
                        };
                        rows.push(row);
                    }
                }
            }
        }
    }

    let mut body = rows.join("\n");
    body.push('\n');
    fs::write(&args.out, body)
        .map_err(|e| runtime(format!("cannot write {}: {e}", args.out.display())))?;
    println!(
        "wrote {} rows to {} ({} failed cells)",
        rows.len() - 1,
        args.out.display(),
        failures
    );
    Ok(())
}

fn sweep_cell(
    grid: &grid::GridFile,
    arch: &Architecture,
    estimator_name: &str,
    correction_name: &str,
    pi: f64,
    noise: &[f64; 3],
    seed: u64,
) -> Result<String, String> {
    let estimator = parse_estimator(estimator_name, grid.gamma, grid.lambda)?;
    let correction = parse_correction(correction_name)?;
    let spec = RiskSpec::new(estimator, correction, Loss::Logistic);
    spec.validate().map_err(|e| e.to_string())?;
    let prior = ClassPrior::new(pi).map_err(|e| e.to_string())?;
    let rates = NoiseRates::new(noise[0], noise[1], noise[2]).map_err(|e| e.to_string())?;
    let mixture = GaussianMixtureSpec::axis_aligned(grid.dim, grid.mean_gap, grid.sigma, prior)
        .map_err(|e| e.to_string())?;
    let prior_source = match &grid.estimate_prior {
        Some(side) => PriorSource::Estimated(parse_side(side)?),
        None => PriorSource::Known(pi),
    };

    let mut config = TrainConfig::new(spec, prior_source, seed);
    config.epochs = grid.epochs;
    config.batch_size = grid.batch;
    config.learning_rate = grid.lr;
    config.weight_decay = grid.weight_decay;

    let trial = TrialSpec {
        data: TrialData::Synthetic {
            spec: mixture,
            n_pairs: grid.n_pairs,
            n_test: grid.n_test,
            n_ordinary: grid.n_ordinary,
        },
        noise: rates,
        arch: arch.clone(),
        config: config.clone(),
    };
    let report = run_trial(&trial).map_err(|e| e.to_string())?;
    let ctx = ReportContext::from_parts(&config, &rates, grid.n_pairs);
    Ok(format!(
        "{},{},",
        report.to_csv_row(&ctx),
        report.wall_seconds
    ))
}
