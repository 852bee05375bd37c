//! `hdenc`: synthetic data, feature extraction, HD training, evaluation,
//! feature selection, scheme comparison and cost tables.

mod commands;
mod config;
mod error;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hdenc::analysis::Strategy;
use hdenc::encoders::{LevelTables, Scheme};
use hdenc::evaluation::Metric;
use hdenc::learner::TrainMode;

use crate::config::ConfigBuilder;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "hdenc", version, about = "Hyperdimensional encoding and seizure detection pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON run configuration, or a run-manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct HdArgs {
    /// Feature directory written by `features`.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Restrict to these subject ids (repeatable).
    #[arg(long = "subject")]
    subjects: Vec<String>,
    /// Hypervector dimension D.
    #[arg(long)]
    dim: Option<usize>,
    /// Quantization levels per feature.
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long, value_parser = parse::<Scheme>)]
    scheme: Option<Scheme>,
    #[arg(long, value_parser = parse::<TrainMode>)]
    mode: Option<TrainMode>,
    /// OnlineHD learning rate.
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Seed of the encoder memories and class tie-break vectors.
    #[arg(long)]
    seed: Option<u64>,
    /// One level table per feature instead of a shared one.
    #[arg(long)]
    per_feature_levels: bool,
    /// Majority-vote smoothing window in seconds.
    #[arg(long)]
    postprocess_window: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset with planted seizure effects.
    Synth {
        /// Synthetic dataset spec (JSON); defaults are used for missing keys.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        subjects: Option<usize>,
        /// Permit a spec without seizure effects.
        #[arg(long)]
        allow_null: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Filter, cut fold files and extract per-window feature tensors.
    Features {
        /// Dataset manifest (manifest.json).
        #[arg(long, alias = "manifest")]
        dataset: Option<PathBuf>,
        #[arg(long)]
        window: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Non-seizure to seizure duration ratio per fold file.
        #[arg(long)]
        ratio: Option<f64>,
        /// Seed of the non-seizure data selection.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Train class models on every fold of each subject and save them.
    Train {
        #[command(flatten)]
        hd: HdArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Leave-one-seizure-out cross-validation.
    Eval {
        #[command(flatten)]
        hd: HdArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Per-feature analysis and feature selection on appended encodings.
    Select {
        #[command(flatten)]
        hd: HdArgs,
        #[arg(long, value_parser = parse::<Strategy>)]
        strategy: Option<Strategy>,
        #[arg(long, value_parser = parse::<Metric>)]
        metric: Option<Metric>,
        /// Also draw the performance curves as SVG.
        #[arg(long)]
        svg: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Cross-validate every encoding scheme over several encoder seeds.
    Compare {
        #[command(flatten)]
        hd: HdArgs,
        /// Encoder seeds per scheme.
        #[arg(long)]
        seeds: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Memory and operation counts of every encoding scheme.
    Cost {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        num_feat: Option<usize>,
        #[arg(long)]
        num_ch: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

fn parse<T: std::str::FromStr<Err = hdenc::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: hdenc::Error| e.to_string())
}

fn apply_hd(b: &mut ConfigBuilder, hd: HdArgs) {
    b.set("/features", hd.features)
        .set("/subjects", (!hd.subjects.is_empty()).then_some(hd.subjects))
        .set("/hd/dim", hd.dim)
        .set("/hd/num_bins", hd.bins)
        .set("/hd/scheme", hd.scheme)
        .set("/hd/train/mode", hd.mode)
        .set("/hd/train/learning_rate", hd.lr)
        .set("/hd/train/epochs", hd.epochs)
        .set("/hd/seed", hd.seed)
        .set("/hd/train/seed", hd.seed)
        .set("/hd/level_tables", hd.per_feature_levels.then_some(LevelTables::PerFeature))
        .set("/postprocess_window_s", hd.postprocess_window);
}

fn builder(common: &Common) -> Result<ConfigBuilder, CliError> {
    let mut b = ConfigBuilder::new(common.config.as_deref())?;
    b.set("/jobs", common.jobs);
    Ok(b)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, common, manifest) = match cli.command {
        Command::Synth {
            spec,
            seed,
            subjects,
            allow_null,
            common,
        } => {
            let mut b = builder(&common)?;
            if let Some(path) = spec {
                b.set("/synth", Some(commands::read_synth_spec(&path)?));
            }
            b.set("/synth/seed", seed)
                .set("/synth/num_subjects", subjects)
                .set("/synth/allow_null", allow_null.then_some(true));
            ("synth", common, b)
        }
        Command::Features {
            dataset,
            window,
            step,
            ratio,
            seed,
            common,
        } => {
            let mut b = builder(&common)?;
            b.set("/dataset", dataset)
                .set("/preprocess/window_s", window)
                .set("/preprocess/step_s", step)
                .set("/preprocess/ratio", ratio)
                .set("/preprocess/selection_seed", seed);
            ("features", common, b)
        }
        Command::Train { hd, common } => {
            let mut b = builder(&common)?;
            apply_hd(&mut b, hd);
            ("train", common, b)
        }
        Command::Eval { hd, common } => {
            let mut b = builder(&common)?;
            apply_hd(&mut b, hd);
            ("eval", common, b)
        }
        Command::Select {
            hd,
            strategy,
            metric,
            svg,
            common,
        } => {
            let mut b = builder(&common)?;
            apply_hd(&mut b, hd);
            b.set("/strategy", strategy).set("/metric", metric);
            let m = b.finish("select")?;
            init_pool(m.config.jobs)?;
            let out = require_out(&common, "select")?;
            return commands::select(&m, &out, svg);
        }
        Command::Compare { hd, seeds, common } => {
            let mut b = builder(&common)?;
            apply_hd(&mut b, hd);
            b.set("/compare_seeds", seeds);
            ("compare", common, b)
        }
        Command::Cost {
            dim,
            bins,
            num_feat,
            num_ch,
            common,
        } => {
            let mut b = builder(&common)?;
            b.set("/hd/dim", dim)
                .set("/hd/num_bins", bins)
                .set("/cost/num_feat", num_feat)
                .set("/cost/num_ch", num_ch);
            let m = b.finish("cost")?;
            return commands::cost(&m, common.out.as_deref());
        }
    };
    let m = manifest.finish(name)?;
    init_pool(m.config.jobs)?;
    let out = require_out(&common, name)?;
    match name {
        "synth" => commands::synth(&m, &out),
        "features" => commands::features(&m, &out),
        "train" => commands::train(&m, &out),
        "eval" => commands::eval(&m, &out),
        "compare" => commands::compare(&m, &out),
        _ => unreachable!("all commands dispatched"),
    }
}

fn require_out(common: &Common, name: &str) -> Result<PathBuf, CliError> {
    common
        .out
        .clone()
        .ok_or_else(|| CliError::usage(format!("{name} needs --out")))
}

fn init_pool(jobs: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::usage("--jobs must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
