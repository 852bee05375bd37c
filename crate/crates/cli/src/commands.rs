//! Subcommand implementations. Each writes its reports and the run manifest
//! into the output directory and prints a summary table.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use hdenc::analysis::{
    correlation_csv, curve_csv, ordering_csv, per_feature_csv, prediction_correlation, EvalOptions,
    Strategy,
};
use hdenc::dataset::{generate_synthetic, DatasetManifest, SynthSpec};
use hdenc::encoders::{cost_model, EncoderConfig, Scheme};
use hdenc::evaluation::{cross_validate, report_fields, StudyReport, SubjectReport, REPORT_COLUMNS};
use hdenc::learner::TrainConfig;
use hdenc::pipeline::{
    selection_cv, FeatureIndex, FittedModel, HdPipeline, HdSettings, SelectionSettings, SubjectFolds,
};
use hdenc::{FeatureTensor, NormParams};
use log::{info, warn};
use serde::Serialize;

use crate::config::{write_json, write_text, RunConfig, RunManifest};
use crate::error::CliError;
use crate::table::{f3, f6, svg_curves, Table};

pub fn read_synth_spec(path: &Path) -> Result<SynthSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::config_io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::usage(format!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

pub fn synth(m: &RunManifest, out: &Path) -> Result<(), CliError> {
    let manifest = generate_synthetic(&m.config.synth, out)?;
    m.write(out)?;
    let spec = &m.config.synth;
    let mut t = Table::new(["subject", "recordings", "seizure_files", "free_files"]);
    for s in &manifest.subjects {
        t.row([
            s.id.clone(),
            s.recordings.len().to_string(),
            spec.num_seizure_files.to_string(),
            spec.num_free_files.to_string(),
        ]);
    }
    print!("{}", t.render());
    println!("manifest: {}", out.join("manifest.json").display());
    Ok(())
}

pub fn features(m: &RunManifest, out: &Path) -> Result<(), CliError> {
    let cfg = &m.config;
    let path = cfg
        .dataset
        .as_ref()
        .ok_or_else(|| CliError::usage("features needs --dataset"))?;
    if !path.exists() {
        return Err(CliError::usage(format!("dataset manifest {} not found", path.display())));
    }
    let mut manifest = DatasetManifest::load(path)?;
    if !cfg.subjects.is_empty() {
        manifest.subjects.retain(|s| cfg.subjects.contains(&s.id));
    }
    for f in cfg.preprocess.attenuated_features() {
        warn!(
            "{f} lies above the {} Hz filter edge; the feature is extracted but mostly attenuated",
            cfg.preprocess.high_hz
        );
    }
    let index = FeatureIndex::build(&manifest, &cfg.preprocess, out)?;
    m.write(out)?;
    let mut t = Table::new(["subject", "folds", "windows", "seizure_windows", "features"]);
    for s in &index.subjects {
        t.row([
            s.id.clone(),
            s.folds.len().to_string(),
            s.folds.iter().map(|f| f.num_windows).sum::<usize>().to_string(),
            s.folds.iter().map(|f| f.seizure_windows).sum::<usize>().to_string(),
            index.feature_names.len().to_string(),
        ]);
    }
    print!("{}", t.render());
    Ok(())
}

fn open_features(cfg: &RunConfig) -> Result<(FeatureIndex, Vec<SubjectFolds>), CliError> {
    let path = cfg
        .features
        .as_ref()
        .ok_or_else(|| CliError::usage("needs --features (a directory written by `features`)"))?;
    if !path.exists() {
        return Err(CliError::usage(format!("feature directory {} not found", path.display())));
    }
    let index = FeatureIndex::load(path)?;
    let subjects = if cfg.subjects.is_empty() {
        index.subjects.clone()
    } else {
        cfg.subjects
            .iter()
            .map(|id| index.subject(id).cloned())
            .collect::<hdenc::Result<_>>()?
    };
    Ok((index, subjects))
}

/// Folds of every subject that has at least two seizures; others are
/// skipped with a warning.
fn cv_subjects(cfg: &RunConfig) -> Result<Vec<(String, Vec<FeatureTensor>)>, CliError> {
    let (index, subjects) = open_features(cfg)?;
    let mut out = Vec::new();
    for s in &subjects {
        if s.folds.len() < 2 {
            warn!("subject {} has {} seizure(s); leave-one-seizure-out needs 2, skipped", s.id, s.folds.len());
            continue;
        }
        out.push((s.id.clone(), index.load_folds(s)?));
    }
    if out.is_empty() {
        return Err(CliError::data("no subject has the two seizures cross-validation needs"));
    }
    Ok(out)
}

#[derive(Serialize)]
struct ModelSidecar<'a> {
    feature_names: &'a [String],
    encoder: &'a EncoderConfig,
    output_dim: usize,
    train: &'a TrainConfig,
    norm: &'a NormParams,
    models_file: String,
}

pub fn train(m: &RunManifest, out: &Path) -> Result<(), CliError> {
    let cfg = &m.config;
    let (index, subjects) = open_features(cfg)?;
    let mut t = Table::new(["subject", "windows", "seizure_windows", "output_dim", "memory_bits"]);
    for s in &subjects {
        let folds = index.load_folds(s)?;
        let refs: Vec<&FeatureTensor> = folds.iter().collect();
        info!("training subject {}", s.id);
        let fitted = FittedModel::fit(&refs, &cfg.hd)?;
        let models_file = format!("{}.hdmd", s.id);
        let models_path = out.join("models").join(&models_file);
        fs::create_dir_all(out.join("models")).map_err(|e| CliError::io(out, e))?;
        let file = File::create(&models_path).map_err(|e| CliError::io(&models_path, e))?;
        fitted
            .models
            .write_to(BufWriter::new(file))
            .map_err(|e| CliError::io(&models_path, e))?;
        let enc = fitted.encoder.config();
        write_json(
            &out.join("models").join(format!("{}.json", s.id)),
            &ModelSidecar {
                feature_names: &index.feature_names,
                encoder: enc,
                output_dim: enc.output_dim(),
                train: &cfg.hd.train,
                norm: &fitted.norm,
                models_file,
            },
        )?;
        t.row([
            s.id.clone(),
            folds.iter().map(|f| f.num_windows()).sum::<usize>().to_string(),
            folds
                .iter()
                .map(|f| f.labels().iter().filter(|&&l| l == 1).count())
                .sum::<usize>()
                .to_string(),
            enc.output_dim().to_string(),
            fitted.encoder.memories().memory_bits().to_string(),
        ]);
    }
    write_text(&out.join("train_summary.csv"), &t.to_csv())?;
    m.write(out)?;
    print!("{}", t.render());
    Ok(())
}

fn study(cfg: &RunConfig, hd: &HdSettings, subjects: &[(String, Vec<FeatureTensor>)]) -> Result<StudyReport, CliError> {
    let pipeline = HdPipeline { settings: hd.clone() };
    let reports = subjects
        .iter()
        .map(|(id, folds)| {
            info!("cross-validating subject {id} with {}", hd.scheme);
            Ok(SubjectReport {
                subject: id.clone(),
                cv: cross_validate(folds, &pipeline, cfg.postprocess_window_s)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(StudyReport::new(reports)?)
}

pub fn eval(m: &RunManifest, out: &Path) -> Result<(), CliError> {
    let cfg = &m.config;
    let subjects = cv_subjects(cfg)?;
    let report = study(cfg, &cfg.hd, &subjects)?;
    write_text(&out.join("eval.csv"), &report.to_csv()?)?;
    write_json(&out.join("eval.json"), &report)?;
    m.write(out)?;

    let mut t = Table::new(["subject", "folds", "f1e", "f1d", "f1de_raw", "f1de"]);
    let mut add = |name: &str, folds: String, raw: &hdenc::evaluation::EvalReport, post: &hdenc::evaluation::EvalReport| {
        t.row([name.to_string(), folds, f3(post.episode.f1), f3(post.duration.f1), f3(raw.f1de_gmean), f3(post.f1de_gmean)]);
    };
    for s in &report.subjects {
        add(&s.subject, s.cv.folds.len().to_string(), &s.cv.mean_raw, &s.cv.mean_postprocessed);
    }
    add("mean", String::new(), &report.mean_raw, &report.mean_postprocessed);
    println!("scheme {}, D = {}, {} bins", cfg.hd.scheme, cfg.hd.dim, cfg.hd.num_bins);
    print!("{}", t.render());
    Ok(())
}

#[derive(Serialize)]
struct SelectRow {
    subject: String,
    fold: usize,
    strategy: Strategy,
    chosen_n: usize,
    chosen_features: Vec<String>,
    train_metric: f64,
    test_f1e: f64,
    test_f1d: f64,
    test_f1de: f64,
    all_features_test_f1de: f64,
}

pub fn select(m: &RunManifest, out: &Path, svg: bool) -> Result<(), CliError> {
    let cfg = &m.config;
    let subjects = cv_subjects(cfg)?;
    let settings = SelectionSettings {
        hd: HdSettings {
            scheme: Scheme::FeatAppend,
            ..cfg.hd.clone()
        },
        metric: cfg.metric,
        strategies: cfg.strategy.map_or(Strategy::ALL.to_vec(), |s| vec![s]),
        eval: EvalOptions {
            postprocess_window_s: Some(cfg.postprocess_window_s),
        },
    };
    if cfg.hd.scheme != Scheme::FeatAppend {
        info!("feature selection always encodes with feat-append");
    }
    let mut rows = Vec::new();
    for (id, folds) in &subjects {
        info!("selecting features for subject {id}");
        for sel in selection_cv(folds, &settings)? {
            let dir = out.join(id).join(format!("fold_{:02}", sel.fold));
            let names = &sel.feature_names;
            write_text(&dir.join("per_feature.csv"), &per_feature_csv(&sel.per_feature, Some(&sel.js_divergence))?)?;
            let preds: Vec<Vec<u8>> = sel.per_feature.iter().map(|p| p.predictions.clone()).collect();
            write_text(&dir.join("correlation.csv"), &correlation_csv(&prediction_correlation(&preds)?, names)?)?;
            let mut curves: Vec<(String, Vec<f64>)> = Vec::new();
            for r in &sel.results {
                let s = r.strategy.cli_name();
                write_text(&dir.join(format!("ordering_{s}.csv")), &ordering_csv(r, names)?)?;
                write_text(&dir.join(format!("curve_{s}.csv")), &curve_csv(r)?)?;
                curves.push((format!("{s} train"), r.perf_curve_train.iter().map(|x| cfg.metric.of(x)).collect()));
                curves.push((format!("{s} test"), r.perf_curve_test.iter().map(|x| cfg.metric.of(x)).collect()));
                let test = r.chosen_test().expect("test curve evaluated");
                rows.push(SelectRow {
                    subject: id.clone(),
                    fold: sel.fold,
                    strategy: r.strategy,
                    chosen_n: r.chosen_n,
                    chosen_features: r.chosen_features.iter().map(|&f| names[f].clone()).collect(),
                    train_metric: cfg.metric.of(r.chosen_train()),
                    test_f1e: test.episode.f1,
                    test_f1d: test.duration.f1,
                    test_f1de: test.f1de_gmean,
                    all_features_test_f1de: sel.all_features_test.f1de_gmean,
                });
            }
            if svg {
                let series: Vec<(&str, &[f64])> = curves.iter().map(|(n, v)| (n.as_str(), v.as_slice())).collect();
                let title = format!("{id} fold {} ({})", sel.fold, cfg.metric);
                write_text(&dir.join("curves.svg"), &svg_curves(&title, &series))?;
            }
        }
    }

    let mut full = Table::new([
        "subject", "fold", "strategy", "chosen_n", "chosen_features", "train_metric", "test_f1e", "test_f1d",
        "test_f1de", "all_features_test_f1de",
    ]);
    for r in &rows {
        full.row([
            r.subject.clone(),
            r.fold.to_string(),
            r.strategy.cli_name().to_string(),
            r.chosen_n.to_string(),
            r.chosen_features.join(";"),
            f6(r.train_metric),
            f6(r.test_f1e),
            f6(r.test_f1d),
            f6(r.test_f1de),
            f6(r.all_features_test_f1de),
        ]);
    }
    write_text(&out.join("select_summary.csv"), &full.to_csv())?;
    write_json(&out.join("select.json"), &rows)?;
    m.write(out)?;

    let mut t = Table::new(["subject", "strategy", "mean_chosen_n", "test_f1de", "all_features_f1de"]);
    for (id, _) in &subjects {
        for &s in &settings.strategies {
            let sub: Vec<&SelectRow> = rows.iter().filter(|r| &r.subject == id && r.strategy == s).collect();
            let k = sub.len() as f64;
            t.row([
                id.clone(),
                s.cli_name().to_string(),
                format!("{:.1}", sub.iter().map(|r| r.chosen_n as f64).sum::<f64>() / k),
                f3(sub.iter().map(|r| r.test_f1de).sum::<f64>() / k),
                f3(sub.iter().map(|r| r.all_features_test_f1de).sum::<f64>() / k),
            ]);
        }
    }
    println!("metric {}, D = {}", cfg.metric, cfg.hd.dim);
    print!("{}", t.render());
    Ok(())
}

pub fn compare(m: &RunManifest, out: &Path) -> Result<(), CliError> {
    let cfg = &m.config;
    if cfg.compare_seeds == 0 {
        return Err(CliError::usage("compare needs at least one seed"));
    }
    let subjects = cv_subjects(cfg)?;
    let (nf, nc) = (subjects[0].1[0].num_features(), subjects[0].1[0].num_channels());
    let mut header: Vec<String> = vec!["scheme".into(), "seed".into()];
    header.extend(REPORT_COLUMNS.iter().map(|s| s.to_string()));
    let mut detail = Table::new(header);
    let mut summary = Table::new(["scheme", "output_dim", "memory_bits", "f1e", "f1d", "f1de_mean", "f1de_std"]);
    for scheme in Scheme::ALL {
        let mut scores = Vec::new();
        let mut f1e = 0.0;
        let mut f1d = 0.0;
        for k in 0..cfg.compare_seeds {
            let seed = cfg.hd.seed + k as u64;
            let hd = HdSettings {
                scheme,
                seed,
                train: TrainConfig {
                    seed,
                    ..cfg.hd.train.clone()
                },
                ..cfg.hd.clone()
            };
            let report = study(cfg, &hd, &subjects)?;
            for s in &report.subjects {
                for (variant, r) in [("raw", &s.cv.mean_raw), ("postprocessed", &s.cv.mean_postprocessed)] {
                    let mut row = vec![scheme.cli_name().to_string(), seed.to_string(), s.subject.clone()];
                    row.extend(["mean".to_string(), variant.to_string()]);
                    row.extend(report_fields(r));
                    detail.row(row);
                }
            }
            let p = &report.mean_postprocessed;
            scores.push(p.f1de_gmean);
            f1e += p.episode.f1;
            f1d += p.duration.f1;
        }
        let n = scores.len() as f64;
        let mean = scores.iter().sum::<f64>() / n;
        let std = (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n).sqrt();
        let ecfg = cfg_for(scheme, &cfg.hd, nf, nc);
        summary.row([
            scheme.cli_name().to_string(),
            ecfg.output_dim().to_string(),
            cost_model(&ecfg)?.memory_bits.to_string(),
            f3(f1e / n),
            f3(f1d / n),
            f3(mean),
            f3(std),
        ]);
    }
    write_text(&out.join("compare.csv"), &detail.to_csv())?;
    write_text(&out.join("compare_summary.csv"), &summary.to_csv())?;
    m.write(out)?;
    println!(
        "D = {}, {} seed(s), {} mode, postprocessed means over subjects",
        cfg.hd.dim,
        cfg.compare_seeds,
        cfg.hd.train.mode.cli_name()
    );
    print!("{}", summary.render());
    Ok(())
}

fn cfg_for(scheme: Scheme, hd: &HdSettings, nf: usize, nc: usize) -> EncoderConfig {
    HdSettings {
        scheme,
        ..hd.clone()
    }
    .encoder_config(nf, nc)
}

pub fn cost(m: &RunManifest, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = &m.config;
    let (nf, nc) = (cfg.cost.num_feat, cfg.cost.num_ch);
    let mut t = Table::new([
        "scheme", "vector_dim", "memory_bits", "bind_ops", "bundle_ops", "threshold_ops", "bit_ops",
    ]);
    let mut reports = Vec::new();
    for scheme in Scheme::ALL {
        let ecfg = cfg_for(scheme, &cfg.hd, nf, nc);
        let r = cost_model(&ecfg)?;
        t.row([
            scheme.cli_name().to_string(),
            r.op_dim.to_string(),
            r.memory_bits.to_string(),
            r.bind_ops.to_string(),
            r.bundle_ops.to_string(),
            r.threshold_ops.to_string(),
            r.bit_ops.to_string(),
        ]);
        reports.push(r);
    }
    let mut order = reports.clone();
    order.sort_by_key(|r| r.memory_bits);
    println!(
        "{nf} features, {nc} channels, {} bins, D = {}",
        cfg.hd.num_bins, cfg.hd.dim
    );
    print!("{}", t.render());
    println!(
        "memory: {}",
        order.iter().map(|r| r.scheme.cli_name()).collect::<Vec<_>>().join(" <= ")
    );
    if let Some(out) = out {
        write_text(&out.join("cost.csv"), &t.to_csv())?;
        write_json(&out.join("cost.json"), &reports)?;
        m.write(out)?;
    }
    Ok(())
}
