//! Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Runs without the libtest harness so the lines stay in order.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hdenc::analysis::Strategy;
use hdenc::dataset::{synthesize_subject, PlantedFeatures, SynthSpec};
use hdenc::encoders::{cost_model, EncoderConfig, Scheme};
use hdenc::evaluation::{cross_validate, DEFAULT_POSTPROCESS_WINDOW_S};
use hdenc::pipeline::{prepare_subject, selection_cv, HdPipeline, HdSettings, PreprocessConfig, SelectionSettings};
use hdenc::FeatureTensor;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

const MIN: u64 = 60;

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "cost model exactness", budget: Duration::from_secs(1), run: c1_cost },
        Criterion { id: 2, name: "kernel oracle equivalence", budget: Duration::from_secs(30), run: c2_kernels },
        Criterion { id: 3, name: "algebraic invariants", budget: Duration::from_secs(2 * MIN), run: c3_invariants },
        Criterion { id: 4, name: "certainty normalization", budget: Duration::from_secs(10), run: c4_certainty },
        Criterion { id: 5, name: "channel-aware schemes beat feat-x-val", budget: Duration::from_secs(20 * MIN), run: c5_schemes },
        Criterion { id: 6, name: "feature selection", budget: Duration::from_secs(30 * MIN), run: c6_selection },
        Criterion { id: 7, name: "label metric hand oracles", budget: Duration::from_secs(1), run: c7_labels },
        Criterion { id: 8, name: "run determinism", budget: Duration::from_secs(10 * MIN), run: c8_determinism },
        Criterion { id: 9, name: "learnability floor", budget: Duration::from_secs(20 * MIN), run: c9_floor },
    ];
    let only: Vec<u32> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failed = 0;
    for c in &criteria {
        if !only.is_empty() && !only.contains(&c.id) {
            continue;
        }
        let t = Instant::now();
        let outcome = (c.run)();
        let took = t.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > c.budget => Err(format!("{msg}; took {took:.1?}, budget {:?}", c.budget)),
            o => o,
        };
        match outcome {
            Ok(msg) => println!("criterion {}: PASS {} ({msg}) [{took:.1?}]", c.id, c.name),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL {} ({msg}) [{took:.1?}]", c.id, c.name);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c1_cost() -> Outcome {
    let expect = [
        (Scheme::FeatxVal, 741_000),
        (Scheme::ChFeatCombxVal, 6_878_000),
        (Scheme::FeatxChxVal, 1_083_000),
        (Scheme::ChxFeatxVal, 1_083_000),
        (Scheme::FeatAppend, 38_000),
    ];
    let mut bits = BTreeMap::new();
    for (scheme, want) in expect {
        let cfg = EncoderConfig::new(scheme, 19_000, 19, 18, 20, 0);
        let r = cost_model(&cfg).map_err(|e| e.to_string())?;
        if r.memory_bits != want {
            return Err(format!("{scheme}: {} bits, expected {want}", r.memory_bits));
        }
        if scheme == Scheme::FeatAppend && r.op_dim != 1000 {
            return Err(format!("feat-append sub-dimension {}", r.op_dim));
        }
        bits.insert(scheme.cli_name(), r.memory_bits);
    }
    let b = |s: Scheme| bits[s.cli_name()];
    let ordered = b(Scheme::FeatAppend) < b(Scheme::FeatxVal)
        && b(Scheme::FeatxVal) < b(Scheme::FeatxChxVal)
        && b(Scheme::FeatxChxVal) < b(Scheme::ChFeatCombxVal);
    check(ordered, "feat-append < feat-x-val < feat-x-ch-x-val < chfeatcomb-x-val".into())
}

fn c2_kernels() -> Outcome {
    common::kernel_oracle_cases(1000, 0xacce).map(|n| format!("{n} cases"))
}

fn c3_invariants() -> Outcome {
    common::invariant_cases(1000, 0x1a7).map(|(n, lo, hi)| format!("{n} checks, random pairs in [{lo:.4}, {hi:.4}]"))
}

fn c4_certainty() -> Outcome {
    common::certainty_identity(10_000, 0xce27).map(|w| format!("10000 tuples, max deviation {w:.1e}"))
}

fn c7_labels() -> Outcome {
    common::label_oracle_cases().map(|n| format!("{n} cases"))
}

/// Fold tensors of the default synthetic subject (seed 1, 18 channels,
/// three informative).
fn default_subject_folds() -> Result<Vec<FeatureTensor>, String> {
    let spec = SynthSpec::default();
    let recs = synthesize_subject(&spec, 0).map_err(|e| e.to_string())?;
    let folds = prepare_subject(&recs, &PreprocessConfig::default()).map_err(|e| e.to_string())?;
    Ok(folds.into_iter().map(|f| f.tensor).collect())
}

fn cv_score(folds: &[FeatureTensor], settings: HdSettings) -> Result<f64, String> {
    let r = cross_validate(folds, &HdPipeline { settings }, DEFAULT_POSTPROCESS_WINDOW_S).map_err(|e| e.to_string())?;
    Ok(r.mean_postprocessed.f1de_gmean)
}

fn c5_schemes() -> Outcome {
    const SEEDS: u64 = 5;
    let folds = default_subject_folds()?;
    let mut means = BTreeMap::new();
    for scheme in [Scheme::FeatxVal, Scheme::ChFeatCombxVal, Scheme::FeatxChxVal, Scheme::ChxFeatxVal] {
        let mut sum = 0.0;
        for seed in 0..SEEDS {
            let mut s = HdSettings {
                scheme,
                seed,
                ..HdSettings::default()
            };
            s.train.seed = seed;
            sum += cv_score(&folds, s)?;
        }
        means.insert(scheme.cli_name(), sum / SEEDS as f64);
    }
    let base = means[Scheme::FeatxVal.cli_name()];
    let aware: Vec<f64> = [Scheme::ChFeatCombxVal, Scheme::FeatxChxVal, Scheme::ChxFeatxVal]
        .iter()
        .map(|s| means[s.cli_name()])
        .collect();
    let lo = aware.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = aware.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let msg = means.iter().map(|(k, v)| format!("{k} {v:.3}")).collect::<Vec<_>>().join(", ");
    check(
        lo - base >= 0.05 && hi - lo <= 0.05,
        format!("D = 19000, {SEEDS} seeds: {msg}; margin {:.3}, spread {:.3}", lo - base, hi - lo),
    )
}

fn c6_selection() -> Outcome {
    let settings = SelectionSettings::default();
    let folds = PlantedFeatures::default().generate().map_err(|e| e.to_string())?;
    let out = selection_cv(&folds, &settings).map_err(|e| e.to_string())?;
    let k = out.len() as f64;
    let all = out.iter().map(|f| f.all_features_test.f1de_gmean).sum::<f64>() / k;
    let mut notes = vec![format!("all features {all:.3}")];
    let mut ok = true;
    for s in Strategy::ALL {
        let rs: Vec<_> = out.iter().map(|f| f.result(s).expect("strategy ran")).collect();
        let max_n = rs.iter().map(|r| r.chosen_n).max().unwrap_or(0);
        let test = rs.iter().map(|r| r.chosen_test().map_or(0.0, |t| t.f1de_gmean)).sum::<f64>() / k;
        ok &= max_n <= 10 && test >= all - 0.02;
        notes.push(format!("{s}: max n {max_n}, test {test:.3}"));
    }

    let folds = PlantedFeatures::redundancy().generate().map_err(|e| e.to_string())?;
    let out = selection_cv(&folds, &settings).map_err(|e| e.to_string())?;
    let train_max = |s: Strategy| out.iter().map(|f| f.result(s).expect("strategy ran").train_max()).sum::<f64>() / k;
    let (greedy, perf) = (train_max(Strategy::GreedyPerfCorr), train_max(Strategy::ByPerformance));
    ok &= greedy >= perf;
    notes.push(format!("redundancy train max greedy {greedy:.3} vs perf {perf:.3}"));
    check(ok, notes.join("; "))
}

fn c9_floor() -> Outcome {
    let folds = default_subject_folds()?;
    let f1de = cv_score(&folds, HdSettings::default())?;
    check(f1de >= 0.85, format!("feat-x-ch-x-val single-pass F1DE {f1de:.3}, floor 0.85"))
}

const SMALL_SPEC: &str = r#"{
  "num_channels": 6,
  "sample_rate": 128.0,
  "num_seizure_files": 3,
  "seizure_file_duration_s": 100.0,
  "num_free_files": 1,
  "free_file_duration_s": 200.0,
  "informative_channels": [1, 4],
  "artifacts": {"rate_per_min": 1.0, "len_s": [5.0, 10.0], "num_channels": 2}
}"#;

fn hdenc(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hdenc"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "hdenc {} failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

/// Every file below `dir`, keyed by its relative path.
fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in fs::read_dir(dir).expect("readable output dir") {
            let path = e.expect("dir entry").path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).expect("under root").to_path_buf();
                out.insert(rel, fs::read(&path).expect("readable file"));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// Runs the four stages into `root`. The first run takes flags; replays
/// take the first run's manifests and only redirect inputs and outputs.
fn run_stages(root: &Path, replay_of: Option<&Path>) -> Result<(), String> {
    let spec = root.join("spec.json");
    fs::write(&spec, SMALL_SPEC).map_err(|e| e.to_string())?;
    let dir = |s: &str| root.join(s);
    let cfg = |s: &str| replay_of.map(|r| r.join(s).join("run-manifest.json"));
    let with_cfg = |stage: &str, mut args: Vec<String>| -> Result<(), String> {
        if let Some(c) = cfg(stage) {
            args.extend(["--config".into(), p(&c).into()]);
        }
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        hdenc(&refs)
    };
    let s = |x: &str| x.to_string();
    let mut synth = vec![s("synth"), s("--out"), s(p(&dir("data")))];
    if replay_of.is_none() {
        synth.extend([s("--spec"), s(p(&spec)), s("--seed"), s("7")]);
    }
    with_cfg("data", synth)?;
    let mut features = vec![s("features"), s("--out"), s(p(&dir("features")))];
    features.extend([s("--dataset"), s(p(&dir("data").join("manifest.json")))]);
    if replay_of.is_none() {
        features.extend([s("--ratio"), s("3")]);
    }
    with_cfg("features", features)?;
    for stage in ["train", "eval"] {
        let mut args = vec![s(stage), s("--out"), s(p(&dir(stage))), s("--features"), s(p(&dir("features")))];
        if replay_of.is_none() {
            args.extend([s("--dim"), s("2000"), s("--seed"), s("3")]);
        }
        with_cfg(stage, args)?;
    }
    Ok(())
}

fn c8_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        fs::create_dir_all(d).map_err(|e| e.to_string())?;
    }
    run_stages(&a, None)?;
    run_stages(&b, Some(&a))?;
    let mut compared = 0;
    for stage in ["data", "features", "train", "eval"] {
        let (ta, tb) = (tree(&a.join(stage)), tree(&b.join(stage)));
        let names = |t: &BTreeMap<PathBuf, Vec<u8>>| t.keys().cloned().collect::<Vec<_>>();
        if names(&ta) != names(&tb) {
            return Err(format!("{stage}: different file sets"));
        }
        for (rel, bytes) in &ta {
            // run manifests name their own input paths; the settings must match
            if rel.file_name().is_some_and(|n| n == "run-manifest.json") {
                let settings = |bytes: &[u8]| -> Result<serde_json::Value, String> {
                    let mut v: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
                    let cfg = v["config"].as_object_mut().ok_or("manifest without config")?;
                    cfg.remove("dataset");
                    cfg.remove("features");
                    Ok(v["config"].take())
                };
                if settings(bytes)? != settings(&tb[rel])? {
                    return Err(format!("{stage}: replayed run used different settings"));
                }
                continue;
            }
            if &tb[rel] != bytes {
                return Err(format!("{stage}/{} differs between runs", rel.display()));
            }
            compared += 1;
        }
    }
    for key in ["eval.csv", "eval.json"] {
        if !a.join("eval").join(key).exists() {
            return Err(format!("missing {key}"));
        }
    }
    Ok(format!("{compared} files byte-identical across a run and its manifest replay"))
}
