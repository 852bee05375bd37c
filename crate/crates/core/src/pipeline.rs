//! End-to-end glue: preprocessing into fold tensors, the HD fold pipeline
//! for cross-validation, and per-fold feature selection.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    evaluate_labels, per_feature_metrics, select_features, DistanceTable, EvalOptions,
    PerFeatureMetrics, SelectionResult, Strategy,
};
use crate::encoders::{Encoder, EncoderConfig, LevelTables, Scheme};
use crate::error::{Error, Result};
use crate::dataset::DatasetManifest;
use crate::evaluation::{select_data, EvalReport, FoldPipeline, FoldPrediction, FoldSource, Metric};
use crate::hdc::Hypervector;
use crate::learner::{classify, train, ClassModels, TrainConfig};
use crate::scalar::Scalar;
use crate::Real;
use crate::signal::{
    bandpass_filter, extract_features, feature_names, js_divergence, parse_features, Band, Feature, FeatureTensor, NormParams, Recording,
};

/// Filtering, windowing, features and data selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub low_hz: f64,
    pub high_hz: f64,
    pub filter_order: usize,
    pub window_s: f64,
    pub step_s: f64,
    pub features: Vec<String>,
    /// Non-seizure to seizure duration ratio of each fold file.
    pub ratio: f64,
    pub selection_seed: u64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        use crate::signal::*;
        Self {
            low_hz: DEFAULT_LOW_HZ,
            high_hz: DEFAULT_HIGH_HZ,
            filter_order: DEFAULT_FILTER_ORDER,
            window_s: DEFAULT_WINDOW_S,
            step_s: DEFAULT_STEP_S,
            features: feature_names(&default_features()),
            ratio: crate::evaluation::DEFAULT_RATIO,
            selection_seed: 0,
        }
    }
}

impl PreprocessConfig {
    pub fn parsed_features(&self) -> Result<Vec<Feature>> {
        parse_features(&self.features)
    }

    /// Features whose band lies mostly above the filter's upper edge.
    pub fn attenuated_features(&self) -> Vec<String> {
        self.parsed_features()
            .unwrap_or_default()
            .into_iter()
            .filter(|f| match f {
                Feature::Power(b) | Feature::RelPower(b) => is_attenuated(*b, self.high_hz),
                _ => false,
            })
            .map(|f| f.name())
            .collect()
    }
}

/// One fold file's feature tensor and where its samples came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedFold<T> {
    pub tensor: FeatureTensor<T>,
    pub source: FoldSource,
}

/// Filters every recording, cuts one fold file per seizure and extracts its
/// feature tensor.
pub fn prepare_subject<T: Scalar>(
    recordings: &[Recording<T>],
    cfg: &PreprocessConfig,
) -> Result<Vec<PreparedFold<T>>> {
    let features = cfg.parsed_features()?;
    let filtered = recordings
        .par_iter()
        .map(|r| bandpass_filter(r, cfg.low_hz, cfg.high_hz, cfg.filter_order))
        .collect::<Result<Vec<_>>>()?;
    let folds = select_data(&filtered, cfg.ratio, cfg.selection_seed)?;
    folds
        .into_par_iter()
        .map(|f| {
            Ok(PreparedFold {
                tensor: extract_features(&f.recording, cfg.window_s, cfg.step_s, &features)?,
                source: f.source,
            })
        })
        .collect()
}

pub const FEATURE_INDEX_FILE: &str = "features.json";
const FEATURE_INDEX_FORMAT: &str = "hdenc-features/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldEntry {
    /// Tensor path stem relative to the index directory.
    pub stem: String,
    pub num_windows: usize,
    pub seizure_windows: usize,
    pub source: FoldSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectFolds {
    pub id: String,
    pub folds: Vec<FoldEntry>,
}

/// Directory of per-fold feature tensors, described by `features.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureIndex {
    pub format: String,
    pub preprocess: PreprocessConfig,
    pub feature_names: Vec<String>,
    pub num_channels: usize,
    pub attenuated_features: Vec<String>,
    pub subjects: Vec<SubjectFolds>,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl FeatureIndex {
    /// Preprocesses every subject of `manifest` and writes the tensors and
    /// index under `out_dir`.
    pub fn build(manifest: &DatasetManifest, cfg: &PreprocessConfig, out_dir: &Path) -> Result<Self> {
        let features = cfg.parsed_features()?;
        let mut subjects = Vec::new();
        let mut num_channels = 0;
        for entry in &manifest.subjects {
            let recordings: Vec<Recording<Real>> = manifest.load_subject(entry)?;
            num_channels = recordings.first().map_or(0, |r| r.num_channels());
            let dir = out_dir.join(&entry.id);
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let mut folds = Vec::new();
            for (k, fold) in prepare_subject(&recordings, cfg)?.into_iter().enumerate() {
                let stem = format!("{}/fold_{k:02}", entry.id);
                fold.tensor.save(&out_dir.join(&stem))?;
                folds.push(FoldEntry {
                    stem,
                    num_windows: fold.tensor.num_windows(),
                    seizure_windows: fold.tensor.labels().iter().filter(|&&l| l == 1).count(),
                    source: fold.source,
                });
            }
            subjects.push(SubjectFolds {
                id: entry.id.clone(),
                folds,
            });
        }
        let index = Self {
            format: FEATURE_INDEX_FORMAT.into(),
            preprocess: cfg.clone(),
            feature_names: feature_names(&features),
            num_channels,
            attenuated_features: cfg.attenuated_features(),
            subjects,
            base_dir: out_dir.to_path_buf(),
        };
        let path = out_dir.join(FEATURE_INDEX_FILE);
        fs::write(&path, serde_json::to_string_pretty(&index)? + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(index)
    }

    /// Reads `features.json` from a directory (or the file itself).
    pub fn load(path: &Path) -> Result<Self> {
        let file = if path.is_dir() {
            path.join(FEATURE_INDEX_FILE)
        } else {
            path.to_path_buf()
        };
        let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        let mut index: Self = serde_json::from_str(&text).map_err(|e| {
            Error::parse(&file, format!("line {}, column {}", e.line(), e.column()), e.to_string())
        })?;
        if index.format != FEATURE_INDEX_FORMAT {
            return Err(Error::parse(&file, "format", "unsupported feature index format"));
        }
        index.base_dir = file.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(index)
    }

    pub fn subject(&self, id: &str) -> Result<&SubjectFolds> {
        self.subjects
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::invalid(format!("no subject {id:?} in feature index")))
    }

    pub fn load_folds(&self, subject: &SubjectFolds) -> Result<Vec<FeatureTensor<Real>>> {
        subject
            .folds
            .iter()
            .map(|f| FeatureTensor::load(&self.base_dir.join(&f.stem)))
            .collect()
    }
}

/// Encoder and learner settings shared by every fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HdSettings {
    pub scheme: Scheme,
    pub dim: usize,
    pub num_bins: usize,
    pub seed: u64,
    pub level_tables: LevelTables,
    pub train: TrainConfig,
}

impl Default for HdSettings {
    fn default() -> Self {
        Self {
            scheme: Scheme::FeatxChxVal,
            dim: 19_000,
            num_bins: crate::signal::DEFAULT_NUM_BINS,
            seed: 0,
            level_tables: LevelTables::Shared,
            train: TrainConfig::default(),
        }
    }
}

impl HdSettings {
    pub fn encoder_config(&self, num_feat: usize, num_ch: usize) -> EncoderConfig {
        EncoderConfig {
            level_tables: self.level_tables,
            ..EncoderConfig::new(self.scheme, self.dim, num_feat, num_ch, self.num_bins, self.seed)
        }
    }
}

/// Normalization, encoder and class models fitted on training tensors.
#[derive(Debug, Clone)]
pub struct FittedModel<T> {
    pub norm: NormParams<T>,
    pub encoder: Encoder,
    pub models: ClassModels,
}

impl<T: Scalar> FittedModel<T> {
    pub fn fit(train_tensors: &[&FeatureTensor<T>], settings: &HdSettings) -> Result<Self> {
        let first = train_tensors
            .first()
            .ok_or_else(|| Error::invalid("no training tensors"))?;
        let norm = NormParams::fit(train_tensors)?;
        let cfg = settings.encoder_config(first.num_features(), first.num_channels());
        let encoder = Encoder::new(cfg)?;
        let mut vectors = Vec::new();
        let mut labels = Vec::new();
        for t in train_tensors {
            vectors.extend(encode_with(&encoder, &norm, t)?);
            labels.extend_from_slice(t.labels());
        }
        let mut models = train(&vectors, &labels, &settings.train)?;
        models.encoder_hash = Some(encoder.config().config_hash());
        Ok(Self {
            norm,
            encoder,
            models,
        })
    }

    /// Discretizes with the training normalization and encodes.
    pub fn encode(&self, tensor: &FeatureTensor<T>) -> Result<Vec<Hypervector>> {
        encode_with(&self.encoder, &self.norm, tensor)
    }

    pub fn predict(&self, tensor: &FeatureTensor<T>) -> Result<Vec<u8>> {
        self.encode(tensor)?
            .iter()
            .map(|x| Ok(classify(x, &self.models)?.label.as_u8()))
            .collect()
    }
}

fn encode_with<T: Scalar>(
    encoder: &Encoder,
    norm: &NormParams<T>,
    tensor: &FeatureTensor<T>,
) -> Result<Vec<Hypervector>> {
    let mut t = tensor.clone();
    t.discretize(norm, encoder.config().num_bins)?;
    encoder.encode_tensor(&t)
}

/// Cross-validation fold pipeline: fit on the training tensors, classify
/// every window of the held-out tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct HdPipeline {
    pub settings: HdSettings,
}

impl<T: Scalar> FoldPipeline<FeatureTensor<T>> for HdPipeline {
    fn predict(&self, train: &[&FeatureTensor<T>], test: &FeatureTensor<T>) -> Result<FoldPrediction> {
        let fitted = FittedModel::fit(train, &self.settings)?;
        Ok(FoldPrediction {
            truth: test.labels().to_vec(),
            pred: fitted.predict(test)?,
            step_s: test.step_s(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionSettings {
    /// Scheme is forced to FeatAppend.
    pub hd: HdSettings,
    pub metric: Metric,
    pub strategies: Vec<Strategy>,
    pub eval: EvalOptions,
}

impl Default for SelectionSettings {
    fn default() -> Self {
        Self {
            hd: HdSettings {
                scheme: Scheme::FeatAppend,
                ..HdSettings::default()
            },
            metric: Metric::F1de,
            strategies: Strategy::ALL.to_vec(),
            eval: EvalOptions::default(),
        }
    }
}

/// Selection outcome of one held-out fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionFold {
    pub fold: usize,
    pub feature_names: Vec<String>,
    /// Computed on the training windows.
    pub per_feature: Vec<PerFeatureMetrics>,
    /// Pooled JS divergence of each feature's training bins.
    pub js_divergence: Vec<f64>,
    pub results: Vec<SelectionResult>,
    /// Vote over all features on the held-out fold.
    pub all_features_test: EvalReport,
}

impl SelectionFold {
    pub fn result(&self, strategy: Strategy) -> Option<&SelectionResult> {
        self.results.iter().find(|r| r.strategy == strategy)
    }
}

/// Trains FeatAppend models on `train`, ranks features on the training
/// windows and scores every prefix on both sets.
pub fn select_fold<T: Scalar>(
    train_tensors: &[&FeatureTensor<T>],
    test: &FeatureTensor<T>,
    settings: &SelectionSettings,
    fold: usize,
) -> Result<SelectionFold> {
    let hd = HdSettings {
        scheme: Scheme::FeatAppend,
        ..settings.hd.clone()
    };
    let fitted = FittedModel::fit(train_tensors, &hd)?;
    let cfg = fitted.encoder.config().clone();
    let names = test.feature_names().to_vec();
    let table = |tensors: &[&FeatureTensor<T>]| -> Result<DistanceTable> {
        let mut vectors = Vec::new();
        let mut truth = Vec::new();
        let mut lens = Vec::new();
        for t in tensors {
            vectors.extend(fitted.encode(t)?);
            truth.extend_from_slice(t.labels());
            lens.push(t.num_windows());
        }
        DistanceTable::build(&vectors, truth, &lens, test.step_s(), &fitted.models, &cfg)
    };
    let train_table = table(train_tensors)?;
    let test_table = table(&[test])?;
    let per_feature = per_feature_metrics(&train_table, &fitted.models, &cfg, &names, &settings.eval)?;

    let mut binned = FeatureTensor::concat(train_tensors)?;
    binned.discretize(&fitted.norm, hd.num_bins)?;
    let js_divergence = (0..names.len())
        .map(|f| Ok(js_divergence(&binned, f)?.pooled))
        .collect::<Result<Vec<_>>>()?;

    let results = settings
        .strategies
        .iter()
        .map(|&s| {
            let mut r = select_features(&train_table, &per_feature, s, settings.metric, &settings.eval)?;
            r.evaluate_test(&test_table, &settings.eval)?;
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<usize> = (0..names.len()).collect();
    let all_features_test = evaluate_labels(&test_table, &test_table.vote_labels(&all), &settings.eval)?;
    Ok(SelectionFold {
        fold,
        feature_names: names,
        per_feature,
        js_divergence,
        results,
        all_features_test,
    })
}

/// Leave-one-fold-out feature selection.
pub fn selection_cv<T: Scalar>(
    folds: &[FeatureTensor<T>],
    settings: &SelectionSettings,
) -> Result<Vec<SelectionFold>> {
    if folds.len() < 2 {
        return Err(Error::invalid("feature selection needs at least 2 folds"));
    }
    (0..folds.len())
        .into_par_iter()
        .map(|k| {
            let train: Vec<&FeatureTensor<T>> = folds
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != k)
                .map(|(_, f)| f)
                .collect();
            select_fold(&train, &folds[k], settings, k)
        })
        .collect()
}

/// Bands the default 1-20 Hz filter removes almost entirely.
pub fn is_attenuated(band: Band, high_hz: f64) -> bool {
    band.range().0 >= high_hz
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::PlantedFeatures;
    use crate::evaluation::cross_validate;

    #[test]
    fn gamma_flagged_under_default_filter() {
        let names = PreprocessConfig::default().attenuated_features();
        assert_eq!(names, vec!["p_gamma".to_string(), "p_gamma_rel".to_string()]);
        assert!(is_attenuated(Band::Gamma, 20.0));
        assert!(!is_attenuated(Band::Beta, 20.0));
    }

    #[test]
    fn planted_tensors_are_learnable() {
        let folds = PlantedFeatures {
            num_folds: 3,
            ..PlantedFeatures::default()
        }
        .generate()
        .unwrap();
        let pipe = HdPipeline {
            settings: HdSettings {
                dim: 2000,
                ..HdSettings::default()
            },
        };
        let r = cross_validate(&folds, &pipe, 5.0).unwrap();
        let m = &r.mean_postprocessed;
        assert_eq!(m.episode.tpr, 1.0, "{m:?}");
        assert!(m.duration.f1 > 0.6, "{m:?}");
    }

    #[test]
    fn selection_fold_runs() {
        let folds = PlantedFeatures {
            num_folds: 2,
            ..PlantedFeatures::default()
        }
        .generate()
        .unwrap();
        let settings = SelectionSettings {
            hd: HdSettings {
                dim: 1900,
                ..SelectionSettings::default().hd
            },
            ..SelectionSettings::default()
        };
        let out = select_fold(&[&folds[0]], &folds[1], &settings, 1).unwrap();
        assert_eq!(out.results.len(), 3);
        for r in &out.results {
            assert_eq!(r.perf_curve_test.len(), 19);
            assert!(r.chosen_n >= 1);
        }
        assert_eq!(out.js_divergence.len(), 19);
    }
}
