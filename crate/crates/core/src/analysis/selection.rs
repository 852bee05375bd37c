//! Per-feature metrics over a set of windows and the three selection
//! strategies.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{certainty, confidence, separability, FeatAppendView};
use crate::encoders::EncoderConfig;
use crate::error::{Error, Result};
use crate::evaluation::{
    episode_counts, majority_filter, postprocess_len, window_counts, EpisodeCounts, EvalReport,
    Metric, WindowCounts,
};
use crate::hdc::Hypervector;
use crate::learner::ClassModels;

/// Per-window, per-feature class distances of a labelled window set.
///
/// `segments` delimit independent recordings: post-processing and episode
/// matching never cross a segment boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    num_feat: usize,
    step_s: f64,
    truth: Vec<u8>,
    segments: Vec<(usize, usize)>,
    /// Flat `[window][feature]`.
    dist_s: Vec<f64>,
    dist_ns: Vec<f64>,
}

impl DistanceTable {
    /// Distances of `vectors` (one segment per entry of `segment_lens`).
    pub fn build(
        vectors: &[Hypervector],
        truth: Vec<u8>,
        segment_lens: &[usize],
        step_s: f64,
        models: &ClassModels,
        cfg: &EncoderConfig,
    ) -> Result<Self> {
        let view = FeatAppendView::new(cfg)?;
        if vectors.len() != truth.len() || segment_lens.iter().sum::<usize>() != truth.len() {
            return Err(Error::invalid("vectors, labels and segment lengths disagree"));
        }
        let rows = vectors
            .par_iter()
            .map(|x| view.distances(x, models))
            .collect::<Result<Vec<_>>>()?;
        let mut table = Self::from_rows(&rows, truth, step_s)?;
        table.segments = segments_from_lens(segment_lens);
        Ok(table)
    }

    /// A single-segment table from explicit `(dist_s, dist_ns)` rows.
    pub fn from_rows(rows: &[Vec<(f64, f64)>], truth: Vec<u8>, step_s: f64) -> Result<Self> {
        let num_feat = rows.first().map_or(0, Vec::len);
        if num_feat == 0 || rows.iter().any(|r| r.len() != num_feat) {
            return Err(Error::invalid("distance rows must be non-empty and equally long"));
        }
        if rows.len() != truth.len() || truth.iter().any(|&l| l > 1) {
            return Err(Error::invalid("truth labels do not match the distance rows"));
        }
        let n = truth.len();
        Ok(Self {
            num_feat,
            step_s,
            segments: vec![(0, n)],
            dist_s: rows.iter().flatten().map(|d| d.0).collect(),
            dist_ns: rows.iter().flatten().map(|d| d.1).collect(),
            truth,
        })
    }

    pub fn with_segments(mut self, lens: &[usize]) -> Result<Self> {
        if lens.iter().sum::<usize>() != self.truth.len() || lens.contains(&0) {
            return Err(Error::invalid("segment lengths do not cover the table"));
        }
        self.segments = segments_from_lens(lens);
        Ok(self)
    }

    pub fn num_feat(&self) -> usize {
        self.num_feat
    }

    pub fn num_windows(&self) -> usize {
        self.truth.len()
    }

    pub fn truth(&self) -> &[u8] {
        &self.truth
    }

    pub fn step_s(&self) -> f64 {
        self.step_s
    }

    pub fn segments(&self) -> &[(usize, usize)] {
        &self.segments
    }

    pub fn dists(&self, w: usize) -> Vec<(f64, f64)> {
        let r = w * self.num_feat..(w + 1) * self.num_feat;
        self.dist_s[r.clone()]
            .iter()
            .copied()
            .zip(self.dist_ns[r].iter().copied())
            .collect()
    }

    /// `dist_ns - dist_s` of feature `f` at window `w`.
    pub fn gap(&self, w: usize, f: usize) -> f64 {
        let i = w * self.num_feat + f;
        self.dist_ns[i] - self.dist_s[i]
    }

    /// Vote of the features in `active` at every window.
    pub fn vote_labels(&self, active: &[usize]) -> Vec<u8> {
        (0..self.num_windows())
            .map(|w| u8::from(active.iter().map(|&f| self.gap(w, f)).sum::<f64>() > 0.0))
            .collect()
    }

    fn has_both_classes(&self) -> bool {
        self.truth.contains(&0) && self.truth.contains(&1)
    }
}

fn segments_from_lens(lens: &[usize]) -> Vec<(usize, usize)> {
    let mut start = 0;
    lens.iter()
        .map(|&l| {
            let s = (start, start + l);
            start += l;
            s
        })
        .collect()
}

/// How predicted labels are scored during analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalOptions {
    /// Majority-vote window in seconds; `None` scores raw labels.
    pub postprocess_window_s: Option<f64>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            postprocess_window_s: Some(crate::evaluation::DEFAULT_POSTPROCESS_WINDOW_S),
        }
    }
}

/// Scores `pred` against the table's truth, post-processing and matching
/// episodes per segment and pooling the counts.
pub fn evaluate_labels(table: &DistanceTable, pred: &[u8], opts: &EvalOptions) -> Result<EvalReport> {
    if pred.len() != table.num_windows() {
        return Err(Error::invalid("prediction length does not match the table"));
    }
    let k = match opts.postprocess_window_s {
        Some(w) if w < table.step_s => {
            return Err(Error::invalid(format!(
                "post-processing window {w} s shorter than the step {} s",
                table.step_s
            )))
        }
        Some(w) => postprocess_len(w, table.step_s),
        None => 1,
    };
    let mut ep = EpisodeCounts::default();
    let mut win = WindowCounts::default();
    for &(s, e) in &table.segments {
        let p = majority_filter(&pred[s..e], k);
        let t = &table.truth[s..e];
        let c = episode_counts(t, &p)?;
        ep.tp += c.tp;
        ep.fp += c.fp;
        ep.fn_ += c.fn_;
        ep.truth_episodes += c.truth_episodes;
        ep.pred_episodes += c.pred_episodes;
        let c = window_counts(t, &p)?;
        win.tp += c.tp;
        win.fp += c.fp;
        win.fn_ += c.fn_;
        win.tn += c.tn;
    }
    Ok(EvalReport::from_counts(ep, win))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerFeatureMetrics {
    pub feature: usize,
    pub name: String,
    pub predictions: Vec<u8>,
    pub certainty: Vec<f64>,
    /// `+inf` / `-inf` when the feature is never wrong / never right.
    pub confidence: f64,
    pub separability: f64,
    pub perf: EvalReport,
}

/// Single-feature predictions, certainty, confidence, separability and
/// scores of every feature on `table`.
pub fn per_feature_metrics(
    table: &DistanceTable,
    models: &ClassModels,
    cfg: &EncoderConfig,
    names: &[String],
    opts: &EvalOptions,
) -> Result<Vec<PerFeatureMetrics>> {
    let nf = table.num_feat;
    if names.len() != nf || cfg.num_feat != nf {
        return Err(Error::invalid("feature names, encoder and table disagree"));
    }
    // certainty needs every feature at once, so compute it window-major
    let cert: Vec<Vec<f64>> = (0..table.num_windows()).map(|w| certainty(&table.dists(w))).collect();
    (0..nf)
        .into_par_iter()
        .map(|f| {
            let predictions: Vec<u8> = table.vote_labels(&[f]);
            let certainty: Vec<f64> = cert.iter().map(|c| c[f]).collect();
            Ok(PerFeatureMetrics {
                feature: f,
                name: names[f].clone(),
                confidence: confidence(&certainty, &predictions, &table.truth)?,
                separability: separability(models, f, cfg)?,
                perf: evaluate_labels(table, &predictions, opts)?,
                predictions,
                certainty,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "perf")]
    ByPerformance,
    #[serde(rename = "conf")]
    ByConfidence,
    #[serde(rename = "greedy")]
    GreedyPerfCorr,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [
        Strategy::ByPerformance,
        Strategy::ByConfidence,
        Strategy::GreedyPerfCorr,
    ];

    pub fn cli_name(self) -> &'static str {
        match self {
            Strategy::ByPerformance => "perf",
            Strategy::ByConfidence => "conf",
            Strategy::GreedyPerfCorr => "greedy",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.cli_name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown strategy {s:?} (perf, conf, greedy)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub strategy: Strategy,
    pub metric: Metric,
    /// Features in the order they are added.
    pub ordering: Vec<usize>,
    /// Entry `n - 1` scores the vote of the first `n` features.
    pub perf_curve_train: Vec<EvalReport>,
    pub perf_curve_test: Vec<EvalReport>,
    pub chosen_n: usize,
    /// First `chosen_n` features of the ordering, ascending.
    pub chosen_features: Vec<usize>,
}

/// Descending by key, ties broken by the lower feature index.
fn rank_by(keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]).then(a.cmp(&b)));
    order
}

fn greedy_order(table: &DistanceTable, metric: Metric, opts: &EvalOptions) -> Result<Vec<usize>> {
    let (nf, nw) = (table.num_feat, table.num_windows());
    let mut score = vec![0.0; nw];
    let mut used = vec![false; nf];
    let mut order = Vec::with_capacity(nf);
    for _ in 0..nf {
        let candidates: Vec<usize> = (0..nf).filter(|&f| !used[f]).collect();
        let values = candidates
            .par_iter()
            .map(|&c| {
                let pred: Vec<u8> = (0..nw)
                    .map(|w| u8::from(score[w] + table.gap(w, c) > 0.0))
                    .collect();
                Ok(metric.of(&evaluate_labels(table, &pred, opts)?))
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut best = 0;
        for i in 1..candidates.len() {
            if values[i] > values[best] {
                best = i;
            }
        }
        let f = candidates[best];
        used[f] = true;
        order.push(f);
        for (w, s) in score.iter_mut().enumerate() {
            *s += table.gap(w, f);
        }
    }
    Ok(order)
}

/// Scores of the vote over each prefix of `ordering`.
pub fn prefix_curve(
    table: &DistanceTable,
    ordering: &[usize],
    opts: &EvalOptions,
) -> Result<Vec<EvalReport>> {
    if ordering.iter().any(|&f| f >= table.num_feat) {
        return Err(Error::invalid("ordering refers to a feature outside the table"));
    }
    let nw = table.num_windows();
    let mut score = vec![0.0; nw];
    let mut curve = Vec::with_capacity(ordering.len());
    for &f in ordering {
        for (w, s) in score.iter_mut().enumerate() {
            *s += table.gap(w, f);
        }
        let pred: Vec<u8> = score.iter().map(|&s| u8::from(s > 0.0)).collect();
        curve.push(evaluate_labels(table, &pred, opts)?);
    }
    Ok(curve)
}

/// Orders features by `strategy` on the training table and picks the prefix
/// length maximizing `metric` on it (ties go to the shorter prefix).
pub fn select_features(
    train: &DistanceTable,
    per_feature: &[PerFeatureMetrics],
    strategy: Strategy,
    metric: Metric,
    opts: &EvalOptions,
) -> Result<SelectionResult> {
    if !train.has_both_classes() {
        return Err(Error::TrainingDegenerate(
            "feature selection needs both classes in the training windows".into(),
        ));
    }
    if per_feature.len() != train.num_feat {
        return Err(Error::invalid("per-feature metrics do not match the table"));
    }
    let ordering = match strategy {
        Strategy::ByPerformance => {
            rank_by(&per_feature.iter().map(|m| metric.of(&m.perf)).collect::<Vec<_>>())
        }
        Strategy::ByConfidence => {
            rank_by(&per_feature.iter().map(|m| m.confidence).collect::<Vec<_>>())
        }
        Strategy::GreedyPerfCorr => greedy_order(train, metric, opts)?,
    };
    let perf_curve_train = prefix_curve(train, &ordering, opts)?;
    let mut chosen_n = 1;
    for (i, r) in perf_curve_train.iter().enumerate() {
        if metric.of(r) > metric.of(&perf_curve_train[chosen_n - 1]) {
            chosen_n = i + 1;
        }
    }
    let mut chosen_features = ordering[..chosen_n].to_vec();
    chosen_features.sort_unstable();
    Ok(SelectionResult {
        strategy,
        metric,
        ordering,
        perf_curve_train,
        perf_curve_test: Vec::new(),
        chosen_n,
        chosen_features,
    })
}

impl SelectionResult {
    /// Fills the test curve from a held-out table; never affects the choice.
    pub fn evaluate_test(&mut self, test: &DistanceTable, opts: &EvalOptions) -> Result<()> {
        self.perf_curve_test = prefix_curve(test, &self.ordering, opts)?;
        Ok(())
    }

    pub fn chosen_train(&self) -> &EvalReport {
        &self.perf_curve_train[self.chosen_n - 1]
    }

    /// `None` until [`Self::evaluate_test`] has run.
    pub fn chosen_test(&self) -> Option<&EvalReport> {
        self.perf_curve_test.get(self.chosen_n - 1)
    }

    /// Best value of the selection metric along the training curve.
    pub fn train_max(&self) -> f64 {
        self.perf_curve_train
            .iter()
            .map(|r| self.metric.of(r))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
