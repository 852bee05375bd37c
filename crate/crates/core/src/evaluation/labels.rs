use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Truth,
    RawPred,
    Postprocessed,
}

/// Binary label per window at a fixed step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSeries {
    step_s: f64,
    labels: Vec<u8>,
    kind: SeriesKind,
}

impl LabelSeries {
    pub fn new(step_s: f64, labels: Vec<u8>, kind: SeriesKind) -> Result<Self> {
        if !(step_s > 0.0) {
            return Err(Error::invalid(format!("label step must be positive, got {step_s}")));
        }
        if labels.is_empty() {
            return Err(Error::invalid("label series is empty"));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::invalid("labels must be 0 or 1"));
        }
        Ok(Self {
            step_s,
            labels,
            kind,
        })
    }

    /// Parses a compact `"0011100"` string; whitespace is ignored.
    pub fn from_str_labels(s: &str, step_s: f64, kind: SeriesKind) -> Result<Self> {
        let labels = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::invalid(format!("invalid label character {c:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(step_s, labels, kind)
    }

    pub fn step_s(&self) -> f64 {
        self.step_s
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Maximal runs of ones as half-open index ranges.
    pub fn episodes(&self) -> Vec<(usize, usize)> {
        runs_of_ones(&self.labels)
    }
}

pub(crate) fn runs_of_ones(labels: &[u8]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &l) in labels.iter().enumerate() {
        match (l, start) {
            (1, None) => start = Some(i),
            (0, Some(s)) => {
                runs.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, labels.len()));
    }
    runs
}

/// Window count of the majority filter: `round(window_s / step_s)`, made odd.
pub fn postprocess_len(window_s: f64, step_s: f64) -> usize {
    let k = (window_s / step_s).round().max(1.0) as usize;
    if k.is_multiple_of(2) {
        k + 1
    } else {
        k
    }
}

/// Centred moving majority vote; windows are truncated at the edges and an
/// exact tie yields 0.
pub fn majority_filter(labels: &[u8], k: usize) -> Vec<u8> {
    let n = labels.len();
    let half = k / 2;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0usize);
    for &l in labels {
        prefix.push(prefix.last().unwrap() + l as usize);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            let ones = prefix[hi] - prefix[lo];
            u8::from(2 * ones > hi - lo)
        })
        .collect()
}

pub fn postprocess(raw: &LabelSeries, window_s: f64) -> Result<LabelSeries> {
    if !(window_s >= raw.step_s) {
        return Err(Error::invalid(format!(
            "post-processing window {window_s} s shorter than the label step {} s",
            raw.step_s
        )));
    }
    let k = postprocess_len(window_s, raw.step_s);
    LabelSeries::new(
        raw.step_s,
        majority_filter(&raw.labels, k),
        SeriesKind::Postprocessed,
    )
}
