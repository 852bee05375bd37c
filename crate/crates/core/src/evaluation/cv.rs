//! Leave-one-seizure-out cross-validation and report aggregation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::labels::{postprocess, LabelSeries, SeriesKind};
use super::metrics::EvalReport;
use crate::error::{Error, Result};

/// Per-window truth and raw predictions of one held-out fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPrediction {
    pub truth: Vec<u8>,
    pub pred: Vec<u8>,
    pub step_s: f64,
}

/// Anything that can train on some folds and predict another.
pub trait FoldPipeline<D>: Sync {
    fn predict(&self, train: &[&D], test: &D) -> Result<FoldPrediction>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub raw: EvalReport,
    pub postprocessed: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<FoldReport>,
    pub mean_raw: EvalReport,
    pub mean_postprocessed: EvalReport,
}

/// Raw and majority-filtered scores of one prediction.
pub fn score_prediction(p: &FoldPrediction, postprocess_window_s: f64) -> Result<(EvalReport, EvalReport)> {
    let raw = LabelSeries::new(p.step_s, p.pred.clone(), SeriesKind::RawPred)?;
    let post = postprocess(&raw, postprocess_window_s)?;
    Ok((
        EvalReport::evaluate(&p.truth, raw.labels())?,
        EvalReport::evaluate(&p.truth, post.labels())?,
    ))
}

/// Holds out each fold once, trains on the rest and averages the fold
/// reports arithmetically.
pub fn cross_validate<D, P>(folds: &[D], pipeline: &P, postprocess_window_s: f64) -> Result<CvReport>
where
    D: Sync,
    P: FoldPipeline<D>,
{
    if folds.len() < 2 {
        return Err(Error::invalid(format!(
            "cross-validation needs at least 2 folds, got {}",
            folds.len()
        )));
    }
    let reports = (0..folds.len())
        .into_par_iter()
        .map(|k| {
            let train: Vec<&D> = folds
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != k)
                .map(|(_, f)| f)
                .collect();
            let pred = pipeline.predict(&train, &folds[k])?;
            let (raw, postprocessed) = score_prediction(&pred, postprocess_window_s)?;
            Ok(FoldReport {
                fold: k,
                raw,
                postprocessed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CvReport::from_folds(reports)
}

impl CvReport {
    pub fn from_folds(folds: Vec<FoldReport>) -> Result<Self> {
        let raw: Vec<_> = folds.iter().map(|f| f.raw.clone()).collect();
        let post: Vec<_> = folds.iter().map(|f| f.postprocessed.clone()).collect();
        Ok(Self {
            mean_raw: EvalReport::mean(&raw)?,
            mean_postprocessed: EvalReport::mean(&post)?,
            folds,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectReport {
    pub subject: String,
    pub cv: CvReport,
}

/// Subject reports plus their arithmetic mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub subjects: Vec<SubjectReport>,
    pub mean_raw: EvalReport,
    pub mean_postprocessed: EvalReport,
}

impl StudyReport {
    pub fn new(subjects: Vec<SubjectReport>) -> Result<Self> {
        let raw: Vec<_> = subjects.iter().map(|s| s.cv.mean_raw.clone()).collect();
        let post: Vec<_> = subjects.iter().map(|s| s.cv.mean_postprocessed.clone()).collect();
        Ok(Self {
            mean_raw: EvalReport::mean(&raw)?,
            mean_postprocessed: EvalReport::mean(&post)?,
            subjects,
        })
    }

    /// One row per fold per subject and variant, then subject and overall
    /// averages (`fold` = `mean`).
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::invalid(format!("csv: {e}"));
        w.write_record(REPORT_COLUMNS).map_err(csv_err)?;
        for s in &self.subjects {
            for f in &s.cv.folds {
                write_row(&mut w, &s.subject, &f.fold.to_string(), "raw", &f.raw)?;
                write_row(&mut w, &s.subject, &f.fold.to_string(), "postprocessed", &f.postprocessed)?;
            }
            write_row(&mut w, &s.subject, "mean", "raw", &s.cv.mean_raw)?;
            write_row(&mut w, &s.subject, "mean", "postprocessed", &s.cv.mean_postprocessed)?;
        }
        write_row(&mut w, "all", "mean", "raw", &self.mean_raw)?;
        write_row(&mut w, "all", "mean", "postprocessed", &self.mean_postprocessed)?;
        let bytes = w.into_inner().map_err(|e| Error::invalid(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub const REPORT_COLUMNS: [&str; 16] = [
    "subject",
    "fold",
    "variant",
    "episode_tpr",
    "episode_ppv",
    "f1e",
    "duration_tpr",
    "duration_ppv",
    "f1d",
    "f1de_gmean",
    "episode_tp",
    "episode_fp",
    "episode_fn",
    "window_tp",
    "window_fp",
    "window_fn",
];

/// Report fields in [`REPORT_COLUMNS`] order after the three key columns.
pub fn report_fields(r: &EvalReport) -> Vec<String> {
    vec![
        format!("{:.6}", r.episode.tpr),
        format!("{:.6}", r.episode.ppv),
        format!("{:.6}", r.episode.f1),
        format!("{:.6}", r.duration.tpr),
        format!("{:.6}", r.duration.ppv),
        format!("{:.6}", r.duration.f1),
        format!("{:.6}", r.f1de_gmean),
        r.episode_counts.tp.to_string(),
        r.episode_counts.fp.to_string(),
        r.episode_counts.fn_.to_string(),
        r.window_counts.tp.to_string(),
        r.window_counts.fp.to_string(),
        r.window_counts.fn_.to_string(),
    ]
}

fn write_row(
    w: &mut csv::Writer<Vec<u8>>,
    subject: &str,
    fold: &str,
    variant: &str,
    r: &EvalReport,
) -> Result<()> {
    let mut row = vec![subject.to_string(), fold.to_string(), variant.to_string()];
    row.extend(report_fields(r));
    w.write_record(&row)
        .map_err(|e| Error::invalid(format!("csv: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Folds are label vectors; the predictor echoes or inverts the truth.
    struct Echo {
        invert: bool,
    }

    impl FoldPipeline<Vec<u8>> for Echo {
        fn predict(&self, _train: &[&Vec<u8>], test: &Vec<u8>) -> Result<FoldPrediction> {
            Ok(FoldPrediction {
                truth: test.clone(),
                pred: test.iter().map(|&l| l ^ u8::from(self.invert)).collect(),
                step_s: 0.5,
            })
        }
    }

    fn fold(pre: usize, sz: usize, post: usize) -> Vec<u8> {
        [vec![0; pre], vec![1; sz], vec![0; post]].concat()
    }

    #[test]
    fn oracle_predictor_scores_one() {
        let folds = vec![fold(20, 30, 20), fold(40, 15, 10), fold(5, 25, 30)];
        let r = cross_validate(&folds, &Echo { invert: false }, 5.0).unwrap();
        assert_eq!(r.folds.len(), 3);
        for m in [&r.mean_raw, &r.mean_postprocessed] {
            assert_eq!(m.f1de_gmean, 1.0);
            assert_eq!(m.episode.f1, 1.0);
            assert!(m.degenerate.is_empty());
        }
    }

    #[test]
    fn inverted_predictor_scores_zero() {
        let folds = vec![fold(20, 30, 20), fold(40, 15, 10)];
        let r = cross_validate(&folds, &Echo { invert: true }, 5.0).unwrap();
        assert_eq!(r.mean_raw.duration.f1, 0.0);
    }

    #[test]
    fn single_fold_rejected() {
        assert!(cross_validate(&[fold(5, 5, 5)], &Echo { invert: false }, 5.0).is_err());
    }

    #[test]
    fn csv_has_row_per_fold_and_means() {
        let folds = vec![fold(20, 30, 20), fold(40, 15, 10)];
        let cv = cross_validate(&folds, &Echo { invert: false }, 5.0).unwrap();
        let study = StudyReport::new(vec![SubjectReport {
            subject: "s01".into(),
            cv,
        }])
        .unwrap();
        let text = study.to_csv().unwrap();
        // header + 2 folds x 2 variants + subject means + overall means
        assert_eq!(text.lines().count(), 1 + 4 + 2 + 2);
        assert!(text.starts_with("subject,fold,variant"));
    }
}
