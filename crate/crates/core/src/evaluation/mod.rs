//! Label post-processing, episode and duration scoring, data selection and
//! cross-validation.

mod cv;
mod labels;
mod metrics;
mod select;

pub use cv::{
    cross_validate, report_fields, score_prediction, CvReport, FoldPipeline, FoldPrediction,
    FoldReport, StudyReport, SubjectReport, REPORT_COLUMNS,
};
pub use labels::{majority_filter, postprocess, postprocess_len, LabelSeries, SeriesKind};
pub use metrics::{
    duration_metrics, episode_counts, episode_metrics, window_counts, Degenerate, EpisodeCounts,
    EvalReport, Metric, Rates, WindowCounts,
};
pub use select::{select_data, FoldFile, FoldSource};

/// Default non-seizure to seizure duration ratio.
pub const DEFAULT_RATIO: f64 = 10.0;
/// Default majority-vote window in seconds.
pub const DEFAULT_POSTPROCESS_WINDOW_S: f64 = 5.0;
