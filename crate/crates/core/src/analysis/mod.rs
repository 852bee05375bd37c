//! Per-feature analysis and feature selection on FeatAppend encodings.
//!
//! FeatAppend gives every feature its own slice of the window vector, so the
//! class prototypes can be compared feature by feature. Distances on those
//! slices yield single-feature predictions, a certainty per window, a
//! confidence and a separability per feature, and a vote over any subset.

mod metrics;
mod report;
mod selection;

pub use metrics::{
    certainty, confidence, feature_predict, prediction_correlation, separability, vote,
    vote_score, FeatAppendView, FeatureDecision,
};
pub use report::{correlation_csv, curve_csv, ordering_csv, per_feature_csv};
pub use selection::{
    evaluate_labels, per_feature_metrics, prefix_curve, select_features, DistanceTable,
    EvalOptions, PerFeatureMetrics, SelectionResult, Strategy,
};
