//! Preprocessing and feature extraction for multi-channel recordings.

mod divergence;
mod features;
mod filter;
mod recording;
mod tensor;

pub use divergence::{js_divergence, js_divergence_hist, JsDivergence};
pub use features::{
    default_features, extract_features, feature_names, line_length, mean_amplitude,
    parse_features, window_label, Band, Feature, Periodogram, WindowFeatures, Windowing,
    TOTAL_POWER_BAND,
};
pub use filter::{bandpass_filter, Bandpass, Biquad};
pub use recording::{validate_annotations, Annotation, Recording};
pub use tensor::{bin_value, discretize, fit_normalization, FeatureTensor, NormParams};

/// Preprocessing defaults.
pub const DEFAULT_LOW_HZ: f64 = 1.0;
pub const DEFAULT_HIGH_HZ: f64 = 20.0;
pub const DEFAULT_FILTER_ORDER: usize = 4;
pub const DEFAULT_WINDOW_S: f64 = 4.0;
pub const DEFAULT_STEP_S: f64 = 0.5;
pub const DEFAULT_NUM_BINS: usize = 20;
