//! Hyperdimensional encoding of multi-channel, multi-feature windowed signals.
//!
//! The crate is organized bottom-up:
//!
//! * [`hdc`] packed binary hypervectors, bundling and item memories
//! * [`signal`] filtering, windowed feature extraction, normalization
//! * [`encoders`] the five window encoders and their cost model
//! * [`learner`] single-pass and OnlineHD class models
//! * [`analysis`] per-feature metrics and feature selection on appended encodings
//! * [`evaluation`] label post-processing, episode/duration scores, cross-validation
//! * [`dataset`] recording formats, manifests, synthetic data
//! * [`pipeline`] the glue used by the CLI
//!
//! Signal and statistics code is generic over [`Scalar`] (`f32`/`f64`); the
//! aliases below fix the pipeline's working precision.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dataset;
pub mod encoders;
pub mod error;
pub mod evaluation;
pub mod hdc;
pub mod learner;
pub mod pipeline;
pub mod scalar;
pub mod signal;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Working precision of the pipeline.
pub type Real = f64;

pub type Recording = signal::Recording<Real>;
pub type RecordingF32 = signal::Recording<f32>;
pub type FeatureTensor = signal::FeatureTensor<Real>;
pub type FeatureTensorF32 = signal::FeatureTensor<f32>;
pub type NormParams = signal::NormParams<Real>;
pub type Bandpass = signal::Bandpass<Real>;
