use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Annotated seizure interval in seconds from the recording start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub start_s: f64,
    pub end_s: f64,
}

impl Annotation {
    pub fn new(start_s: f64, end_s: f64) -> Self {
        Self { start_s, end_s }
    }

    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// Multi-channel signal with seizure annotations.
///
/// Samples are stored channel-major: `data[channel][t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording<T> {
    sample_rate: f64,
    channels: Vec<String>,
    data: Vec<Vec<T>>,
    annotations: Vec<Annotation>,
}

impl<T: Scalar> Recording<T> {
    pub fn new(
        sample_rate: f64,
        channels: Vec<String>,
        data: Vec<Vec<T>>,
        annotations: Vec<Annotation>,
    ) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::invalid(format!("sample rate must be positive, got {sample_rate}")));
        }
        if channels.is_empty() {
            return Err(Error::invalid("recording needs at least one channel"));
        }
        if channels.len() != data.len() {
            return Err(Error::invalid(format!(
                "{} channel names for {} data channels",
                channels.len(),
                data.len()
            )));
        }
        let len = data[0].len();
        if data.iter().any(|c| c.len() != len) {
            return Err(Error::invalid("channels have different lengths"));
        }
        let rec = Self {
            sample_rate,
            channels,
            data,
            annotations,
        };
        validate_annotations(&rec.annotations, rec.duration_s())?;
        Ok(rec)
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn num_samples(&self) -> usize {
        self.data[0].len()
    }

    pub fn duration_s(&self) -> f64 {
        self.num_samples() as f64 / self.sample_rate
    }

    pub fn channel(&self, c: usize) -> &[T] {
        &self.data[c]
    }

    pub fn data(&self) -> &[Vec<T>] {
        &self.data
    }

    pub fn annotations(&self) -> &[Annotation] {
        &self.annotations
    }

    /// Same metadata, new channel data.
    pub fn with_data(&self, data: Vec<Vec<T>>) -> Result<Self> {
        Self::new(
            self.sample_rate,
            self.channels.clone(),
            data,
            self.annotations.clone(),
        )
    }

    /// Samples `[start, end)` with annotations clipped and shifted.
    pub fn segment(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.num_samples() {
            return Err(Error::invalid(format!(
                "segment [{start}, {end}) out of range for {} samples",
                self.num_samples()
            )));
        }
        let (t0, t1) = (start as f64 / self.sample_rate, end as f64 / self.sample_rate);
        let annotations = self
            .annotations
            .iter()
            .filter(|a| a.end_s > t0 && a.start_s < t1)
            .map(|a| Annotation::new(a.start_s.max(t0) - t0, a.end_s.min(t1) - t0))
            .collect();
        Self::new(
            self.sample_rate,
            self.channels.clone(),
            self.data.iter().map(|c| c[start..end].to_vec()).collect(),
            annotations,
        )
    }

    pub fn cast<U: Scalar>(&self) -> Recording<U> {
        Recording {
            sample_rate: self.sample_rate,
            channels: self.channels.clone(),
            data: self
                .data
                .iter()
                .map(|c| c.iter().map(|&v| U::of_f64(v.as_f64())).collect())
                .collect(),
            annotations: self.annotations.clone(),
        }
    }
}

/// Annotations must be ordered, non-overlapping, `start < end`, in bounds.
pub fn validate_annotations(annotations: &[Annotation], duration_s: f64) -> Result<()> {
    let eps = 1e-9;
    let mut prev_end = f64::NEG_INFINITY;
    for (i, a) in annotations.iter().enumerate() {
        if !(a.start_s < a.end_s) {
            return Err(Error::invalid(format!(
                "annotation {i}: start {} not before end {}",
                a.start_s, a.end_s
            )));
        }
        if a.start_s < -eps || a.end_s > duration_s + eps {
            return Err(Error::invalid(format!(
                "annotation {i}: [{}, {}] outside recording of {duration_s} s",
                a.start_s, a.end_s
            )));
        }
        if a.start_s < prev_end {
            return Err(Error::invalid(format!(
                "annotation {i} overlaps or precedes the previous one"
            )));
        }
        prev_end = a.end_s;
    }
    Ok(())
}
