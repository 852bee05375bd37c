//! Per-window, per-channel features: amplitude, line length and band powers.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::recording::Recording;
use super::tensor::FeatureTensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Frequency bands, `[low, high)` in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Band {
    Dc,
    Mov,
    Delta,
    Theta,
    Alpha,
    Middle,
    Beta,
    Gamma,
}

impl Band {
    pub const ALL: [Band; 8] = [
        Band::Dc,
        Band::Mov,
        Band::Delta,
        Band::Theta,
        Band::Alpha,
        Band::Middle,
        Band::Beta,
        Band::Gamma,
    ];

    pub fn range(self) -> (f64, f64) {
        match self {
            Band::Dc => (0.0, 0.5),
            Band::Mov => (0.1, 0.5),
            Band::Delta => (0.5, 4.0),
            Band::Theta => (4.0, 8.0),
            Band::Alpha => (8.0, 12.0),
            Band::Middle => (12.0, 13.0),
            Band::Beta => (12.0, 30.0),
            Band::Gamma => (30.0, 45.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Band::Dc => "dc",
            Band::Mov => "mov",
            Band::Delta => "delta",
            Band::Theta => "theta",
            Band::Alpha => "alpha",
            Band::Middle => "middle",
            Band::Beta => "beta",
            Band::Gamma => "gamma",
        }
    }
}

/// Range over which total power is measured.
pub const TOTAL_POWER_BAND: (f64, f64) = (0.0, 45.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Feature {
    MeanAmpl,
    LineLength,
    Power(Band),
    TotalPower,
    RelPower(Band),
}

impl Feature {
    pub fn name(&self) -> String {
        match self {
            Feature::MeanAmpl => "mean_ampl".into(),
            Feature::LineLength => "line_length".into(),
            Feature::Power(b) => format!("p_{}", b.name()),
            Feature::TotalPower => "p_tot".into(),
            Feature::RelPower(b) => format!("p_{}_rel", b.name()),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean_ampl" => return Ok(Feature::MeanAmpl),
            "line_length" => return Ok(Feature::LineLength),
            "p_tot" => return Ok(Feature::TotalPower),
            _ => {}
        }
        for b in Band::ALL {
            if s == format!("p_{}", b.name()) {
                return Ok(Feature::Power(b));
            }
            if s == format!("p_{}_rel", b.name()) {
                return Ok(Feature::RelPower(b));
            }
        }
        Err(Error::invalid(format!("unknown feature name {s:?}")))
    }
}

/// The default 19-feature set.
pub fn default_features() -> Vec<Feature> {
    let mut out = vec![Feature::MeanAmpl, Feature::LineLength];
    out.extend(Band::ALL.iter().map(|&b| Feature::Power(b)));
    out.push(Feature::TotalPower);
    out.extend(Band::ALL.iter().map(|&b| Feature::RelPower(b)));
    out
}

pub fn feature_names(features: &[Feature]) -> Vec<String> {
    features.iter().map(Feature::name).collect()
}

pub fn parse_features(names: &[String]) -> Result<Vec<Feature>> {
    names.iter().map(|n| n.parse()).collect()
}

/// One-sided periodogram of a mean-removed, rectangular-tapered window.
///
/// `power[k]` is the share of the window's variance at frequency
/// `k * sample_rate / n`, so summing all bins gives the variance.
pub struct Periodogram<T: Scalar> {
    n: usize,
    sample_rate: f64,
    fft: Arc<dyn Fft<T>>,
    buf: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Scalar> Periodogram<T> {
    pub fn new(n: usize, sample_rate: f64) -> Self {
        let fft = FftPlanner::<T>::new().plan_fft_forward(n);
        let scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
        Self {
            n,
            sample_rate,
            fft,
            buf: vec![Complex::default(); n],
            scratch,
        }
    }

    pub fn frequency(&self, k: usize) -> f64 {
        k as f64 * self.sample_rate / self.n as f64
    }

    pub fn compute(&mut self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        let nt = T::of_usize(self.n);
        let mean = x.iter().copied().sum::<T>() / nt;
        for (b, &v) in self.buf.iter_mut().zip(x) {
            *b = Complex::new(v - mean, T::zero());
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        let n2 = nt * nt;
        let two = T::of_f64(2.0);
        (0..=self.n / 2)
            .map(|k| {
                let p = self.buf[k].norm_sqr() / n2;
                if k == 0 || (self.n.is_multiple_of(2) && k == self.n / 2) {
                    p
                } else {
                    two * p
                }
            })
            .collect()
    }

    /// Sum of bins whose frequency lies in `[lo, hi)`.
    pub fn band_power(&self, power: &[T], (lo, hi): (f64, f64)) -> T {
        power
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let f = self.frequency(*k);
                f >= lo && f < hi
            })
            .map(|(_, &p)| p)
            .sum()
    }
}

pub fn mean_amplitude<T: Scalar>(x: &[T]) -> T {
    x.iter().map(|v| v.abs()).sum::<T>() / T::of_usize(x.len())
}

pub fn line_length<T: Scalar>(x: &[T]) -> T {
    x.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Computes the configured features of one window of one channel.
pub struct WindowFeatures<T: Scalar> {
    features: Vec<Feature>,
    periodogram: Periodogram<T>,
}

impl<T: Scalar> WindowFeatures<T> {
    pub fn new(features: Vec<Feature>, window_samples: usize, sample_rate: f64) -> Self {
        Self {
            features,
            periodogram: Periodogram::new(window_samples, sample_rate),
        }
    }

    pub fn compute(&mut self, x: &[T], out: &mut Vec<T>) {
        let power = self.periodogram.compute(x);
        let total = self.periodogram.band_power(&power, TOTAL_POWER_BAND);
        for f in &self.features {
            let v = match f {
                Feature::MeanAmpl => mean_amplitude(x),
                Feature::LineLength => line_length(x),
                Feature::Power(b) => self.periodogram.band_power(&power, b.range()),
                Feature::TotalPower => total,
                Feature::RelPower(b) => {
                    if total > T::zero() {
                        self.periodogram.band_power(&power, b.range()) / total
                    } else {
                        T::zero()
                    }
                }
            };
            out.push(v);
        }
    }
}

/// Window geometry in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Windowing {
    pub len: usize,
    pub step: usize,
}

impl Windowing {
    pub fn new(window_len_s: f64, step_s: f64, sample_rate: f64) -> Result<Self> {
        if !(window_len_s > 0.0 && step_s > 0.0) {
            return Err(Error::invalid("window length and step must be positive"));
        }
        let len = (window_len_s * sample_rate).round() as usize;
        let step = (step_s * sample_rate).round() as usize;
        if len < 2 || step == 0 {
            return Err(Error::invalid(format!(
                "window of {window_len_s} s / step {step_s} s too short at {sample_rate} Hz"
            )));
        }
        Ok(Self { len, step })
    }

    /// `floor((n - len) / step) + 1`, or 0 if the signal is shorter than a window.
    pub fn count(&self, num_samples: usize) -> usize {
        if num_samples < self.len {
            0
        } else {
            (num_samples - self.len) / self.step + 1
        }
    }
}

/// Label of a window: seizure iff at least half of it overlaps annotations.
pub fn window_label(start_s: f64, len_s: f64, annotations: &[super::Annotation]) -> u8 {
    let end_s = start_s + len_s;
    let overlap: f64 = annotations
        .iter()
        .map(|a| (a.end_s.min(end_s) - a.start_s.max(start_s)).max(0.0))
        .sum();
    u8::from(overlap >= 0.5 * len_s - 1e-9)
}

/// Slides a window over the recording and computes `features` per channel.
pub fn extract_features<T: Scalar>(
    rec: &Recording<T>,
    window_len_s: f64,
    step_s: f64,
    features: &[Feature],
) -> Result<FeatureTensor<T>> {
    if features.is_empty() {
        return Err(Error::invalid("feature list is empty"));
    }
    let fs = rec.sample_rate();
    let win = Windowing::new(window_len_s, step_s, fs)?;
    let num_windows = win.count(rec.num_samples());
    if num_windows == 0 {
        return Err(Error::invalid(format!(
            "recording of {:.2} s shorter than one {window_len_s} s window",
            rec.duration_s()
        )));
    }
    let num_ch = rec.num_channels();
    let mut wf = WindowFeatures::new(features.to_vec(), win.len, fs);
    let mut values = Vec::with_capacity(num_windows * num_ch * features.len());
    let mut labels = Vec::with_capacity(num_windows);
    let len_s = win.len as f64 / fs;
    for w in 0..num_windows {
        let start = w * win.step;
        for c in 0..num_ch {
            wf.compute(&rec.channel(c)[start..start + win.len], &mut values);
        }
        labels.push(window_label(start as f64 / fs, len_s, rec.annotations()));
    }
    FeatureTensor::new(
        feature_names(features),
        num_ch,
        window_len_s,
        step_s,
        values,
        labels,
    )
}
