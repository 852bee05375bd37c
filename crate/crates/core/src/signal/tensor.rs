//! Window x channel x feature tensors, min-max normalization and binning.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-(channel, feature) min/max fitted on training windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormParams<T> {
    pub num_channels: usize,
    pub num_features: usize,
    /// Flat `[channel][feature]`.
    pub min: Vec<T>,
    pub max: Vec<T>,
}

impl<T: Scalar> NormParams<T> {
    /// Fits over every window of every tensor. A constant column gets
    /// `max = min + 1`.
    pub fn fit(tensors: &[&FeatureTensor<T>]) -> Result<Self> {
        let Some(first) = tensors.first() else {
            return Err(Error::invalid("no tensors to fit normalization on"));
        };
        let (nc, nf) = (first.num_channels, first.num_features());
        if tensors
            .iter()
            .any(|t| t.num_channels != nc || t.num_features() != nf)
        {
            return Err(Error::invalid("tensors disagree on channel/feature shape"));
        }
        let total: usize = tensors.iter().map(|t| t.num_windows()).sum();
        if total < 2 {
            return Err(Error::invalid(format!(
                "normalization needs at least 2 windows, got {total}"
            )));
        }
        let mut min = vec![T::infinity(); nc * nf];
        let mut max = vec![T::neg_infinity(); nc * nf];
        for t in tensors {
            for row in t.values.chunks_exact(nc * nf) {
                for ((lo, hi), &v) in min.iter_mut().zip(max.iter_mut()).zip(row) {
                    if v < *lo {
                        *lo = v;
                    }
                    if v > *hi {
                        *hi = v;
                    }
                }
            }
        }
        for (lo, hi) in min.iter().zip(max.iter_mut()) {
            if *hi <= *lo {
                *hi = *lo + T::one();
            }
        }
        Ok(Self {
            num_channels: nc,
            num_features: nf,
            min,
            max,
        })
    }

    pub fn cast<U: Scalar>(&self) -> NormParams<U> {
        let conv = |v: &Vec<T>| v.iter().map(|x| U::of_f64(x.as_f64())).collect();
        NormParams {
            num_channels: self.num_channels,
            num_features: self.num_features,
            min: conv(&self.min),
            max: conv(&self.max),
        }
    }
}

/// `floor((v - min) / (max - min) * num_bins)` clamped to `[0, num_bins)`.
pub fn bin_value<T: Scalar>(v: T, min: T, max: T, num_bins: usize) -> u16 {
    let nb = T::of_usize(num_bins);
    let scaled = ((v - min) / (max - min) * nb).floor();
    if !(scaled > T::zero()) {
        return 0;
    }
    let top = num_bins - 1;
    scaled.to_usize().map_or(top, |b| b.min(top)) as u16
}

/// Features of consecutive windows, stored flat as `[window][channel][feature]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor<T> {
    feature_names: Vec<String>,
    num_channels: usize,
    window_len_s: f64,
    step_s: f64,
    values: Vec<T>,
    labels: Vec<u8>,
    bins: Option<Vec<u16>>,
    num_bins: usize,
    norm_params: Option<NormParams<T>>,
}

impl<T: Scalar> FeatureTensor<T> {
    pub fn new(
        feature_names: Vec<String>,
        num_channels: usize,
        window_len_s: f64,
        step_s: f64,
        values: Vec<T>,
        labels: Vec<u8>,
    ) -> Result<Self> {
        if feature_names.is_empty() || num_channels == 0 {
            return Err(Error::invalid("tensor needs at least one channel and feature"));
        }
        let row = num_channels * feature_names.len();
        if values.len() != row * labels.len() {
            return Err(Error::invalid(format!(
                "{} values do not match {} windows x {num_channels} channels x {} features",
                values.len(),
                labels.len(),
                feature_names.len()
            )));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::invalid("labels must be 0 or 1"));
        }
        Ok(Self {
            feature_names,
            num_channels,
            window_len_s,
            step_s,
            values,
            labels,
            bins: None,
            num_bins: 0,
            norm_params: None,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn num_windows(&self) -> usize {
        self.labels.len()
    }

    pub fn window_len_s(&self) -> f64 {
        self.window_len_s
    }

    pub fn step_s(&self) -> f64 {
        self.step_s
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn norm_params(&self) -> Option<&NormParams<T>> {
        self.norm_params.as_ref()
    }

    pub fn bins(&self) -> Option<&[u16]> {
        self.bins.as_deref()
    }

    fn stride(&self) -> usize {
        self.num_channels * self.num_features()
    }

    pub fn value(&self, w: usize, c: usize, f: usize) -> T {
        self.values[w * self.stride() + c * self.num_features() + f]
    }

    /// Feature values of window `w`, channel `c`.
    pub fn row(&self, w: usize, c: usize) -> &[T] {
        let nf = self.num_features();
        let start = w * self.stride() + c * nf;
        &self.values[start..start + nf]
    }

    /// Bin matrix `[channel][feature]` of window `w`.
    pub fn window_bins(&self, w: usize) -> Result<&[u16]> {
        let bins = self
            .bins
            .as_ref()
            .ok_or_else(|| Error::Precondition("tensor has not been discretized".into()))?;
        let s = self.stride();
        Ok(&bins[w * s..(w + 1) * s])
    }

    /// Bins this tensor with `params`; values outside the fitted range clip
    /// to the edge bins.
    pub fn discretize(&mut self, params: &NormParams<T>, num_bins: usize) -> Result<()> {
        if num_bins < 2 || num_bins > u16::MAX as usize {
            return Err(Error::invalid(format!("bin count {num_bins} out of range")));
        }
        if params.num_channels != self.num_channels || params.num_features != self.num_features() {
            return Err(Error::Precondition(
                "normalization parameters fitted on a different shape".into(),
            ));
        }
        let s = self.stride();
        let bins = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let k = i % s;
                bin_value(v, params.min[k], params.max[k], num_bins)
            })
            .collect();
        self.bins = Some(bins);
        self.num_bins = num_bins;
        self.norm_params = Some(params.clone());
        Ok(())
    }

    /// Concatenates windows of tensors with identical layout.
    pub fn concat(parts: &[&FeatureTensor<T>]) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::invalid("nothing to concatenate"));
        };
        if parts.iter().any(|p| {
            p.feature_names != first.feature_names || p.num_channels != first.num_channels
        }) {
            return Err(Error::invalid("tensors disagree on channels or features"));
        }
        let values = parts.iter().flat_map(|p| p.values.iter().copied()).collect();
        let labels = parts.iter().flat_map(|p| p.labels.iter().copied()).collect();
        let mut out = Self::new(
            first.feature_names.clone(),
            first.num_channels,
            first.window_len_s,
            first.step_s,
            values,
            labels,
        )?;
        if parts.iter().all(|p| p.bins.is_some() && p.num_bins == first.num_bins) {
            out.bins = Some(
                parts
                    .iter()
                    .flat_map(|p| p.bins.as_ref().unwrap().iter().copied())
                    .collect(),
            );
            out.num_bins = first.num_bins;
            out.norm_params = first.norm_params.clone();
        }
        Ok(out)
    }

    /// Keeps only the listed features, in the given order.
    pub fn select_features(&self, keep: &[usize]) -> Result<Self> {
        let nf = self.num_features();
        if keep.is_empty() || keep.iter().any(|&f| f >= nf) {
            return Err(Error::invalid("feature selection out of range"));
        }
        let mut values = Vec::with_capacity(self.num_windows() * self.num_channels * keep.len());
        for w in 0..self.num_windows() {
            for c in 0..self.num_channels {
                let row = self.row(w, c);
                values.extend(keep.iter().map(|&f| row[f]));
            }
        }
        Self::new(
            keep.iter().map(|&f| self.feature_names[f].clone()).collect(),
            self.num_channels,
            self.window_len_s,
            self.step_s,
            values,
            self.labels.clone(),
        )
    }

    /// Overrides the labels (used by synthetic fixtures).
    pub fn with_labels(mut self, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != self.labels.len() || labels.iter().any(|&l| l > 1) {
            return Err(Error::invalid("label vector does not match the tensor"));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn cast<U: Scalar>(&self) -> FeatureTensor<U> {
        FeatureTensor {
            feature_names: self.feature_names.clone(),
            num_channels: self.num_channels,
            window_len_s: self.window_len_s,
            step_s: self.step_s,
            values: self.values.iter().map(|v| U::of_f64(v.as_f64())).collect(),
            labels: self.labels.clone(),
            bins: self.bins.clone(),
            num_bins: self.num_bins,
            norm_params: self.norm_params.as_ref().map(NormParams::cast),
        }
    }
}

/// Min-max parameters of a single training tensor.
pub fn fit_normalization<T: Scalar>(train: &FeatureTensor<T>) -> Result<NormParams<T>> {
    NormParams::fit(&[train])
}

/// Returns a copy of `tensor` with bins filled from `params`.
pub fn discretize<T: Scalar>(
    tensor: &FeatureTensor<T>,
    params: &NormParams<T>,
    num_bins: usize,
) -> Result<FeatureTensor<T>> {
    let mut out = tensor.clone();
    out.discretize(params, num_bins)?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sidecar {
    format: String,
    layout: String,
    feature_names: Vec<String>,
    num_windows: usize,
    num_channels: usize,
    window_len_s: f64,
    step_s: f64,
    num_bins: usize,
    has_bins: bool,
    norm_params: Option<NormParams<f64>>,
}

const TENSOR_FORMAT: &str = "hdenc-feature-tensor/1";

fn sidecar_paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("json"), stem.with_extension("bin"))
}

impl<T: Scalar> FeatureTensor<T> {
    /// Writes `<stem>.json` (header) and `<stem>.bin`: values as f64, then
    /// bins as u16 (if present), then labels as u8; all little-endian,
    /// window-major.
    pub fn save(&self, stem: &Path) -> Result<()> {
        let (json_path, bin_path) = sidecar_paths(stem);
        let header = Sidecar {
            format: TENSOR_FORMAT.into(),
            layout: "values:f64[window][channel][feature], bins:u16[same] (if has_bins), labels:u8[window]".into(),
            feature_names: self.feature_names.clone(),
            num_windows: self.num_windows(),
            num_channels: self.num_channels,
            window_len_s: self.window_len_s,
            step_s: self.step_s,
            num_bins: self.num_bins,
            has_bins: self.bins.is_some(),
            norm_params: self.norm_params.as_ref().map(NormParams::cast),
        };
        let json = serde_json::to_string_pretty(&header)?;
        fs::write(&json_path, json + "\n").map_err(|e| Error::io(&json_path, e))?;

        let mut buf = Vec::with_capacity(self.values.len() * 10 + self.labels.len());
        for v in &self.values {
            buf.extend_from_slice(&v.as_f64().to_le_bytes());
        }
        if let Some(bins) = &self.bins {
            for b in bins {
                buf.extend_from_slice(&b.to_le_bytes());
            }
        }
        buf.extend_from_slice(&self.labels);
        fs::write(&bin_path, buf).map_err(|e| Error::io(&bin_path, e))
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let (json_path, bin_path) = sidecar_paths(stem);
        let text = fs::read_to_string(&json_path).map_err(|e| Error::io(&json_path, e))?;
        let header: Sidecar = serde_json::from_str(&text).map_err(|e| {
            Error::parse(&json_path, format!("line {}", e.line()), e.to_string())
        })?;
        if header.format != TENSOR_FORMAT {
            return Err(Error::parse(&json_path, "format", "unsupported tensor format"));
        }
        let bytes = fs::read(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
        let n = header.num_windows * header.num_channels * header.feature_names.len();
        let expected = n * 8 + if header.has_bins { n * 2 } else { 0 } + header.num_windows;
        if bytes.len() != expected {
            return Err(Error::parse(
                &bin_path,
                format!("byte {}", bytes.len().min(expected)),
                format!("expected {expected} bytes, found {}", bytes.len()),
            ));
        }
        let values = bytes[..n * 8]
            .chunks_exact(8)
            .map(|c| T::of_f64(f64::from_le_bytes(c.try_into().unwrap())))
            .collect();
        let mut offset = n * 8;
        let bins = header.has_bins.then(|| {
            let b = bytes[offset..offset + n * 2]
                .chunks_exact(2)
                .map(|c| u16::from_le_bytes([c[0], c[1]]))
                .collect::<Vec<_>>();
            offset += n * 2;
            b
        });
        let labels = bytes[offset..].to_vec();
        let mut t = Self::new(
            header.feature_names,
            header.num_channels,
            header.window_len_s,
            header.step_s,
            values,
            labels,
        )
        .map_err(|e| Error::parse(&bin_path, "labels", e.to_string()))?;
        t.bins = bins;
        t.num_bins = header.num_bins;
        t.norm_params = header.norm_params.map(|p| p.cast());
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tensor(values: Vec<f64>, labels: Vec<u8>) -> FeatureTensor<f64> {
        FeatureTensor::new(vec!["f".into()], 1, 4.0, 0.5, values, labels).unwrap()
    }

    #[test]
    fn fit_examples() {
        let p = fit_normalization(&tensor(vec![1.0, 2.0, 3.0], vec![0, 0, 1])).unwrap();
        assert_eq!((p.min[0], p.max[0]), (1.0, 3.0));
        let p = fit_normalization(&tensor(vec![5.0, 5.0], vec![0, 1])).unwrap();
        assert_eq!((p.min[0], p.max[0]), (5.0, 6.0));
        let p = fit_normalization(&tensor(vec![-2.0, 0.0, 4.0], vec![0, 1, 0])).unwrap();
        assert_eq!((p.min[0], p.max[0]), (-2.0, 4.0));
    }

    #[test]
    fn fit_needs_two_windows() {
        assert!(fit_normalization(&tensor(vec![1.0], vec![0])).is_err());
        assert!(NormParams::<f64>::fit(&[]).is_err());
    }

    #[test]
    fn bin_examples() {
        assert_eq!(bin_value(0.0, 0.0, 10.0, 20), 0);
        assert_eq!(bin_value(10.0, 0.0, 10.0, 20), 19);
        assert_eq!(bin_value(5.0, 0.0, 10.0, 20), 10);
        assert_eq!(bin_value(110.0, 0.0, 10.0, 20), 19);
        assert_eq!(bin_value(-3.0, 0.0, 10.0, 20), 0);
        assert_eq!(bin_value(f64::NAN, 0.0, 10.0, 20), 0);
    }

    #[test]
    fn discretize_requires_matching_params() {
        let t = tensor(vec![1.0, 2.0], vec![0, 1]);
        assert!(t.window_bins(0).is_err());
        let other = NormParams {
            num_channels: 2,
            num_features: 1,
            min: vec![0.0; 2],
            max: vec![1.0; 2],
        };
        assert!(discretize(&t, &other, 20).is_err());
        let p = fit_normalization(&t).unwrap();
        let d = discretize(&t, &p, 4).unwrap();
        assert_eq!(d.bins().unwrap(), &[0, 3]);
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = FeatureTensor::new(
            vec!["a".into(), "b".into()],
            2,
            4.0,
            0.5,
            (0..12).map(|i| i as f64 * 0.37 - 1.0).collect(),
            vec![0, 1, 1],
        )
        .unwrap();
        let p = NormParams::fit(&[&t]).unwrap();
        t.discretize(&p, 20).unwrap();
        let stem = dir.path().join("fold_00");
        t.save(&stem).unwrap();
        assert_eq!(FeatureTensor::<f64>::load(&stem).unwrap(), t);
    }
}
