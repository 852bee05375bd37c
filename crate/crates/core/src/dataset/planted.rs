//! Feature tensors with planted class structure, for exercising per-feature
//! analysis without going through signal synthesis.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hdc::rng::{stream_rng, Stream};
use crate::signal::{default_features, feature_names, FeatureTensor, DEFAULT_STEP_S, DEFAULT_WINDOW_S};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantedFeatures {
    pub num_channels: usize,
    pub feature_names: Vec<String>,
    /// `(feature, shift)`: seizure windows move the feature by `shift`
    /// noise standard deviations on every channel.
    pub effects: Vec<(usize, f64)>,
    /// `(source, copy)`: `copy` repeats `source` exactly.
    pub duplicates: Vec<(usize, usize)>,
    pub num_folds: usize,
    /// Seizure windows per fold, drawn uniformly from this range.
    pub seizure_windows: (usize, usize),
    /// Non-seizure windows per seizure window, split before and after.
    pub ratio: usize,
    /// AR(1) coefficient of the per-column noise.
    pub ar_coeff: f64,
    pub seed: u64,
}

impl Default for PlantedFeatures {
    fn default() -> Self {
        Self {
            num_channels: 2,
            feature_names: feature_names(&default_features()),
            effects: vec![(0, 2.64), (3, 2.16), (6, 1.8), (9, 1.44)],
            duplicates: Vec::new(),
            num_folds: 5,
            seizure_windows: (80, 160),
            ratio: 10,
            ar_coeff: 0.5,
            seed: 1,
        }
    }
}

impl PlantedFeatures {
    /// Two identical informative features plus a weaker independent one.
    pub fn redundancy() -> Self {
        Self {
            effects: vec![(0, 2.0), (2, 1.5)],
            duplicates: vec![(0, 1)],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nf = self.feature_names.len();
        if nf == 0 || self.num_channels == 0 || self.num_folds == 0 {
            return Err(Error::invalid("need features, channels and folds"));
        }
        if self.effects.iter().any(|&(f, _)| f >= nf)
            || self.duplicates.iter().any(|&(a, b)| a >= nf || b >= nf || a == b)
        {
            return Err(Error::invalid("planted feature index out of range"));
        }
        let (lo, hi) = self.seizure_windows;
        if lo == 0 || lo > hi {
            return Err(Error::invalid("invalid seizure window range"));
        }
        if !(0.0..1.0).contains(&self.ar_coeff) {
            return Err(Error::invalid("AR coefficient must be in [0, 1)"));
        }
        Ok(())
    }

    /// One tensor per fold; each holds a single seizure block in the middle.
    pub fn generate(&self) -> Result<Vec<FeatureTensor<f64>>> {
        self.validate()?;
        let (nc, nf) = (self.num_channels, self.feature_names.len());
        let innov = (1.0 - self.ar_coeff * self.ar_coeff).sqrt();
        (0..self.num_folds)
            .map(|fold| {
                let mut rng = stream_rng(self.seed, Stream::Synthesis, fold as u64);
                let (lo, hi) = self.seizure_windows;
                let ns = rng.random_range(lo..=hi);
                let before = ns * self.ratio / 2;
                let after = ns * self.ratio - before;
                let labels: Vec<u8> = [vec![0; before], vec![1; ns], vec![0; after]].concat();
                let mut state: Vec<f64> = (0..nc * nf).map(|_| StandardNormal.sample(&mut rng)).collect();
                let mut values = Vec::with_capacity(labels.len() * nc * nf);
                for &l in &labels {
                    let start = values.len();
                    for s in state.iter_mut() {
                        let e: f64 = StandardNormal.sample(&mut rng);
                        *s = self.ar_coeff * *s + innov * e;
                    }
                    values.extend_from_slice(&state);
                    let row = &mut values[start..];
                    if l == 1 {
                        for &(f, shift) in &self.effects {
                            for c in 0..nc {
                                row[c * nf + f] += shift;
                            }
                        }
                    }
                    for &(src, dst) in &self.duplicates {
                        for c in 0..nc {
                            row[c * nf + dst] = row[c * nf + src];
                        }
                    }
                }
                FeatureTensor::new(
                    self.feature_names.clone(),
                    nc,
                    DEFAULT_WINDOW_S,
                    DEFAULT_STEP_S,
                    values,
                    labels,
                )
            })
            .collect()
    }
}
