//! Per-feature decisions on FeatAppend encodings.

use crate::encoders::{EncoderConfig, Scheme};
use crate::error::{Error, Result};
use crate::hdc::Hypervector;
use crate::learner::{ClassModels, Label};

/// Bit layout of a FeatAppend vector: feature `f` owns `[f*d, (f+1)*d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatAppendView {
    pub num_feat: usize,
    pub subdim: usize,
}

impl FeatAppendView {
    pub fn new(cfg: &EncoderConfig) -> Result<Self> {
        if cfg.scheme != Scheme::FeatAppend {
            return Err(Error::SchemeMismatch(format!(
                "per-feature analysis needs feat-append models, got {}",
                cfg.scheme
            )));
        }
        cfg.validate()?;
        Ok(Self {
            num_feat: cfg.num_feat,
            subdim: cfg.subdim(),
        })
    }

    pub fn dim(&self) -> usize {
        self.num_feat * self.subdim
    }

    pub fn range(&self, f: usize) -> Result<(usize, usize)> {
        if f >= self.num_feat {
            return Err(Error::invalid(format!(
                "feature {f} out of range for {} features",
                self.num_feat
            )));
        }
        Ok((f * self.subdim, (f + 1) * self.subdim))
    }

    fn check_models(&self, models: &ClassModels) -> Result<()> {
        if models.dim() != self.dim() {
            return Err(Error::SchemeMismatch(format!(
                "models of dimension {} do not match the feat-append layout {}x{}",
                models.dim(),
                self.num_feat,
                self.subdim
            )));
        }
        Ok(())
    }

    /// `(dist_s, dist_ns)` of every feature slice of `x`.
    pub fn distances(&self, x: &Hypervector, models: &ClassModels) -> Result<Vec<(f64, f64)>> {
        self.check_models(models)?;
        (0..self.num_feat)
            .map(|f| {
                let (s, e) = self.range(f)?;
                Ok((
                    x.hamming_range(&models.seizure.hv, s, e)?,
                    x.hamming_range(&models.nonseizure.hv, s, e)?,
                ))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureDecision {
    pub label: Label,
    pub dist_s: f64,
    pub dist_ns: f64,
}

fn decide(dist_s: f64, dist_ns: f64) -> Label {
    if dist_s < dist_ns {
        Label::Seizure
    } else {
        Label::NonSeizure
    }
}

/// Nearest class using only feature `f`'s bits; ties go to non-seizure.
pub fn feature_predict(
    x: &Hypervector,
    models: &ClassModels,
    f: usize,
    cfg: &EncoderConfig,
) -> Result<FeatureDecision> {
    let view = FeatAppendView::new(cfg)?;
    view.check_models(models)?;
    let (s, e) = view.range(f)?;
    let dist_s = x.hamming_range(&models.seizure.hv, s, e)?;
    let dist_ns = x.hamming_range(&models.nonseizure.hv, s, e)?;
    Ok(FeatureDecision {
        label: decide(dist_s, dist_ns),
        dist_s,
        dist_ns,
    })
}

/// Each feature's distance gap relative to the mean gap at the same window.
/// All-zero gaps give all-zero certainty.
pub fn certainty(dists: &[(f64, f64)]) -> Vec<f64> {
    let gaps: Vec<f64> = dists.iter().map(|(s, ns)| (s - ns).abs()).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len().max(1) as f64;
    if mean > 0.0 {
        gaps.iter().map(|g| g / mean).collect()
    } else {
        vec![0.0; gaps.len()]
    }
}

/// Relative certainty surplus on correct over wrong predictions.
///
/// With no wrong predictions the result is `+inf`, with no correct ones
/// `-inf`. If wrong predictions carry zero mean certainty the result is
/// `+inf` when correct ones carry some, else 0.
pub fn confidence(certainty: &[f64], predictions: &[u8], truth: &[u8]) -> Result<f64> {
    if certainty.len() != predictions.len() || predictions.len() != truth.len() {
        return Err(Error::invalid("certainty, predictions and truth differ in length"));
    }
    let (mut sum_ok, mut n_ok, mut sum_bad, mut n_bad) = (0.0, 0usize, 0.0, 0usize);
    for ((&c, &p), &t) in certainty.iter().zip(predictions).zip(truth) {
        if p == t {
            sum_ok += c;
            n_ok += 1;
        } else {
            sum_bad += c;
            n_bad += 1;
        }
    }
    if n_bad == 0 {
        return Ok(f64::INFINITY);
    }
    if n_ok == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let (ok, bad) = (sum_ok / n_ok as f64, sum_bad / n_bad as f64);
    if bad == 0.0 {
        return Ok(if ok > 0.0 { f64::INFINITY } else { 0.0 });
    }
    Ok((ok - bad) / bad)
}

/// Normalized distance between the class prototypes on feature `f`'s bits.
pub fn separability(models: &ClassModels, f: usize, cfg: &EncoderConfig) -> Result<f64> {
    let view = FeatAppendView::new(cfg)?;
    view.check_models(models)?;
    let (s, e) = view.range(f)?;
    models.seizure.hv.hamming_range(&models.nonseizure.hv, s, e)
}

/// Pearson correlation between the prediction series of every pair of
/// features (`predictions[f][w]`). A constant series correlates 0 with
/// everything except itself.
pub fn prediction_correlation(predictions: &[Vec<u8>]) -> Result<Vec<Vec<f64>>> {
    let n = predictions.first().map_or(0, Vec::len);
    if n < 2 {
        return Err(Error::invalid("correlation needs at least 2 windows"));
    }
    if predictions.iter().any(|p| p.len() != n) {
        return Err(Error::invalid("prediction series differ in length"));
    }
    let stats: Vec<(f64, f64)> = predictions
        .iter()
        .map(|p| {
            let mean = p.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
            let var = p.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>();
            (mean, var)
        })
        .collect();
    let nf = predictions.len();
    let mut out = vec![vec![0.0; nf]; nf];
    for i in 0..nf {
        out[i][i] = 1.0;
        for j in i + 1..nf {
            let ((mi, vi), (mj, vj)) = (stats[i], stats[j]);
            if vi == 0.0 || vj == 0.0 {
                continue;
            }
            let cov: f64 = predictions[i]
                .iter()
                .zip(&predictions[j])
                .map(|(&a, &b)| (a as f64 - mi) * (b as f64 - mj))
                .sum();
            let r = (cov / (vi * vj).sqrt()).clamp(-1.0, 1.0);
            out[i][j] = r;
            out[j][i] = r;
        }
    }
    Ok(out)
}

/// `Σ_{f ∈ active} (dist_ns - dist_s)`.
pub fn vote_score(dists: &[(f64, f64)], active: &[usize]) -> Result<f64> {
    if active.is_empty() {
        return Err(Error::invalid("vote needs at least one active feature"));
    }
    active
        .iter()
        .map(|&f| {
            dists
                .get(f)
                .map(|(s, ns)| ns - s)
                .ok_or_else(|| Error::invalid(format!("feature {f} out of range")))
        })
        .sum()
}

/// Seizure iff the summed gap is positive.
pub fn vote(dists: &[(f64, f64)], active: &[usize]) -> Result<Label> {
    Ok(if vote_score(dists, active)? > 0.0 {
        Label::Seizure
    } else {
        Label::NonSeizure
    })
}
