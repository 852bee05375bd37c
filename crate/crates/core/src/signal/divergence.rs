//! Jensen-Shannon divergence between class-conditional feature histograms.

use serde::{Deserialize, Serialize};

use super::tensor::FeatureTensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Base-2 Jensen-Shannon divergence of two histograms (normalized here).
/// Lies in `[0, 1]`.
pub fn js_divergence_hist(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::invalid("histograms must be non-empty and equally long"));
    }
    let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
    if !(sp > 0.0 && sq > 0.0) {
        return Err(Error::UndefinedDivergence("a histogram has zero mass".into()));
    }
    let kl_to_mid = |a: f64, m: f64| if a > 0.0 { a * (a / m).log2() } else { 0.0 };
    let js = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| {
            let (a, b) = (a / sp, b / sq);
            let m = 0.5 * (a + b);
            0.5 * (kl_to_mid(a, m) + kl_to_mid(b, m))
        })
        .sum::<f64>();
    Ok(js.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsDivergence {
    pub per_channel: Vec<f64>,
    /// Histograms pooled over all channels.
    pub pooled: f64,
}

/// Divergence between the seizure and non-seizure histograms of one
/// feature's bins.
pub fn js_divergence<T: Scalar>(tensor: &FeatureTensor<T>, feature: usize) -> Result<JsDivergence> {
    if feature >= tensor.num_features() {
        return Err(Error::invalid(format!("feature index {feature} out of range")));
    }
    let nb = tensor.num_bins();
    if tensor.bins().is_none() {
        return Err(Error::Precondition("tensor has not been discretized".into()));
    }
    let labels = tensor.labels();
    if !labels.contains(&1) || !labels.contains(&0) {
        return Err(Error::UndefinedDivergence(
            "both seizure and non-seizure windows are required".into(),
        ));
    }
    let nc = tensor.num_channels();
    let nf = tensor.num_features();
    let mut hist = vec![[vec![0.0; nb], vec![0.0; nb]]; nc];
    for (w, &label) in labels.iter().enumerate() {
        let bins = tensor.window_bins(w)?;
        for (c, h) in hist.iter_mut().enumerate() {
            h[label as usize][bins[c * nf + feature] as usize] += 1.0;
        }
    }
    let per_channel = hist
        .iter()
        .map(|[ns, s]| js_divergence_hist(s, ns))
        .collect::<Result<Vec<_>>>()?;
    let mut pooled = [vec![0.0; nb], vec![0.0; nb]];
    for h in &hist {
        for k in 0..2 {
            for (a, b) in pooled[k].iter_mut().zip(&h[k]) {
                *a += b;
            }
        }
    }
    Ok(JsDivergence {
        per_channel,
        pooled: js_divergence_hist(&pooled[1], &pooled[0])?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_zero() {
        assert_eq!(js_divergence_hist(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_is_one() {
        let d = js_divergence_hist(&[1.0, 0.0], &[0.0, 5.0]).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_vs_point_mass() {
        // 0.5*(0.5*log2(2/3) + 0.5*log2(2)) + 0.5*log2(4/3)
        let expect = 0.5 * (0.5 * (2.0f64 / 3.0).log2() + 0.5) + 0.5 * (4.0f64 / 3.0).log2();
        let d = js_divergence_hist(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert!((d - expect).abs() < 1e-12);
        assert!((d - 0.3113).abs() < 5e-5);
    }

    #[test]
    fn symmetric() {
        let (p, q) = ([0.1, 0.2, 0.7], [0.3, 0.3, 0.4]);
        assert_eq!(js_divergence_hist(&p, &q).unwrap(), js_divergence_hist(&q, &p).unwrap());
    }

    #[test]
    fn missing_class_is_undefined() {
        let mut t = FeatureTensor::new(vec!["f".into()], 1, 4.0, 0.5, vec![1.0, 2.0], vec![0, 0])
            .unwrap();
        let p = crate::signal::fit_normalization(&t).unwrap();
        t.discretize(&p, 4).unwrap();
        assert!(matches!(js_divergence(&t, 0), Err(Error::UndefinedDivergence(_))));
    }
}
