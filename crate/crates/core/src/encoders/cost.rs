//! Analytic memory and operation counts per encoded window.

use serde::{Deserialize, Serialize};

use super::config::{EncoderConfig, LevelTables, Scheme};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub scheme: Scheme,
    /// Total item-memory storage.
    pub memory_bits: u64,
    pub bind_ops: u64,
    /// Vectors summed into bundles.
    pub bundle_ops: u64,
    pub threshold_ops: u64,
    /// Dimension every operation acts on (D, or d for FeatAppend).
    pub op_dim: u64,
    pub bind_bit_ops: u64,
    /// `(bind_ops + bundle_ops + threshold_ops) * op_dim`.
    pub bit_ops: u64,
}

pub fn cost_model(cfg: &EncoderConfig) -> Result<CostReport> {
    cfg.validate()?;
    let (nf, nc) = (cfg.num_feat as u64, cfg.num_ch as u64);
    let level_vectors = cfg.num_bins as u64
        * match cfg.level_tables {
            LevelTables::Shared => 1,
            LevelTables::PerFeature => nf,
        };
    let op_dim = cfg.vector_dim() as u64;
    let id_vectors = match cfg.scheme {
        Scheme::FeatxVal => nf,
        Scheme::ChFeatCombxVal => nf * nc,
        Scheme::FeatxChxVal | Scheme::ChxFeatxVal => nf + nc,
        Scheme::FeatAppend => nc,
    };
    let (bind_ops, threshold_ops) = match cfg.scheme {
        Scheme::FeatxVal | Scheme::ChFeatCombxVal => (nf * nc, 1),
        Scheme::FeatxChxVal => (nf * nc + nf, nf + 1),
        Scheme::ChxFeatxVal => (nf * nc + nc, nc + 1),
        Scheme::FeatAppend => (nf * nc, nf),
    };
    // every bound vector is summed into exactly one bundle
    let bundle_ops = bind_ops;
    Ok(CostReport {
        scheme: cfg.scheme,
        memory_bits: (id_vectors + level_vectors) * op_dim,
        bind_ops,
        bundle_ops,
        threshold_ops,
        op_dim,
        bind_bit_ops: bind_ops * op_dim,
        bit_ops: (bind_ops + bundle_ops + threshold_ops) * op_dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cost(scheme: Scheme, nf: usize) -> CostReport {
        cost_model(&EncoderConfig::new(scheme, 19_000, nf, 18, 20, 0)).unwrap()
    }

    #[test]
    fn single_feature_single_channel_memory_equal() {
        let one = |s| cost_model(&EncoderConfig::new(s, 1000, 1, 1, 20, 0)).unwrap();
        assert_eq!(
            one(Scheme::FeatxVal).memory_bits,
            one(Scheme::ChFeatCombxVal).memory_bits
        );
        // with more channels the combo table grows
        assert!(cost(Scheme::FeatxVal, 1).memory_bits < cost(Scheme::ChFeatCombxVal, 1).memory_bits);
    }

    #[test]
    fn reference_configuration() {
        let bits: Vec<u64> = Scheme::ALL.iter().map(|&s| cost(s, 19).memory_bits).collect();
        assert_eq!(bits, [741_000, 6_878_000, 1_083_000, 1_083_000, 38_000]);
        assert_eq!(cost(Scheme::FeatAppend, 19).op_dim, 1000);
        assert_eq!(cost(Scheme::FeatxChxVal, 19).bind_ops, 19 * 18 + 19);
        assert_eq!(cost(Scheme::ChxFeatxVal, 19).bind_ops, 19 * 18 + 18);
    }

    #[test]
    fn threshold_counts() {
        assert_eq!(cost(Scheme::FeatxVal, 19).threshold_ops, 1);
        assert_eq!(cost(Scheme::ChFeatCombxVal, 19).threshold_ops, 1);
        assert_eq!(cost(Scheme::FeatxChxVal, 19).threshold_ops, 20);
        assert_eq!(cost(Scheme::ChxFeatxVal, 19).threshold_ops, 19);
        assert_eq!(cost(Scheme::FeatAppend, 19).threshold_ops, 19);
    }
}
