use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "feat-x-val")]
    FeatxVal,
    #[serde(rename = "chfeatcomb-x-val")]
    ChFeatCombxVal,
    #[serde(rename = "feat-x-ch-x-val")]
    FeatxChxVal,
    #[serde(rename = "ch-x-feat-x-val")]
    ChxFeatxVal,
    #[serde(rename = "feat-append")]
    FeatAppend,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::FeatxVal,
        Scheme::ChFeatCombxVal,
        Scheme::FeatxChxVal,
        Scheme::ChxFeatxVal,
        Scheme::FeatAppend,
    ];

    /// Name accepted on the command line.
    pub fn cli_name(self) -> &'static str {
        match self {
            Scheme::FeatxVal => "feat-x-val",
            Scheme::ChFeatCombxVal => "chfeatcomb-x-val",
            Scheme::FeatxChxVal => "feat-x-ch-x-val",
            Scheme::ChxFeatxVal => "ch-x-feat-x-val",
            Scheme::FeatAppend => "feat-append",
        }
    }

    /// Whether channel identity enters the encoding.
    pub fn uses_channels(self) -> bool {
        self != Scheme::FeatxVal
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.cli_name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown scheme {s:?}; expected one of feat-x-val, chfeatcomb-x-val, \
                     feat-x-ch-x-val, ch-x-feat-x-val, feat-append"
                ))
            })
    }
}

/// Whether value levels come from one shared table or one table per feature.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelTables {
    #[default]
    Shared,
    PerFeature,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub scheme: Scheme,
    /// Target dimension D.
    pub dim: usize,
    pub num_feat: usize,
    pub num_ch: usize,
    pub num_bins: usize,
    pub seed: u64,
    #[serde(default)]
    pub level_tables: LevelTables,
}

impl EncoderConfig {
    pub fn new(
        scheme: Scheme,
        dim: usize,
        num_feat: usize,
        num_ch: usize,
        num_bins: usize,
        seed: u64,
    ) -> Self {
        Self {
            scheme,
            dim,
            num_feat,
            num_ch,
            num_bins,
            seed,
            level_tables: LevelTables::Shared,
        }
    }

    /// Per-feature sub-dimension `d = floor(D / num_feat)`.
    pub fn subdim(&self) -> usize {
        self.dim / self.num_feat.max(1)
    }

    /// Dimension of the item-memory vectors and of every bundle.
    pub fn vector_dim(&self) -> usize {
        match self.scheme {
            Scheme::FeatAppend => self.subdim(),
            _ => self.dim,
        }
    }

    /// Dimension of the encoded window (`d * num_feat` for FeatAppend).
    pub fn output_dim(&self) -> usize {
        match self.scheme {
            Scheme::FeatAppend => self.subdim() * self.num_feat,
            _ => self.dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.num_feat == 0 || self.num_ch == 0 {
            return Err(Error::invalid("dimension, feature and channel counts must be positive"));
        }
        if self.num_bins < 2 {
            return Err(Error::invalid("at least 2 bins are required"));
        }
        if self.vector_dim() < self.num_bins {
            return Err(Error::invalid(format!(
                "vector dimension {} is smaller than the bin count {}",
                self.vector_dim(),
                self.num_bins
            )));
        }
        Ok(())
    }

    /// Stable fingerprint: first 8 bytes of SHA-256 over the canonical JSON.
    pub fn config_hash(&self) -> u64 {
        let json = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&json);
        u64::from_le_bytes(digest[..8].try_into().unwrap())
    }
}
