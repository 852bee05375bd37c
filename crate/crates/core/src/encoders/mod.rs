//! Window encoders: map a `[channel][feature]` bin matrix to one hypervector.
//!
//! Five schemes differ in how feature identity, channel identity and value
//! are combined. `⌊·⌋` denotes bundling followed by majority thresholding.
//!
//! | scheme            | encoding                                                  |
//! |-------------------|-----------------------------------------------------------|
//! | `FeatxVal`        | ⌊Σ_{c,f} F[f] ⊕ L[b(c,f)]⌋                                |
//! | `ChFeatCombxVal`  | ⌊Σ_{c,f} FC[c,f] ⊕ L[b(c,f)]⌋                             |
//! | `FeatxChxVal`     | ⌊Σ_f F[f] ⊕ ⌊Σ_c C[c] ⊕ L[b(c,f)]⌋⌋                       |
//! | `ChxFeatxVal`     | ⌊Σ_c C[c] ⊕ ⌊Σ_f F[f] ⊕ L[b(c,f)]⌋⌋                       |
//! | `FeatAppend`      | ⌊Σ_c C_d[c] ⊕ L_d[b(c,0)]⌋ ‖ … ‖ ⌊Σ_c C_d[c] ⊕ L_d[b(c,F-1)]⌋ |

mod config;
mod cost;

pub use config::{EncoderConfig, LevelTables, Scheme};
pub use cost::{cost_model, CostReport};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hdc::{BitCounter, Hypervector, ItemMemory, MemoryKind, TieBreak};
use crate::signal::FeatureTensor;
use crate::Scalar;

/// Item memories and tie-break vectors for one encoder configuration.
#[derive(Debug, Clone)]
pub struct EncoderMemories {
    pub feature_ids: Option<ItemMemory>,
    pub channel_ids: Option<ItemMemory>,
    pub combo_ids: Option<ItemMemory>,
    /// One table, or one per feature with [`LevelTables::PerFeature`].
    pub levels: Vec<ItemMemory>,
    /// Tie-break at the dimension of the vectors being bundled (D or d).
    pub tie: TieBreak,
}

impl EncoderMemories {
    pub fn generate(cfg: &EncoderConfig) -> Result<Self> {
        cfg.validate()?;
        let vdim = cfg.vector_dim();
        let seed = cfg.seed;
        let (nf, nc, nb) = (cfg.num_feat, cfg.num_ch, cfg.num_bins);
        let feature_ids = matches!(
            cfg.scheme,
            Scheme::FeatxVal | Scheme::FeatxChxVal | Scheme::ChxFeatxVal
        )
        .then(|| ItemMemory::random(MemoryKind::FeatureIds, nf, vdim, seed))
        .transpose()?;
        let channel_ids = matches!(
            cfg.scheme,
            Scheme::FeatxChxVal | Scheme::ChxFeatxVal | Scheme::FeatAppend
        )
        .then(|| ItemMemory::random(MemoryKind::ChannelIds, nc, vdim, seed))
        .transpose()?;
        let combo_ids = (cfg.scheme == Scheme::ChFeatCombxVal)
            .then(|| ItemMemory::random(MemoryKind::FeatChComboIds, nf * nc, vdim, seed))
            .transpose()?;
        let levels = match cfg.level_tables {
            LevelTables::Shared => vec![ItemMemory::levels(vdim, nb, seed)?],
            LevelTables::PerFeature => (0..nf)
                .map(|f| ItemMemory::levels(vdim, nb, seed.wrapping_add(1 + f as u64)))
                .collect::<Result<_>>()?,
        };
        Ok(Self {
            feature_ids,
            channel_ids,
            combo_ids,
            levels,
            tie: TieBreak::from_seed(seed, vdim)?,
        })
    }

    pub fn memory_bits(&self) -> usize {
        [&self.feature_ids, &self.channel_ids, &self.combo_ids]
            .iter()
            .filter_map(|m| m.as_ref().map(ItemMemory::memory_bits))
            .sum::<usize>()
            + self.levels.iter().map(ItemMemory::memory_bits).sum::<usize>()
    }

    /// All tables, for persistence.
    pub fn tables(&self) -> Vec<(&'static str, &ItemMemory)> {
        let mut out = Vec::new();
        if let Some(m) = &self.feature_ids {
            out.push(("feature_ids", m));
        }
        if let Some(m) = &self.channel_ids {
            out.push(("channel_ids", m));
        }
        if let Some(m) = &self.combo_ids {
            out.push(("featch_combo_ids", m));
        }
        for m in &self.levels {
            out.push(("levels", m));
        }
        out
    }
}

/// An encoder configuration with its generated memories.
#[derive(Debug, Clone)]
pub struct Encoder {
    cfg: EncoderConfig,
    mem: EncoderMemories,
}

fn need<'a>(m: &'a Option<ItemMemory>, what: &str) -> Result<&'a ItemMemory> {
    m.as_ref()
        .ok_or_else(|| Error::invalid(format!("encoder memories lack {what}")))
}

impl Encoder {
    pub fn new(cfg: EncoderConfig) -> Result<Self> {
        let mem = EncoderMemories::generate(&cfg)?;
        Ok(Self { cfg, mem })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.cfg
    }

    pub fn memories(&self) -> &EncoderMemories {
        &self.mem
    }

    pub fn output_dim(&self) -> usize {
        self.cfg.output_dim()
    }

    /// Encodes one window. `bins` is `[channel][feature]` row-major.
    pub fn encode(&self, bins: &[u16]) -> Result<Hypervector> {
        encode_window(bins, &self.cfg, &self.mem)
    }

    /// Encodes every window of a discretized tensor, preserving order.
    pub fn encode_tensor<T: Scalar>(&self, tensor: &FeatureTensor<T>) -> Result<Vec<Hypervector>> {
        if tensor.num_channels() != self.cfg.num_ch || tensor.num_features() != self.cfg.num_feat {
            return Err(Error::invalid(format!(
                "tensor shape {}x{} does not match encoder {}x{}",
                tensor.num_channels(),
                tensor.num_features(),
                self.cfg.num_ch,
                self.cfg.num_feat
            )));
        }
        if tensor.num_bins() != self.cfg.num_bins {
            return Err(Error::invalid(format!(
                "tensor binned with {} levels, encoder expects {}",
                tensor.num_bins(),
                self.cfg.num_bins
            )));
        }
        (0..tensor.num_windows())
            .into_par_iter()
            .map_init(
                || Scratch::new(&self.cfg),
                |scratch, w| {
                    encode_with(tensor.window_bins(w)?, &self.cfg, &self.mem, scratch)
                },
            )
            .collect()
    }
}

struct Scratch {
    inner: BitCounter,
    outer: BitCounter,
}

impl Scratch {
    fn new(cfg: &EncoderConfig) -> Self {
        let d = cfg.vector_dim();
        Self {
            inner: BitCounter::new(d).expect("validated dimension"),
            outer: BitCounter::new(d).expect("validated dimension"),
        }
    }
}

/// Encodes one window's bin matrix under `cfg` with memories `mem`.
pub fn encode_window(
    bins: &[u16],
    cfg: &EncoderConfig,
    mem: &EncoderMemories,
) -> Result<Hypervector> {
    cfg.validate()?;
    encode_with(bins, cfg, mem, &mut Scratch::new(cfg))
}

fn encode_with(
    bins: &[u16],
    cfg: &EncoderConfig,
    mem: &EncoderMemories,
    scratch: &mut Scratch,
) -> Result<Hypervector> {
    let (nf, nc, nb) = (cfg.num_feat, cfg.num_ch, cfg.num_bins);
    if bins.len() != nf * nc {
        return Err(Error::invalid(format!(
            "bin matrix has {} entries, expected {nc} channels x {nf} features",
            bins.len()
        )));
    }
    if let Some(b) = bins.iter().find(|&&b| b as usize >= nb) {
        return Err(Error::invalid(format!("bin {b} out of range for {nb} levels")));
    }
    let expected_tables = match cfg.level_tables {
        LevelTables::Shared => 1,
        LevelTables::PerFeature => nf,
    };
    let vdim = cfg.vector_dim();
    if mem.levels.len() != expected_tables
        || mem.levels.iter().any(|m| m.dim() != vdim || m.len() != nb)
        || mem.tie.dim() != vdim
    {
        return Err(Error::invalid("encoder memories do not match the configuration"));
    }
    let level = |c: usize, f: usize| -> &Hypervector {
        let table = &mem.levels[if expected_tables == 1 { 0 } else { f }];
        &table.entries()[bins[c * nf + f] as usize]
    };
    let check = |m: &ItemMemory, n: usize, what: &str| -> Result<()> {
        if m.len() != n || m.dim() != vdim {
            return Err(Error::invalid(format!("{what} memory does not match the configuration")));
        }
        Ok(())
    };
    let Scratch { inner, outer } = scratch;
    inner.clear();
    outer.clear();

    match cfg.scheme {
        Scheme::FeatxVal => {
            let ids = need(&mem.feature_ids, "feature ids")?;
            check(ids, nf, "feature id")?;
            for c in 0..nc {
                for f in 0..nf {
                    outer.add_bound(&ids.entries()[f], level(c, f))?;
                }
            }
            outer.threshold(&mem.tie)
        }
        Scheme::ChFeatCombxVal => {
            let ids = need(&mem.combo_ids, "feature-channel combination ids")?;
            check(ids, nf * nc, "combination id")?;
            for c in 0..nc {
                for f in 0..nf {
                    outer.add_bound(&ids.entries()[c * nf + f], level(c, f))?;
                }
            }
            outer.threshold(&mem.tie)
        }
        Scheme::FeatxChxVal => {
            let fids = need(&mem.feature_ids, "feature ids")?;
            let cids = need(&mem.channel_ids, "channel ids")?;
            check(fids, nf, "feature id")?;
            check(cids, nc, "channel id")?;
            for f in 0..nf {
                inner.clear();
                for c in 0..nc {
                    inner.add_bound(&cids.entries()[c], level(c, f))?;
                }
                let per_feature = inner.threshold(&mem.tie)?;
                outer.add_bound(&fids.entries()[f], &per_feature)?;
            }
            outer.threshold(&mem.tie)
        }
        Scheme::ChxFeatxVal => {
            let fids = need(&mem.feature_ids, "feature ids")?;
            let cids = need(&mem.channel_ids, "channel ids")?;
            check(fids, nf, "feature id")?;
            check(cids, nc, "channel id")?;
            for c in 0..nc {
                inner.clear();
                for f in 0..nf {
                    inner.add_bound(&fids.entries()[f], level(c, f))?;
                }
                let per_channel = inner.threshold(&mem.tie)?;
                outer.add_bound(&cids.entries()[c], &per_channel)?;
            }
            outer.threshold(&mem.tie)
        }
        Scheme::FeatAppend => {
            let cids = need(&mem.channel_ids, "channel ids")?;
            check(cids, nc, "channel id")?;
            let parts = (0..nf)
                .map(|f| {
                    inner.clear();
                    for c in 0..nc {
                        inner.add_bound(&cids.entries()[c], level(c, f))?;
                    }
                    inner.threshold(&mem.tie)
                })
                .collect::<Result<Vec<_>>>()?;
            Hypervector::concat(&parts)
        }
    }
}
