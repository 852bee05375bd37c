//! Seeded item memories and their binary container format.

use std::io::{Read, Write};

use rand::seq::SliceRandom;

use super::hypervector::{words_for, Hypervector};
use super::rng::{stream_rng, Stream, PRNG_ID};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"HDIM";
const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum MemoryKind {
    FeatureIds,
    ChannelIds,
    FeatChComboIds,
    LevelValues,
}

impl MemoryKind {
    fn code(self) -> u8 {
        match self {
            MemoryKind::FeatureIds => 0,
            MemoryKind::ChannelIds => 1,
            MemoryKind::FeatChComboIds => 2,
            MemoryKind::LevelValues => 3,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => MemoryKind::FeatureIds,
            1 => MemoryKind::ChannelIds,
            2 => MemoryKind::FeatChComboIds,
            3 => MemoryKind::LevelValues,
            _ => return None,
        })
    }

    fn stream(self) -> Stream {
        match self {
            MemoryKind::FeatureIds => Stream::FeatureIds,
            MemoryKind::ChannelIds => Stream::ChannelIds,
            MemoryKind::FeatChComboIds => Stream::FeatChComboIds,
            MemoryKind::LevelValues => Stream::LevelValues,
        }
    }
}

/// An ordered table of hypervectors addressed by symbol index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemMemory {
    kind: MemoryKind,
    dim: usize,
    seed: u64,
    num_bins: Option<usize>,
    entries: Vec<Hypervector>,
}

impl ItemMemory {
    /// `count` i.i.d. random identity vectors. Entry `i` comes from stream
    /// `(seed, kind, i)`.
    pub fn random(kind: MemoryKind, count: usize, dim: usize, seed: u64) -> Result<Self> {
        if kind == MemoryKind::LevelValues {
            return Err(Error::invalid("use ItemMemory::levels for level memories"));
        }
        if count == 0 {
            return Err(Error::invalid("item memory must hold at least one entry"));
        }
        let entries = (0..count)
            .map(|i| Hypervector::random(dim, &mut stream_rng(seed, kind.stream(), i as u64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind,
            dim,
            seed,
            num_bins: None,
            entries,
        })
    }

    /// Level vectors by linear block flipping.
    ///
    /// Entry 0 is random; each next entry flips a fresh, disjoint block of
    /// `dim / (2 * (num_bins - 1))` positions taken from a seeded permutation,
    /// so the first and last entries differ in about half of the bits and the
    /// distance grows linearly with the level gap.
    pub fn levels(dim: usize, num_bins: usize, seed: u64) -> Result<Self> {
        if num_bins < 2 {
            return Err(Error::invalid("level memory needs at least 2 bins"));
        }
        if dim < num_bins {
            return Err(Error::invalid(format!(
                "level memory dim {dim} smaller than bin count {num_bins}"
            )));
        }
        let block = dim / (2 * (num_bins - 1));
        let mut positions: Vec<usize> = (0..dim).collect();
        positions.shuffle(&mut stream_rng(seed, Stream::LevelFlips, 0));

        let mut current = Hypervector::random(dim, &mut stream_rng(seed, Stream::LevelValues, 0))?;
        let mut entries = Vec::with_capacity(num_bins);
        entries.push(current.clone());
        for k in 0..num_bins - 1 {
            for &p in &positions[k * block..(k + 1) * block] {
                current.flip(p);
            }
            entries.push(current.clone());
        }
        Ok(Self {
            kind: MemoryKind::LevelValues,
            dim,
            seed,
            num_bins: Some(num_bins),
            entries,
        })
    }

    pub fn kind(&self) -> MemoryKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_bins(&self) -> Option<usize> {
        self.num_bins
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Hypervector] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> Result<&Hypervector> {
        self.entries.get(index).ok_or_else(|| {
            Error::invalid(format!(
                "index {index} out of range for {:?} memory of {} entries",
                self.kind,
                self.entries.len()
            ))
        })
    }

    /// Storage footprint of the table in bits.
    pub fn memory_bits(&self) -> usize {
        self.entries.len() * self.dim
    }

    /// Serializes to the `HDIM` container (little-endian throughout).
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&[self.kind.code()])?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&(self.entries.len() as u32).to_le_bytes())?;
        w.write_all(&(self.num_bins.unwrap_or(0) as u32).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&PRNG_ID.to_le_bytes())?;
        for e in &self.entries {
            for word in e.words() {
                w.write_all(&word.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 31];
        r.read_exact(&mut header)
            .map_err(|e| Error::parse("<item memory>", "byte 0", format!("short header: {e}")))?;
        if &header[0..4] != MAGIC {
            return Err(Error::parse("<item memory>", "byte 0", "bad magic, expected HDIM"));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != VERSION {
            return Err(Error::parse(
                "<item memory>",
                "byte 4",
                format!("unsupported version {version}"),
            ));
        }
        let kind = MemoryKind::from_code(header[6])
            .ok_or_else(|| Error::parse("<item memory>", "byte 6", "unknown memory kind"))?;
        let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap()) as usize;
        let dim = u32_at(7);
        let count = u32_at(11);
        let num_bins = u32_at(15);
        let seed = u64::from_le_bytes(header[19..27].try_into().unwrap());
        let prng = u32_at(27) as u32;
        if prng != PRNG_ID {
            return Err(Error::parse(
                "<item memory>",
                "byte 27",
                format!("unknown prng id {prng}"),
            ));
        }
        if dim == 0 {
            return Err(Error::parse("<item memory>", "byte 7", "zero dimension"));
        }
        let nwords = words_for(dim);
        let mut entries = Vec::with_capacity(count);
        let mut buf = vec![0u8; nwords * 8];
        for i in 0..count {
            r.read_exact(&mut buf).map_err(|e| {
                Error::parse(
                    "<item memory>",
                    format!("byte {}", 31 + i * nwords * 8),
                    format!("truncated row {i}: {e}"),
                )
            })?;
            let words = buf
                .chunks_exact(8)
                .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            entries.push(Hypervector::from_words(dim, words)?);
        }
        Ok(Self {
            kind,
            dim,
            seed,
            num_bins: (num_bins > 0).then_some(num_bins),
            entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_endpoints_half_apart() {
        let m = ItemMemory::levels(10_000, 21, 7).unwrap();
        let e = m.entries();
        assert_eq!(e[0].hamming(&e[20]).unwrap(), 0.5);
        assert_eq!(e[0].hamming(&e[10]).unwrap(), 0.25);
        assert_eq!(e[4].hamming(&e[4]).unwrap(), 0.0);
    }

    #[test]
    fn level_preconditions() {
        assert!(ItemMemory::levels(100, 1, 0).is_err());
        assert!(ItemMemory::levels(10, 20, 0).is_err());
    }

    #[test]
    fn random_memory_rejects_level_kind() {
        assert!(ItemMemory::random(MemoryKind::LevelValues, 3, 64, 0).is_err());
        assert!(ItemMemory::random(MemoryKind::FeatureIds, 0, 64, 0).is_err());
    }

    #[test]
    fn container_round_trip() {
        let m = ItemMemory::levels(130, 5, 99).unwrap();
        let bytes = m.to_bytes();
        assert_eq!(&bytes[..4], b"HDIM");
        assert_eq!(bytes.len(), 31 + 5 * 3 * 8);
        assert_eq!(ItemMemory::read_from(&bytes[..]).unwrap(), m);

        let ids = ItemMemory::random(MemoryKind::ChannelIds, 4, 64, 1).unwrap();
        assert_eq!(ItemMemory::read_from(&ids.to_bytes()[..]).unwrap(), ids);
    }

    #[test]
    fn container_rejects_corruption() {
        let mut bytes = ItemMemory::levels(64, 3, 1).unwrap().to_bytes();
        assert!(ItemMemory::read_from(&bytes[..20]).is_err());
        bytes[0] = b'X';
        assert!(ItemMemory::read_from(&bytes[..]).is_err());
    }
}
