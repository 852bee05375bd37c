//! Packed binary hypervectors.

use std::fmt;

use rand::RngCore;

use crate::error::{Error, Result};

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(dim: usize) -> usize {
    dim.div_ceil(WORD_BITS)
}

/// Mask selecting the valid bits of the last word of a `dim`-bit vector.
#[inline]
fn tail_mask(dim: usize) -> u64 {
    match dim % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Fixed-dimension binary vector packed into 64-bit words.
///
/// Bit `i` lives at `words[i / 64] >> (i % 64)`. Bits at index `>= dim` are
/// always zero, so word-level kernels (xor, popcount, equality) never need to
/// special-case the tail.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Hypervector {
    dim: usize,
    words: Vec<u64>,
}

impl Hypervector {
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("hypervector dimension must be positive"));
        }
        Ok(Self {
            dim,
            words: vec![0; words_for(dim)],
        })
    }

    pub fn ones(dim: usize) -> Result<Self> {
        let mut hv = Self::zeros(dim)?;
        hv.words.iter_mut().for_each(|w| *w = u64::MAX);
        hv.clear_tail();
        Ok(hv)
    }

    /// Draws every bit i.i.d. Bernoulli(0.5) from `rng`, one `u64` per word.
    pub fn random<R: RngCore + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        let mut hv = Self::zeros(dim)?;
        for w in hv.words.iter_mut() {
            *w = rng.next_u64();
        }
        hv.clear_tail();
        Ok(hv)
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut hv = Self::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            if b {
                hv.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        Ok(hv)
    }

    /// Builds a vector from a string of `0`/`1` characters; other characters
    /// (spaces, underscores) are skipped.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let bits: Vec<bool> = s
            .chars()
            .filter_map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect();
        Self::from_bits(&bits)
    }

    /// Wraps raw words. Fails if the word count is wrong or tail bits are set.
    pub fn from_words(dim: usize, words: Vec<u64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("hypervector dimension must be positive"));
        }
        if words.len() != words_for(dim) {
            return Err(Error::invalid(format!(
                "expected {} words for dim {dim}, got {}",
                words_for(dim),
                words.len()
            )));
        }
        if words[words.len() - 1] & !tail_mask(dim) != 0 {
            return Err(Error::invalid("bits set beyond the vector dimension"));
        }
        Ok(Self { dim, words })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.dim, "bit index {i} out of range for dim {}", self.dim);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.dim, "bit index {i} out of range for dim {}", self.dim);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.dim, "bit index {i} out of range for dim {}", self.dim);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.dim).map(|i| self.get(i)).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn complement(&self) -> Self {
        let mut out = Self {
            dim: self.dim,
            words: self.words.iter().map(|w| !w).collect(),
        };
        out.clear_tail();
        out
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::invalid(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    /// Binding: bitwise XOR.
    pub fn bind(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    pub fn bind_assign(&mut self, other: &Self) -> Result<()> {
        self.check_dim(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// Number of differing bits.
    pub fn hamming_count(&self, other: &Self) -> Result<usize> {
        self.check_dim(other)?;
        Ok(xor_popcount(&self.words, &other.words))
    }

    /// Normalized Hamming distance in `[0, 1]`.
    pub fn hamming(&self, other: &Self) -> Result<f64> {
        Ok(self.hamming_count(other)? as f64 / self.dim as f64)
    }

    /// Bits `[start, end)` as a new vector of dimension `end - start`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.dim {
            return Err(Error::invalid(format!(
                "slice [{start}, {end}) out of range for dim {}",
                self.dim
            )));
        }
        let dim = end - start;
        let mut out = Self::zeros(dim)?;
        let shift = start % WORD_BITS;
        let first = start / WORD_BITS;
        for (k, w) in out.words.iter_mut().enumerate() {
            let lo = self.words[first + k] >> shift;
            let hi = if shift == 0 {
                0
            } else {
                self.words
                    .get(first + k + 1)
                    .map_or(0, |next| next << (WORD_BITS - shift))
            };
            *w = lo | hi;
        }
        out.clear_tail();
        Ok(out)
    }

    /// Hamming distance restricted to bits `[start, end)`, without materializing
    /// the slices.
    pub fn hamming_range(&self, other: &Self, start: usize, end: usize) -> Result<f64> {
        self.check_dim(other)?;
        if start >= end || end > self.dim {
            return Err(Error::invalid(format!(
                "range [{start}, {end}) out of range for dim {}",
                self.dim
            )));
        }
        let mut count = 0usize;
        let (first, last) = (start / WORD_BITS, (end - 1) / WORD_BITS);
        for k in first..=last {
            let mut x = self.words[k] ^ other.words[k];
            if k == first {
                x &= u64::MAX << (start % WORD_BITS);
            }
            if k == last {
                x &= tail_mask(end);
            }
            count += x.count_ones() as usize;
        }
        Ok(count as f64 / (end - start) as f64)
    }

    /// Concatenates vectors in order.
    pub fn concat(parts: &[Hypervector]) -> Result<Self> {
        let dim: usize = parts.iter().map(|p| p.dim).sum();
        let mut out = Self::zeros(dim)?;
        let mut offset = 0;
        for part in parts {
            out.write_at(offset, part);
            offset += part.dim;
        }
        Ok(out)
    }

    fn write_at(&mut self, offset: usize, part: &Hypervector) {
        let shift = offset % WORD_BITS;
        let base = offset / WORD_BITS;
        for (k, &w) in part.words.iter().enumerate() {
            self.words[base + k] |= w << shift;
            if shift != 0 {
                if let Some(next) = self.words.get_mut(base + k + 1) {
                    *next |= w >> (WORD_BITS - shift);
                }
            }
        }
    }

    fn clear_tail(&mut self) {
        let mask = tail_mask(self.dim);
        if let Some(last) = self.words.last_mut() {
            *last &= mask;
        }
    }
}

#[inline]
pub(crate) fn xor_popcount(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum()
}

impl fmt::Debug for Hypervector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim <= 128 {
            let s: String = self.to_bits().iter().map(|&b| if b { '1' } else { '0' }).collect();
            write!(f, "Hypervector({s})")
        } else {
            write!(f, "Hypervector(dim={}, ones={})", self.dim, self.count_ones())
        }
    }
}
