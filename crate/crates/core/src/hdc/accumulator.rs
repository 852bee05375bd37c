//! Bundling: weighted bitwise summation followed by majority thresholding.

use std::fmt::Debug;
use std::ops::{AddAssign, SubAssign};

use num_traits::Signed;

use super::hypervector::{words_for, Hypervector, WORD_BITS};
use super::rng::{stream_rng, Stream};
use crate::error::{Error, Result};

/// Signed weight an [`Accumulator`] can sum. Integers keep unit-weight
/// bundling exact; floats carry fractional (OnlineHD) weights.
pub trait Weight: Signed + Copy + PartialOrd + AddAssign + SubAssign + Debug + Send + Sync {}

impl<T> Weight for T where T: Signed + Copy + PartialOrd + AddAssign + SubAssign + Debug + Send + Sync {}

/// Fixed vector deciding bits whose vote is exactly tied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieBreak(Hypervector);

impl TieBreak {
    pub fn from_seed(seed: u64, dim: usize) -> Result<Self> {
        let a = Hypervector::random(dim, &mut stream_rng(seed, Stream::TieBreak, 0))?;
        let b = Hypervector::random(dim, &mut stream_rng(seed, Stream::TieBreak, 1))?;
        Ok(Self(a.bind(&b)?))
    }

    pub fn from_vector(hv: Hypervector) -> Self {
        Self(hv)
    }

    pub fn vector(&self) -> &Hypervector {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

/// Running bipolar sum of weighted hypervectors.
///
/// A vector added with weight `w` contributes `+w` at its one bits and `-w`
/// at its zero bits, so `counts[i] > 0` is exactly the majority condition
/// `sum_k w_k * v_k[i] > weight_total / 2` for non-negative weights.
/// Subtraction (used by OnlineHD) flips the signs.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulator<W: Weight> {
    dim: usize,
    counts: Vec<W>,
    weight_total: W,
}

impl<W: Weight> Accumulator<W> {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("accumulator dimension must be positive"));
        }
        Ok(Self {
            dim,
            counts: vec![W::zero(); dim],
            weight_total: W::zero(),
        })
    }

    pub fn from_parts(counts: Vec<W>, weight_total: W) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::invalid("accumulator dimension must be positive"));
        }
        Ok(Self {
            dim: counts.len(),
            counts,
            weight_total,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn counts(&self) -> &[W] {
        &self.counts
    }

    /// Sum of absolute weights absorbed so far.
    pub fn weight_total(&self) -> W {
        self.weight_total
    }

    pub fn is_empty(&self) -> bool {
        self.weight_total == W::zero()
    }

    pub fn add(&mut self, hv: &Hypervector, weight: W) -> Result<()> {
        self.apply(hv, weight)
    }

    pub fn subtract(&mut self, hv: &Hypervector, weight: W) -> Result<()> {
        self.apply(hv, -weight)
    }

    fn apply(&mut self, hv: &Hypervector, signed: W) -> Result<()> {
        if hv.dim() != self.dim {
            return Err(Error::invalid(format!(
                "dimension mismatch: accumulator {} vs vector {}",
                self.dim,
                hv.dim()
            )));
        }
        for (chunk, &word) in self.counts.chunks_mut(WORD_BITS).zip(hv.words()) {
            for (j, c) in chunk.iter_mut().enumerate() {
                if (word >> j) & 1 == 1 {
                    *c += signed;
                } else {
                    *c -= signed;
                }
            }
        }
        self.weight_total += signed.abs();
        Ok(())
    }

    /// Elementwise merge of a partial accumulator (per-worker reduction).
    pub fn merge(&mut self, other: &Accumulator<W>) -> Result<()> {
        if other.dim != self.dim {
            return Err(Error::invalid("cannot merge accumulators of different dimension"));
        }
        for (a, &b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.weight_total += other.weight_total;
        Ok(())
    }

    /// Majority vote per bit; exact ties take the tie-break bit.
    pub fn threshold(&self, tie: &TieBreak) -> Result<Hypervector> {
        if self.is_empty() {
            return Err(Error::invalid("cannot threshold an empty accumulator"));
        }
        if tie.dim() != self.dim {
            return Err(Error::invalid("tie-break dimension does not match accumulator"));
        }
        let mut words = vec![0u64; words_for(self.dim)];
        for ((w, chunk), &t) in words
            .iter_mut()
            .zip(self.counts.chunks(WORD_BITS))
            .zip(tie.vector().words())
        {
            let mut out = 0u64;
            for (j, &c) in chunk.iter().enumerate() {
                let bit = if c > W::zero() {
                    1
                } else if c < W::zero() {
                    0
                } else {
                    (t >> j) & 1
                };
                out |= bit << j;
            }
            *w = out;
        }
        Hypervector::from_words(self.dim, words)
    }
}

/// Weighted bundle of `items` thresholded to a binary vector.
///
/// Weights must be non-negative with at least one positive.
pub fn bundle_threshold<W: Weight>(
    items: &[(&Hypervector, W)],
    tie: &TieBreak,
) -> Result<Hypervector> {
    let Some((first, _)) = items.first() else {
        return Err(Error::invalid("cannot bundle an empty list"));
    };
    if items.iter().any(|(_, w)| *w < W::zero()) {
        return Err(Error::invalid("bundle weights must be non-negative"));
    }
    if !items.iter().any(|(_, w)| *w > W::zero()) {
        return Err(Error::invalid("at least one bundle weight must be positive"));
    }
    let mut acc = Accumulator::<W>::new(first.dim())?;
    for (hv, w) in items {
        acc.add(hv, *w)?;
    }
    acc.threshold(tie)
}

/// Spreads the 8 bits of a byte into the 8 byte lanes of a `u64`.
const fn spread_table() -> [u64; 256] {
    let mut table = [0u64; 256];
    let mut b = 0;
    while b < 256 {
        let mut v = 0u64;
        let mut k = 0;
        while k < 8 {
            v |= (((b >> k) & 1) as u64) << (8 * k);
            k += 1;
        }
        table[b] = v;
        b += 1;
    }
    table
}

static SPREAD: [u64; 256] = spread_table();

/// Unit-weight majority counter used on the encoding hot path.
///
/// Each `u64` lane holds eight 8-bit counters for eight consecutive bits; the
/// lanes are flushed into `u32` totals before any byte counter can overflow.
#[derive(Debug, Clone)]
pub struct BitCounter {
    dim: usize,
    lanes: Vec<u64>,
    totals: Vec<u32>,
    pending: u32,
    added: u32,
}

impl BitCounter {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("counter dimension must be positive"));
        }
        let words = words_for(dim);
        Ok(Self {
            dim,
            lanes: vec![0; words * 8],
            totals: vec![0; words * WORD_BITS],
            pending: 0,
            added: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> u32 {
        self.added
    }

    pub fn is_empty(&self) -> bool {
        self.added == 0
    }

    pub fn clear(&mut self) {
        self.lanes.iter_mut().for_each(|l| *l = 0);
        self.totals.iter_mut().for_each(|t| *t = 0);
        self.pending = 0;
        self.added = 0;
    }

    #[inline]
    fn add_words(&mut self, words: impl Iterator<Item = u64>) {
        if self.pending == 255 {
            self.flush();
        }
        for (lanes, w) in self.lanes.chunks_exact_mut(8).zip(words) {
            for (j, lane) in lanes.iter_mut().enumerate() {
                *lane += SPREAD[((w >> (8 * j)) & 0xff) as usize];
            }
        }
        self.pending += 1;
        self.added += 1;
    }

    pub fn add(&mut self, hv: &Hypervector) -> Result<()> {
        self.check(hv)?;
        self.add_words(hv.words().iter().copied());
        Ok(())
    }

    /// Adds `a XOR b` without materializing the bound vector.
    pub fn add_bound(&mut self, a: &Hypervector, b: &Hypervector) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        self.add_words(a.words().iter().zip(b.words()).map(|(x, y)| x ^ y));
        Ok(())
    }

    fn check(&self, hv: &Hypervector) -> Result<()> {
        if hv.dim() != self.dim {
            return Err(Error::invalid(format!(
                "dimension mismatch: counter {} vs vector {}",
                self.dim,
                hv.dim()
            )));
        }
        Ok(())
    }

    fn flush(&mut self) {
        for (lane_idx, lane) in self.lanes.iter_mut().enumerate() {
            let v = *lane;
            if v != 0 {
                let base = lane_idx * 8;
                for k in 0..8 {
                    self.totals[base + k] += ((v >> (8 * k)) & 0xff) as u32;
                }
            }
            *lane = 0;
        }
        self.pending = 0;
    }

    /// Ones count per bit.
    pub fn counts(&mut self) -> Vec<u32> {
        self.flush();
        self.totals[..self.dim].to_vec()
    }

    /// Majority of everything added so far; exact ties take the tie-break bit.
    pub fn threshold(&mut self, tie: &TieBreak) -> Result<Hypervector> {
        if self.added == 0 {
            return Err(Error::invalid("cannot threshold an empty counter"));
        }
        if tie.dim() != self.dim {
            return Err(Error::invalid("tie-break dimension does not match counter"));
        }
        let n = self.added;
        let (half, even) = (n / 2, n.is_multiple_of(2));
        let mut words = vec![0u64; words_for(self.dim)];
        for (k, (w, &t)) in words.iter_mut().zip(tie.vector().words()).enumerate() {
            let totals = &self.totals[k * WORD_BITS..(k + 1) * WORD_BITS];
            let lanes = &self.lanes[k * 8..(k + 1) * 8];
            let mut out = 0u64;
            for (j, &lane) in lanes.iter().enumerate() {
                for i in 0..8 {
                    let b = 8 * j + i;
                    // counts not yet flushed still sit in the byte lanes
                    let c = totals[b] + ((lane >> (8 * i)) & 0xff) as u32;
                    let tie_bit = (even & (c == half)) as u64 & (t >> b);
                    out |= ((c > half) as u64 | tie_bit) << b;
                }
            }
            *w = out;
        }
        // tail counts are zero and n > 0, so tail bits come out zero
        Hypervector::from_words(self.dim, words)
    }
}
