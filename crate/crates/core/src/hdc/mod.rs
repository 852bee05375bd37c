//! Binary hypervector algebra: generation, binding, bundling, similarity.

mod accumulator;
mod hypervector;
mod item_memory;
pub mod rng;

pub use accumulator::{bundle_threshold, Accumulator, BitCounter, TieBreak, Weight};
pub use hypervector::Hypervector;
pub use item_memory::{ItemMemory, MemoryKind};

use rand::RngCore;

use crate::error::Result;

/// Random hypervector with i.i.d. Bernoulli(0.5) bits.
pub fn random_hv<R: RngCore + ?Sized>(dim: usize, rng: &mut R) -> Result<Hypervector> {
    Hypervector::random(dim, rng)
}

pub fn bind(a: &Hypervector, b: &Hypervector) -> Result<Hypervector> {
    a.bind(b)
}

/// Normalized Hamming distance.
pub fn hamming(a: &Hypervector, b: &Hypervector) -> Result<f64> {
    a.hamming(b)
}

pub fn slice(hv: &Hypervector, start: usize, end: usize) -> Result<Hypervector> {
    hv.slice(start, end)
}

pub fn make_level_memory(dim: usize, num_bins: usize, seed: u64) -> Result<ItemMemory> {
    ItemMemory::levels(dim, num_bins, seed)
}
