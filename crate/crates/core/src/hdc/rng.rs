//! Reproducible random streams for item memories.
//!
//! Every random vector is addressed by `(seed, kind, index)`: the seed keys a
//! ChaCha8 generator and `(kind, index)` selects one of its 2^64 independent
//! streams. Regenerating any single entry never depends on how many other
//! entries were drawn before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier of the generator algorithm, persisted next to seeds.
pub const PRNG_ID: u32 = 1;

/// Stream namespaces. Values are part of the persisted format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Stream {
    FeatureIds = 1,
    ChannelIds = 2,
    FeatChComboIds = 3,
    LevelValues = 4,
    LevelFlips = 5,
    TieBreak = 6,
    Generic = 7,
    DataSelection = 8,
    Synthesis = 9,
}

/// Generator for entry `index` of namespace `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 56) ^ index);
    rng
}
