//! Deterministic, splittable random streams.
//!
//! A [`RngHandle`] is a `(seed, stream)` pair. The generator it builds is a
//! ChaCha8 keyed by the seed with the stream id selecting an independent
//! keystream, so identical handles replay identical draws and child handles
//! derived from distinct labels never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type produced by [`RngHandle::rng`].
pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngHandle {
    seed: u64,
    stream: u64,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut hash: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

impl RngHandle {
    pub fn new(seed: u64) -> Self {
        RngHandle { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        RngHandle { seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Derives the handle for a named sub-stream.
    pub fn child(&self, label: &str) -> RngHandle {
        let h = fnv1a(FNV_OFFSET, &self.stream.to_le_bytes());
        RngHandle {
            seed: self.seed,
            stream: fnv1a(h, label.as_bytes()),
        }
    }

    /// Derives the handle for an indexed sub-stream, e.g. one per source task.
    pub fn child_indexed(&self, label: &str, index: u64) -> RngHandle {
        let c = self.child(label);
        RngHandle {
            seed: c.seed,
            stream: fnv1a(c.stream, &index.to_le_bytes()),
        }
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}
