use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// A reproducible stream of uniform variates.
///
/// Backed by ChaCha8. The key comes from `base_seed` through
/// `SeedableRng::seed_from_u64` (a PCG32 expansion of the 64-bit seed) and
/// `substream_id` selects the ChaCha stream word, so streams sharing a base
/// seed run disjoint keystreams. The output depends only on
/// `(base_seed, substream_id)`, never on the platform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomStream {
    rng: ChaCha8Rng,
    substream_id: u64,
}

/// Opens substream `substream_id` of `base_seed`.
pub fn derive_stream(base_seed: u64, substream_id: u64) -> RandomStream {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(substream_id);
    RandomStream { rng, substream_id }
}

impl RandomStream {
    pub fn substream_id(&self) -> u64 {
        self.substream_id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform variate on `[0, 1)` with 53 bits of resolution.
    pub fn uniform01(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform variate on the open interval `(0, 1)`: the midpoint of the
    /// 53-bit cell picked by [`uniform01`](Self::uniform01). Used for
    /// inverse-CDF sampling, where 0 maps to an infinite quantile.
    pub fn uniform_open01(&mut self) -> f64 {
        self.uniform01() + 1.0 / (1u64 << 54) as f64
    }
}
