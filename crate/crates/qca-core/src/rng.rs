//! Counter-addressed deterministic random numbers.
//!
//! Monte Carlo here must be reproducible bit for bit at any worker count, so
//! instead of a stateful generator the draws form an indexed stream: draw `k`
//! of a seeded stream is a pure function of `(seed, k)`. Workers can claim any
//! partition of the counter space and the union of their outputs is identical
//! to a serial run. The stream is SplitMix64: output `k` equals the `k`-th
//! output of a SplitMix64 generator initialized with `seed`.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A seeded, counter-addressed uniform stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    /// Independent sub-stream of a user-facing seed. Samplers that run inside
    /// one command (for example a rejection sweep and a test-point sweep)
    /// take distinct tags so their counter spaces never overlap.
    pub fn substream(seed: u64, tag: u64) -> Self {
        Self {
            seed: mix(seed ^ mix(tag.wrapping_mul(GOLDEN) ^ 0x5851_F42D_4C95_7F2D)),
        }
    }

    /// Raw 64-bit draw `k` of this stream.
    #[inline]
    pub fn raw(&self, k: u64) -> u64 {
        mix(self
            .seed
            .wrapping_add(k.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    /// Uniform double in `[0, 1)` from the top 53 bits of draw `k`.
    #[inline]
    pub fn uniform(&self, k: u64) -> f64 {
        (self.raw(k) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[lo, hi)` from draw `k`.
    #[inline]
    pub fn uniform_in(&self, k: u64, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform(k)
    }
}
