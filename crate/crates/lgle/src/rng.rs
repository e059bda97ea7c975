//! Counter-based random number streams.
//!
//! Each `(seed, stream_id)` pair owns an independent stream; the state is a
//! plain counter, so replaying a stream reproduces its output bit-exactly and
//! replicas can be fanned out across workers without any shared state.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const STREAM_SALT: u64 = 0xd605_bbb5_8c8a_bd25;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Splittable counter-based generator (splitmix64 in counter mode).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    key: u64,
    counter: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let key = mix64(mix64(seed ^ GOLDEN).wrapping_add(stream_id.wrapping_mul(STREAM_SALT)));
        RngStream { key, counter: 0 }
    }

    /// Derive a child stream; children of distinct ids are independent of
    /// each other and of the parent's future output.
    pub fn substream(&self, id: u64) -> Self {
        RngStream::new(self.key ^ STREAM_SALT, id)
    }

    /// Number of raw 64-bit words drawn so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform variate in the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform variate in (lo, hi).
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in [0, n).
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        // Multiply-shift; bias is negligible for the n used here.
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }
}
