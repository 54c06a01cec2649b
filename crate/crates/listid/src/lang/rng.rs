//! Deterministic, splittable random state.
//!
//! Every stochastic operation takes an explicit `RngState`. Independent
//! streams are derived from a master seed via ChaCha's stream counter, so
//! trial r of an experiment sees the same draws regardless of scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct RngState(ChaCha8Rng);

impl RngState {
    pub fn from_seed(seed: u64) -> Self {
        RngState(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Stream `stream` of the generator seeded by `seed`.
    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngState(rng)
    }
}

impl RngCore for RngState {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}

/// A small deterministic mixer for hash-style pseudo-random decisions in
/// synthetic identifiers. Stable across platforms and releases.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let mut a = RngState::substream(7, 1);
        let mut b = RngState::substream(7, 1);
        let mut c = RngState::substream(7, 2);
        let xa: u64 = a.gen();
        let xb: u64 = b.gen();
        let xc: u64 = c.gen();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }
}
