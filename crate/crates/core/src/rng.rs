//! Counter-based stream derivation.
//!
//! Every random draw in a simulation is made from a stream addressed by a
//! path of indices below the master seed, e.g. `(seed, cycle, cell)`. The
//! stream for a path never depends on how many other streams were used or in
//! which order, so parallel execution reproduces sequential results.

use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;

/// Key of one random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey(u64);

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl StreamKey {
    pub fn root(master_seed: u64) -> Self {
        StreamKey(mix64(master_seed ^ 0x5851_f42d_4c95_7f2d))
    }

    /// Key for the `index`-th child stream.
    pub fn child(self, index: u64) -> Self {
        let salted = index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        StreamKey(mix64(self.0 ^ mix64(salted)))
    }

    pub fn rng(self) -> Pcg64Mcg {
        Pcg64Mcg::seed_from_u64(self.0)
    }

    pub fn raw(self) -> u64 {
        self.0
    }
}
