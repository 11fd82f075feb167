//! Deterministic seed derivation.
//!
//! Every random stream in the pipeline is derived from a single root seed and a
//! path of stream labels, so results never depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A node in the seed tree. Children are addressed by integer or string labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream(u64);

impl SeedStream {
    pub fn new(root: u64) -> Self {
        SeedStream(splitmix(root.wrapping_add(GOLDEN)))
    }

    pub fn child(self, index: u64) -> Self {
        SeedStream(splitmix(self.0 ^ splitmix(index.wrapping_add(GOLDEN))))
    }

    pub fn named(self, label: &str) -> Self {
        // FNV-1a over the label bytes, then mixed into the tree
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        self.child(h)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}
