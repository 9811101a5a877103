//! Hierarchical deterministic random streams.
//!
//! Every random decision in the engine draws from a stream addressed by a
//! master seed plus a path of labels (scene index, caption index, temperature
//! index, candidate index, ...). Child streams are derived by mixing, never by
//! consuming draws, so the set of streams is independent of evaluation order
//! and worker-thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

const ROOT_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const CHILD_SALT: u64 = 0xd1b5_4a32_d192_ed03;

/// SplitMix64 finalizer; stable across platforms.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Condenses a master seed plus a label path into a single u64 seed.
pub fn derive_seed(master_seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master_seed ^ ROOT_SALT), |s, &label| {
            splitmix64(s ^ splitmix64(label ^ CHILD_SALT))
        })
}

/// Address of a deterministic random stream.
///
/// Keys are cheap to copy and split; call [`StreamKey::rng`] to materialize
/// the generator for actual draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    state: u64,
}

impl StreamKey {
    /// Root stream for a master seed.
    pub fn root(master_seed: u64) -> Self {
        Self {
            state: splitmix64(master_seed ^ ROOT_SALT),
        }
    }

    /// Derive the child stream for a label. Distinct labels yield
    /// independent streams; the parent is left untouched.
    pub fn child(self, label: u64) -> Self {
        Self {
            state: splitmix64(self.state ^ splitmix64(label ^ CHILD_SALT)),
        }
    }

    /// Convenience for descending several labels at once.
    pub fn descend(self, path: &[u64]) -> Self {
        path.iter().fold(self, |key, &label| key.child(label))
    }

    /// Materialize the stream as a ChaCha generator.
    pub fn rng(self) -> ChaCha12Rng {
        let mut seed = [0u8; 32];
        let mut s = self.state;
        for chunk in seed.chunks_exact_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        ChaCha12Rng::from_seed(seed)
    }
}
