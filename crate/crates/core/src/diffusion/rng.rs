//! Counter-style substreams: every walker draws from its own ChaCha stream
//! keyed on (seed, point, walker), so results do not depend on how work is
//! split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// A family of random streams identified by a seed and a point index
/// (e.g. the gradient-sweep position).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Substream {
    pub seed: u64,
    pub point: u64,
}

impl Substream {
    pub fn new(seed: u64, point: u64) -> Self {
        Self { seed, point }
    }

    /// Generator for one walker during one evolution epoch.
    pub fn walker(&self, walker: u64, epoch: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut h = splitmix(self.seed);
        for (i, word) in [self.point, walker, 0x6e6f_6f6e, 0x7066_6721].iter().enumerate() {
            h = splitmix(h ^ word.rotate_left(17 * i as u32 + 1));
            key[i * 8..(i + 1) * 8].copy_from_slice(&h.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(epoch);
        rng
    }

    /// Generator for auxiliary work on this point (bootstrap resampling).
    pub fn auxiliary(&self, tag: u64) -> ChaCha8Rng {
        self.walker(u64::MAX - tag, u64::MAX)
    }
}
