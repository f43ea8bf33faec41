//! Counter-based random streams for reproducible parallel Monte Carlo.
//!
//! A [`StreamKey`] fully determines a random stream: the master seed and the
//! draw counter select the ChaCha key, the replicate index selects the
//! ChaCha stream. Replicates never share generator state, so results do not
//! depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream tags used by the library when deriving sub-streams.
pub mod tags {
    pub const SAMPLE: u64 = 0x5341_4d50;
    pub const NOISE: u64 = 0x4e4f_4953;
    pub const BOOTSTRAP: u64 = 0x424f_4f54;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub replicate: u64,
    pub counter: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl StreamKey {
    pub fn new(seed: u64, replicate: u64) -> Self {
        Self { seed, replicate, counter: 0 }
    }

    pub fn with_counter(self, counter: u64) -> Self {
        Self { counter, ..self }
    }

    /// Independent sub-stream of this key, labelled by `tag`.
    pub fn derive(self, tag: u64) -> Self {
        let mut state = self.counter ^ tag.rotate_left(17);
        let counter = splitmix64(&mut state) ^ tag;
        Self { counter, ..self }
    }

    pub fn rng(&self) -> StreamRng {
        let mut state = self.seed ^ self.counter.wrapping_mul(0xd6e8_feb8_6659_fd93);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.replicate);
        rng
    }
}
