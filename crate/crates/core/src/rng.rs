//! Counter-based random streams.
//!
//! Every draw is a pure function of `(master_seed, stream_id, step)`: the
//! first two form the ChaCha key and the step index selects the 64-bit
//! nonce, so a trajectory can be replayed from any step on any worker.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Handle for one trajectory's noise stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl StreamKey {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Generator for step `step`, independent of every other
    /// `(stream_id, step)` pair under the same master seed.
    pub fn at_step(&self, step: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream_id.to_le_bytes());
        // domain tag so keys never collide with a plain `seed_from_u64`
        key[16..24].copy_from_slice(b"spme-rng");
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(step);
        rng
    }
}
