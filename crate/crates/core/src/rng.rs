//! Counter-addressed random streams.
//!
//! Every random draw of a chain comes from a ChaCha8 block cipher keyed by
//! the chain key. The cipher's 64-bit stream id is the iteration number and
//! the word position selects a slot inside the iteration: slot 0 feeds the
//! error-variance update, slot `j + 1` feeds tree `j`. Any (iteration, slot)
//! pair can therefore be regenerated independently, in any order, on any
//! thread, and yields the same values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Words reserved per slot. No slot comes close to consuming this many.
const SLOT_WORDS: u128 = 1 << 32;

/// Stream id used for draws made outside the iteration schedule (prior
/// initialisation and similar).
pub const AUX_STREAM: u64 = u64::MAX;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 256-bit key of one chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainKey([u8; 32]);

impl ChainKey {
    pub fn new(seed: u64, chain: u64) -> Self {
        let mut state = seed ^ chain.wrapping_mul(0xD134_2543_DE82_EF95);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self(key)
    }

    /// Generator positioned at the start of `slot` within `stream`.
    pub fn stream(&self, stream: u64, slot: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::from_seed(self.0);
        rng.set_stream(stream);
        rng.set_word_pos(slot as u128 * SLOT_WORDS);
        rng
    }

    /// Generator for tree `j` at `iteration`.
    pub fn tree_stream(&self, iteration: u64, j: usize) -> StreamRng {
        self.stream(iteration, j as u64 + 1)
    }

    /// Generator for the error-variance draw at `iteration`.
    pub fn sigma_stream(&self, iteration: u64) -> StreamRng {
        self.stream(iteration, 0)
    }
}
