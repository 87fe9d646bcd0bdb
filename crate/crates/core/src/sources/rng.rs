//! Counter-based random streams.
//!
//! Every stochastic computation draws from a ChaCha8 keystream. The 256-bit
//! key is derived from the user seed with four rounds of SplitMix64, and
//! independent streams (one per replicate) are selected with the ChaCha
//! 64-bit stream id. A replicate's numbers therefore depend only on
//! `(seed, replicate index)`, never on which worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for stream `stream` of master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn draws(seed: u64, stream: u64) -> Vec<u64> {
        let mut r = stream_rng(seed, stream);
        (0..4).map(|_| r.random()).collect()
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        assert_eq!(draws(7, 3), draws(7, 3));
        assert_ne!(draws(7, 3), draws(7, 4));
        assert_ne!(draws(7, 3), draws(8, 3));
    }

    #[test]
    fn keystream_is_pinned() {
        // Golden value: changing the key schedule breaks every stored table.
        let mut r = stream_rng(0, 0);
        let first: u64 = r.random();
        assert_eq!(first, GOLDEN_FIRST);
    }

    const GOLDEN_FIRST: u64 = 13_804_888_775_535_289_832;
}
