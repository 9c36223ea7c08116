//! Deterministic sub-seed derivation.
//!
//! Every randomized task in the crate draws from a `ChaCha8` stream keyed by
//! the master seed plus a tag path (for example `[video, account, purpose]`).
//! Parallel and serial execution therefore produce identical output, because
//! no task ever shares or advances another task's stream.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a master seed with a tag path into a single derived seed.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = master ^ 0xA076_1D64_78BD_642F;
    let mut out = splitmix64(&mut state);
    for &tag in tags {
        state ^= tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        out ^= splitmix64(&mut state);
    }
    out
}

/// A `ChaCha8` generator keyed by `derive_seed(master, tags)`.
pub fn derive_rng(master: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut state = derive_seed(master, tags);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
