//! Deterministic seed derivation.
//!
//! Every random stream in the crate is derived from one root seed plus a
//! textual component label and an index path, so adding work units (walks,
//! trees, grid cells) never perturbs the streams of existing ones, and
//! parallel execution order cannot matter.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step, used as the mixing primitive.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mix_bytes(state: &mut u64, bytes: &[u8]) {
    for chunk in bytes.chunks(8) {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        *state ^= u64::from_le_bytes(word);
        splitmix64(state);
    }
}

/// Derive a generator from `(root, label, path)`.
///
/// Distinct labels or index paths yield independent streams; the same triple
/// always yields the same stream, on every platform.
pub fn derive_rng(root: u64, label: &str, path: &[u64]) -> ChaCha8Rng {
    let mut state = root;
    splitmix64(&mut state);
    mix_bytes(&mut state, label.as_bytes());
    for &part in path {
        state ^= part;
        splitmix64(&mut state);
    }
    let mut seed = [0u8; 32];
    for word in seed.chunks_mut(8) {
        word.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
