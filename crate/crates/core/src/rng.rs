//! Counter-style random streams: one ChaCha key per (seed, domain, grid point)
//! and one stream per trial, so a trial's draws never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Separates noise draws from message draws under the same master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Domain {
    Noise = 1,
    Messages = 2,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key(seed: u64, domain: Domain, grid_index: u64) -> [u8; 32] {
    let mut state = seed;
    let mut mix = splitmix64(&mut state) ^ (domain as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93);
    mix ^= grid_index.wrapping_mul(0xA076_1D64_78BD_642F);
    let mut state = mix;
    let mut out = [0u8; 32];
    for chunk in out.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    out
}

/// Stream for one trial of one grid point.
pub(crate) fn trial_rng(
    seed: u64,
    domain: Domain,
    grid_index: u64,
    trial_index: u64,
) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key(seed, domain, grid_index));
    rng.set_stream(trial_index);
    rng
}
