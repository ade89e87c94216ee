//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream selected by a
//! master seed plus integer keys, so results do not depend on how work is
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The splitmix64 finalizer, used to spread keys over the seed space.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream `stream` of the generator keyed by `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A generator keyed by a master seed and a path of integer labels.
pub fn keyed(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut h = mix64(seed);
    key[..8].copy_from_slice(&seed.to_le_bytes());
    for (i, &p) in path.iter().enumerate() {
        h = mix64(h ^ mix64(p.wrapping_add(i as u64 + 1)));
    }
    key[8..16].copy_from_slice(&h.to_le_bytes());
    key[16..24].copy_from_slice(&mix64(h).to_le_bytes());
    key[24..32].copy_from_slice(&(path.len() as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// A fresh 64-bit seed derived from a master seed and labels.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    use rand::RngCore;
    keyed(seed, path).next_u64()
}
