//! Deterministic seed derivation and keyed random streams.
//!
//! Every random quantity is addressed by `(master seed, domain, index)` so a
//! trial, a hash direction or a database vector can be regenerated on its own,
//! and parallel schedules cannot change what gets drawn.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains. Distinct domains never share a derived seed.
pub mod domain {
    pub const HASH_INSTANCE: u64 = 0x6861_7368;
    pub const TUPLE: u64 = 0x7475_706c;
    pub const SURVIVAL: u64 = 0x7375_7276;
    pub const SWEEP_CELL: u64 = 0x6365_6c6c;
    pub const DATABASE: u64 = 0x6462_6173;
    pub const BACKGROUND: u64 = 0x626b_6764;
    pub const DETECT_INSTANCE: u64 = 0x6465_7463;
    pub const CONVERGENCE: u64 = 0x636f_6e76;
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a master seed with a domain tag and an index into a fresh 64-bit seed.
#[inline]
pub fn derive_seed(seed: u64, domain: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ domain) ^ index)
}

/// A ChaCha8 generator keyed on `key`, positioned at the start of `stream`.
#[inline]
pub fn keyed_stream(key: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(stream);
    rng
}
