//! Deterministic derivation of independent random substreams.
//!
//! Every randomized routine in this crate is seeded through here: one master
//! seed plus a textual domain name plus an index yield a substream seed that
//! is stable across platforms, releases, and thread schedules. Replicate `r`
//! of an experiment always sees the same randomness no matter how many other
//! replicates run or in what order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; statistically strong mixing of a 64-bit word.
fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a hash of a byte string.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Seed of the `(domain, index)` substream of `master`.
///
/// Mixing happens in three rounds so that master, domain, and index each get
/// full avalanche before the next is folded in.
pub fn substream(master: u64, domain: &str, index: u64) -> u64 {
    let s = splitmix64(master);
    let s = splitmix64(s ^ fnv1a(domain.as_bytes()));
    splitmix64(s ^ index)
}

/// Ready-to-use generator for the `(domain, index)` substream of `master`.
pub fn stream_rng(master: u64, domain: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream(master, domain, index))
}
