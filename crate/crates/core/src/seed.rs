//! Stable per-run seed derivation.

use alloc::format;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// FNV-1a over the UTF-8 text `"{master}:{stream}:{repeat}"`.
pub fn stable_hash(master_seed: u64, stream: &str, repeat: u64) -> u64 {
    fnv1a64(format!("{master_seed}:{stream}:{repeat}").as_bytes())
}

/// The generator every sampling step of one (stream, repeat) draws from.
pub fn child_rng(master_seed: u64, stream: &str, repeat: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stable_hash(master_seed, stream, repeat))
}
