//! Deterministic seed derivation.
//!
//! Every random stream in a run is keyed by a `u64` derived from the run seed
//! and a path of indices (iteration, stage, rollout). Derivation is a pure
//! function, so rollouts can be evaluated in any order or in parallel and
//! still reproduce bit-identical results.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One round of the SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with an index into an independent child seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base) ^ index.wrapping_mul(GOLDEN_GAMMA).rotate_left(17))
}
