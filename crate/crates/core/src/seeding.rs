//! Counter-based seed derivation.
//!
//! A single experiment seed is split into independent per-trial streams by
//! mixing structured indices into the seed with a splitmix64 finalizer.
//! Results are therefore independent of execution order and thread count.

/// splitmix64 finalizer; full 64-bit avalanche.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and up to three indices
/// (e.g. grid point, frame mode, trial).
pub fn derive_seed(master: u64, a: u64, b: u64, c: u64) -> u64 {
    let mut z = mix(master);
    z = mix(z ^ a);
    z = mix(z ^ b);
    mix(z ^ c)
}
