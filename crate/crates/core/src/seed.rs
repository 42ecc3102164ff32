//! Deterministic child seeds for parallel sweeps.

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for task `index` of a sweep seeded with `base`. Depends only on
/// `(base, index)`, never on scheduling.
pub fn child_seed(base: u64, index: u64) -> u64 {
    mix64(base ^ mix64(index))
}
