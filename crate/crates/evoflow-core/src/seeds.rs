/// Seed for replicate `index` of a run with the given master seed.
///
/// SplitMix64 finalizer applied to `master + (index+1) * golden-gamma`. The
/// finalizer is a bijection on u64, so distinct replicate indices always get
/// distinct seeds, and the mapping is plain arithmetic — stable across
/// versions and platforms, which keeps replicated runs reproducible.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
