/// Derives a child seed from a parent seed and a stream index
/// (SplitMix64 finaliser over the combined words).
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replicate `run` at sample size `n`.
pub fn replicate_seed(master: u64, n: usize, run: usize) -> u64 {
    mix_seed(mix_seed(master, n as u64), run as u64)
}
