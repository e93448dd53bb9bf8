//! Per-stage seeds derived from one global seed.

/// FNV-1a over the global seed bytes followed by the stage name, finished with a
/// SplitMix64 avalanche so nearby inputs give unrelated seeds.
pub fn stage_seed(global: u64, stage: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for b in global.to_le_bytes().iter().chain(stage.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(PRIME);
    }
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}
