//! Counter-based seed derivation. Every replicate and every k-NN query gets
//! its own stream, so results do not depend on evaluation order or thread
//! count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SPLIT_DOMAIN: u64 = 0x5eed_0001;
const TIE_DOMAIN: u64 = 0x5eed_0002;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of counters.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

/// Stream used to draw the train/test split of replicate `b`.
pub fn split_rng(master: u64, replicate: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, &[SPLIT_DOMAIN, replicate as u64]))
}

/// Stream used to break k-NN label ties for test position `j` of replicate `b`.
pub fn tie_rng(master: u64, replicate: usize, position: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(
        master,
        &[TIE_DOMAIN, replicate as u64, position as u64],
    ))
}
