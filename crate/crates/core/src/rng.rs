use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `index` of `seed`. Stream 0 is `seed` itself.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    if index == 0 {
        seed
    } else {
        splitmix64(seed ^ splitmix64(index))
    }
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shuffles `items` and deals them round-robin into `k` piles; pile sizes differ by at most one
/// and earlier piles are never smaller.
pub fn deal<T: Clone>(items: &[T], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<T>> {
    let mut order: Vec<T> = items.to_vec();
    order.shuffle(rng);
    let mut piles = vec![Vec::new(); k];
    for (pos, item) in order.into_iter().enumerate() {
        piles[pos % k].push(item);
    }
    piles
}
