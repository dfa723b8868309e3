//! Seeded, reproducible sampling of index tuples.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn choose(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// `count` independent uniform draws of sorted distinct `K`-tuples from `0..n`.
pub fn sorted_tuples<const K: usize>(n: usize, count: usize, seed: u64) -> Vec<[usize; K]> {
    assert!(n >= K);
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let mut t = [0; K];
            for (slot, v) in t.iter_mut().zip(index::sample(&mut rng, n, K)) {
                *slot = v;
            }
            t.sort_unstable();
            t
        })
        .collect()
}
