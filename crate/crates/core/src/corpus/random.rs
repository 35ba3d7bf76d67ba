//! Seeded random tangles.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::weave::{Gen, Weave};
use crate::diagram::Diagram;

/// Place `k` non-overlapping caps among `width` positions.
fn random_caps(rng: &mut ChaCha8Rng, width: usize, k: usize) -> Vec<usize> {
    let items = width - k;
    let mut chosen: Vec<usize> = sample(rng, items, k).into_vec();
    chosen.sort_unstable();
    // Item j (in sorted order) starts at position item + j because each
    // earlier cap shifts it by one.
    chosen
        .iter()
        .enumerate()
        .map(|(j, &item)| item + j)
        .collect()
}

fn attempt(rng: &mut ChaCha8Rng, n_cables: usize, n_crossings: usize) -> Option<Diagram> {
    let width = 2 * n_cables;
    let k_left = rng.gen_range(0..=n_cables);
    let left = random_caps(rng, width, k_left);
    let right = random_caps(rng, width, n_cables - k_left);
    let word = (0..n_crossings)
        .map(|_| Gen::Sigma {
            i: rng.gen_range(0..width - 1),
            left_over: rng.gen(),
        })
        .collect();
    Weave::new(width, left, right, word).build().ok()
}

/// A diagram of `n_cables` cables and exactly `n_crossings` crossings, all
/// of arity 2. Deterministic in `seed`.
///
/// Strands are laid out as a random plat: `2 * n_cables` positions with
/// `n_cables` caps spread over both sides, crossed by a random word. Words
/// that close a loop are redrawn; after many misses the caps are dropped,
/// which can never close a loop.
pub fn generate_random(seed: u64, n_cables: u32, n_crossings: u32) -> Diagram {
    let n = n_cables.max(1) as usize;
    let x = n_crossings as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..256 {
        if let Some(d) = attempt(&mut rng, n, x) {
            return d;
        }
    }
    let word = (0..x)
        .map(|_| Gen::Sigma {
            i: if n > 1 { rng.gen_range(0..n - 1) } else { 0 },
            left_over: rng.gen(),
        })
        .collect();
    let width = if n > 1 { n } else { 2 };
    let caps = if n > 1 { vec![] } else { vec![0] };
    Weave::new(width, caps, vec![], word)
        .build()
        .expect("an open plat has no closed loops")
}
