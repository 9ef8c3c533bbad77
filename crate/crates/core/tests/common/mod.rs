#![allow(dead_code)]

use locus_core::{EnumerationBound, FiniteFrame, Poset, Tree};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tree(seed: u64, n: usize) -> Tree {
    Tree::random(&mut rng(seed), n)
}

/// A random partial order: a random relation on `0..n` oriented by index,
/// transitively closed.
#[allow(clippy::needless_range_loop)]
pub fn random_poset(seed: u64, n: usize, density: f64) -> Poset {
    let mut r = rng(seed);
    let mut leq = vec![vec![false; n]; n];
    for i in 0..n {
        leq[i][i] = true;
        for j in i + 1..n {
            leq[i][j] = r.random_bool(density);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if leq[i][k] && leq[k][j] {
                    leq[i][j] = true;
                }
            }
        }
    }
    Poset::validate(&leq).unwrap()
}

/// Frames small enough for exhaustive checks, drawn from powersets, chains
/// and Alexandroff frames of random posets.
pub fn small_frame() -> impl Strategy<Value = FiniteFrame> {
    prop_oneof![
        (1usize..=4).prop_map(FiniteFrame::powerset),
        (1usize..=6).prop_map(FiniteFrame::chain),
        (any::<u64>(), 1usize..=5).prop_map(|(s, n)| {
            let p = random_poset(s, n, 0.4);
            FiniteFrame::alexandroff(&p, EnumerationBound::default()).unwrap().frame
        }),
        (any::<u64>(), 1usize..=6).prop_map(|(s, n)| upset_frame(&random_tree(s, n))),
    ]
}

pub fn upset_frame(t: &Tree) -> FiniteFrame {
    FiniteFrame::alexandroff(&t.poset(), EnumerationBound::default()).unwrap().frame
}
