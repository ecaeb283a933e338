//! Seeded fixtures shared by the benchmarks.

use cics_core::{random, Chain, Instance, Matroid, Mdp, Mode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random single-action chain of the given depth and branching.
pub fn chain(seed: u64, depth: usize, branch: usize) -> Chain {
    random::chain(&mut rng(seed), depth, branch)
}

/// A random MDP with up to `actions` actions per decision node.
pub fn mdp(seed: u64, depth: usize, branch: usize, actions: usize) -> Mdp {
    random::mdp(&mut rng(seed), depth, branch, actions)
}

/// `n` random chains for an index-policy run under a uniform matroid of rank `k`.
pub fn chains(seed: u64, n: usize, k: usize, depth: usize) -> (Vec<Chain>, Matroid) {
    let mut r = rng(seed);
    let cs = (0..n).map(|_| random::chain(&mut r, depth, 2)).collect();
    (cs, Matroid::uniform(n, k).unwrap())
}

/// A small selection instance of random MDPs for exhaustive solvers.
pub fn instance(seed: u64, n: usize, k: usize, mode: Mode) -> Instance {
    let mut r = rng(seed);
    let mdps = (0..n).map(|_| random::mdp(&mut r, 2, 2, 2)).collect();
    Instance::new(mdps, Matroid::uniform(n, k).unwrap(), mode).unwrap()
}
