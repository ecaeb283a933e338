//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use cics_core::cims::apply_commitment;
use cics_core::variants::{AdditiveBox, PbpiBox, Probes};
use cics_core::{water_fill, Chain, Commitment, Dist, Instance, Matroid, Mdp, Mode, Tree};

pub fn d(pairs: &[(f64, f64)]) -> Dist {
    Dist::new(pairs).unwrap()
}

/// The two single-action chains of the water-filling figure.
pub fn two_box_chains() -> (Chain, Chain) {
    (
        Chain::pb(&d(&[(2.0 / 3.0, 0.75), (4.0, 0.25)]), 1.0).unwrap(),
        Chain::pb(&d(&[(0.5, 0.25), (3.0, 0.75)]), 0.125).unwrap(),
    )
}

/// One decision between the two chains of [`two_box_chains`].
pub fn two_action_mdp() -> Mdp {
    Mdp::from_tree(&Tree::node(vec![
        Tree::act("1", 1.0, vec![(0.75, Tree::leaf(2.0 / 3.0)), (0.25, Tree::leaf(4.0))]),
        Tree::act("2", 0.125, vec![(0.25, Tree::leaf(0.5)), (0.75, Tree::leaf(3.0))]),
    ]))
    .unwrap()
}

/// Two alternatives, single selection: a fair coin over {0, 50} behind cost 3, and an
/// MDP offering 5 outright or a free coin flip leading to 0 or to a choice between 12
/// and another {0, 50} coin.
pub fn lookahead_instance() -> Instance {
    let m1 = Mdp::from_tree(&Tree::pb(&d(&[(0.0, 0.5), (50.0, 0.5)]), 3.0)).unwrap();
    let s = Tree::node(vec![
        Tree::act("a3", 0.0, vec![(1.0, Tree::leaf(12.0))]),
        Tree::act("a4", 0.0, vec![(0.5, Tree::leaf(0.0)), (0.5, Tree::leaf(50.0))]),
    ]);
    let m2 = Mdp::from_tree(&Tree::node(vec![
        Tree::act("a1", 0.0, vec![(1.0, Tree::leaf(5.0))]),
        Tree::act("a2", 0.0, vec![(0.5, Tree::leaf(0.0)), (0.5, s)]),
    ]))
    .unwrap();
    Instance::new(vec![m1, m2], Matroid::uniform(2, 1).unwrap(), Mode::Min).unwrap()
}

/// Partial-inspection example: a peekable coin over {0, 2} and a free box that is 2 or
/// effectively infinite (`sentinel`).
pub fn peek_gap_instance(sentinel: f64) -> (PbpiBox, PbpiBox, Instance) {
    let b1 = PbpiBox::new(d(&[(0.0, 0.5), (2.0, 0.5)]), 1.0, 0.25).unwrap();
    let b2 = PbpiBox::new(d(&[(2.0, 0.5), (sentinel, 0.5)]), 0.0, 0.0).unwrap();
    let inst = Instance::new(vec![b1.build(), b2.build()], Matroid::uniform(2, 1).unwrap(), Mode::Min).unwrap();
    (b1, b2, inst)
}

/// Trajectory cost of every leaf of `chain`, keyed by the probe record of the leaf.
pub fn leaf_costs(chain: &Chain, probes: &[Probes]) -> HashMap<Vec<usize>, f64> {
    let fill = water_fill(chain, Mode::Min);
    chain
        .leaves()
        .into_iter()
        .map(|(leaf, _, _)| {
            let key: Vec<usize> = probes[chain.origin(leaf)].iter().map(|a| a.unwrap()).collect();
            (key, fill.trajectory_cost[leaf].unwrap())
        })
        .collect()
}

/// Per-leaf minimum trajectory cost over every deterministic commitment of an additive
/// box, as a distribution over leaves.
pub fn additive_best_commit(b: &AdditiveBox, commitments: &[Commitment]) -> Dist {
    let (m, probes) = b.build_indexed().unwrap();
    let mut best: HashMap<Vec<usize>, f64> = HashMap::new();
    for pi in commitments {
        let chain = apply_commitment(&m, pi).unwrap();
        for (k, v) in leaf_costs(&chain, &probes) {
            let e = best.entry(k).or_insert(f64::INFINITY);
            *e = e.min(v);
        }
    }
    leaf_dist(b, &best)
}

/// Distribution of a per-leaf quantity under the product law of the components.
pub fn leaf_dist(b: &AdditiveBox, per_leaf: &HashMap<Vec<usize>, f64>) -> Dist {
    let atoms: Vec<(f64, f64)> = per_leaf
        .iter()
        .map(|(k, &v)| {
            let p: f64 = k.iter().zip(b.components()).map(|(&a, (d, _))| d.probs()[a]).product();
            (v, p)
        })
        .collect();
    Dist::from_weights(&atoms).unwrap()
}

pub fn report(name: &str, result: &Result<String, String>) {
    match result {
        Ok(detail) => println!("PASS {name}: {detail}"),
        Err(detail) => println!("FAIL {name}: {detail}"),
    }
}
