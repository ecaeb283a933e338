use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matroid::{Matroid, Set};
use super::Method;
use crate::amort::water_fill;
use crate::cims::{Chain, Mdp, Node, NodeId};
use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::mode::Mode;

/// Cap on memoized joint states and enumerated outcome tuples.
pub const STATE_CAP: usize = 2_000_000;

fn check_len(n: usize, m: &Matroid) -> Result<()> {
    if n != m.n() {
        return Err(Error::Domain(format!(
            "{n} alternatives but the matroid has {} elements",
            m.n()
        )));
    }
    Ok(())
}

fn cap_error(what: &'static str, count: usize) -> Error {
    Error::CapExceeded {
        what,
        count: count as u128,
        cap: STATE_CAP as u128,
    }
}

/// Chains with the index of every node precomputed.
struct Indexed<'a> {
    chains: Vec<&'a Mdp>,
    index: Vec<Vec<f64>>,
    matroid: &'a Matroid,
    mode: Mode,
}

impl Indexed<'_> {
    /// The alternative the index rule advances, or `None` when the policy stops.
    fn pick(&self, state: &[NodeId], s: Set) -> Option<usize> {
        let full = self.matroid.full_rank();
        let mut best: Option<(usize, f64)> = None;
        for (i, &node) in state.iter().enumerate() {
            if s >> i & 1 == 1 {
                continue;
            }
            let feasible = match self.mode {
                Mode::Min => self.matroid.augments(s, i),
                Mode::Max => self.matroid.independent(s | 1 << i),
            };
            if !feasible {
                continue;
            }
            let g = self.index[i][node];
            if best.is_none_or(|(_, b)| self.mode.better(g, b)) {
                best = Some((i, g));
            }
        }
        match self.mode {
            Mode::Min if self.matroid.rank(s) == full => None,
            Mode::Max => best.filter(|&(_, g)| g > 0.0).map(|(i, _)| i),
            Mode::Min => best.map(|(i, _)| i),
        }
    }

    fn exact(&self, state: &mut Vec<NodeId>, s: Set, memo: &mut HashMap<(Vec<NodeId>, Set), f64>) -> Result<f64> {
        if let Some(&v) = memo.get(&(state.clone(), s)) {
            return Ok(v);
        }
        if memo.len() >= STATE_CAP {
            return Err(cap_error("index policy joint states", memo.len() + 1));
        }
        let v = match self.pick(state, s) {
            None => match self.mode {
                Mode::Min if self.matroid.rank(s) < self.matroid.full_rank() => f64::INFINITY,
                _ => 0.0,
            },
            Some(i) => match self.chains[i].node(state[i]) {
                Node::Terminal { value } => value + self.exact(state, s | 1 << i, memo)?,
                Node::Decision { actions } => {
                    let a = &actions[0];
                    let here = state[i];
                    let mut total = self.mode.cost_sign() * a.cost;
                    for &(q, child) in &a.transitions {
                        state[i] = child;
                        total += q * self.exact(state, s, memo)?;
                    }
                    state[i] = here;
                    total
                }
            },
        };
        memo.insert((state.clone(), s), v);
        Ok(v)
    }

    fn simulate(&self, rng: &mut ChaCha8Rng) -> f64 {
        let mut state = vec![0; self.chains.len()];
        let mut s: Set = 0;
        let mut total = 0.0;
        while let Some(i) = self.pick(&state, s) {
            match self.chains[i].node(state[i]) {
                Node::Terminal { value } => {
                    total += value;
                    s |= 1 << i;
                }
                Node::Decision { actions } => {
                    let a = &actions[0];
                    total += self.mode.cost_sign() * a.cost;
                    state[i] = sample(&a.transitions, rng);
                }
            }
        }
        if self.mode == Mode::Min && self.matroid.rank(s) < self.matroid.full_rank() {
            return f64::INFINITY;
        }
        total
    }
}

fn sample(transitions: &[(f64, NodeId)], rng: &mut ChaCha8Rng) -> NodeId {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for &(q, c) in transitions {
        acc += q;
        if u < acc {
            return c;
        }
    }
    transitions.last().expect("actions have transitions").1
}

pub(super) fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Expected objective of the water-filling (min) or water-draining (max) index policy
/// on `chains`: repeatedly advance the feasible chain of best index (ties to the lowest
/// id), accepting it when it sits at a terminal. Min-mode stops at a basis; max-mode
/// stops when no feasible chain has a positive index.
///
/// # Errors
///
/// A length mismatch, or more than [`STATE_CAP`] joint states under [`Method::Exact`].
pub fn index_policy_value(chains: &[Chain], matroid: &Matroid, mode: Mode, method: Method) -> Result<f64> {
    check_len(chains.len(), matroid)?;
    let idx = Indexed {
        chains: chains.iter().map(Chain::mdp).collect(),
        index: chains.iter().map(|c| water_fill(c, mode).state_index).collect(),
        matroid,
        mode,
    };
    match method {
        Method::Exact => idx.exact(&mut vec![0; chains.len()], 0, &mut HashMap::new()),
        Method::MonteCarlo { seed, reps } => {
            if reps == 0 {
                return Err(Error::Domain("Monte Carlo needs at least one replica".into()));
            }
            let sum: f64 = (0..reps).map(|r| idx.simulate(&mut replica_rng(seed, r))).sum();
            Ok(sum / reps as f64)
        }
    }
}

/// Optimal deterministic selection for fixed weights by the matroid greedy algorithm:
/// a minimum-weight basis (min) or a maximum-weight independent set of positive
/// weights (max).
pub fn greedy_opt(weights: &[f64], matroid: &Matroid, mode: Mode) -> f64 {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    match mode {
        Mode::Min => order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b])),
        Mode::Max => order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a])),
    }
    let mut s: Set = 0;
    let mut total = 0.0;
    for i in order {
        let take = match mode {
            Mode::Min => matroid.augments(s, i),
            Mode::Max => weights[i] > 0.0 && matroid.independent(s | 1 << i),
        };
        if take {
            s |= 1 << i;
            total += weights[i];
        }
    }
    if mode == Mode::Min && matroid.rank(s) < matroid.full_rank() {
        return f64::INFINITY;
    }
    total
}

/// `E[min over bases of sum W_i]` (min) or `E[max over independent sets of sum W_i]`
/// (max) for independent `W_i`.
///
/// # Errors
///
/// A length mismatch, or a joint support above [`STATE_CAP`] under [`Method::Exact`].
pub fn surrogate_bound(dists: &[Dist], matroid: &Matroid, mode: Mode, method: Method) -> Result<f64> {
    check_len(dists.len(), matroid)?;
    match method {
        Method::Exact => {
            let count = dists
                .iter()
                .try_fold(1usize, |acc, d| acc.checked_mul(d.len()))
                .unwrap_or(usize::MAX);
            if count > STATE_CAP {
                return Err(cap_error("joint surrogate outcomes", count));
            }
            let mut total = 0.0;
            let mut pick = vec![0usize; dists.len()];
            let mut w = vec![0.0; dists.len()];
            loop {
                let mut p = 1.0;
                for (i, d) in dists.iter().enumerate() {
                    w[i] = d.values()[pick[i]];
                    p *= d.probs()[pick[i]];
                }
                total += p * greedy_opt(&w, matroid, mode);
                // Odometer increment.
                let mut i = 0;
                loop {
                    if i == dists.len() {
                        return Ok(total);
                    }
                    pick[i] += 1;
                    if pick[i] < dists[i].len() {
                        break;
                    }
                    pick[i] = 0;
                    i += 1;
                }
            }
        }
        Method::MonteCarlo { seed, reps } => {
            if reps == 0 {
                return Err(Error::Domain("Monte Carlo needs at least one replica".into()));
            }
            let mut sum = 0.0;
            for r in 0..reps {
                let mut rng = replica_rng(seed, r);
                let w: Vec<f64> = dists
                    .iter()
                    .map(|d| {
                        let t: Vec<(f64, NodeId)> = d.probs().iter().copied().zip(0..).collect();
                        d.values()[sample(&t, &mut rng)]
                    })
                    .collect();
                sum += greedy_opt(&w, matroid, mode);
            }
            Ok(sum / reps as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_box_chains() -> (Chain, Chain) {
        let m1 = Chain::pb(&Dist::new(&[(2.0 / 3.0, 0.75), (4.0, 0.25)]).unwrap(), 1.0).unwrap();
        let m2 = Chain::pb(&Dist::new(&[(0.5, 0.25), (3.0, 0.75)]).unwrap(), 0.125).unwrap();
        (m1, m2)
    }

    #[test]
    fn examples() {
        let (a, b) = two_box_chains();
        let one = Matroid::uniform(1, 1).unwrap();
        let v = index_policy_value(std::slice::from_ref(&a), &one, Mode::Min, Method::Exact).unwrap();
        assert!((v - 2.5).abs() < 1e-9);
        let v = index_policy_value(
            &[a.clone(), b.clone()],
            &Matroid::uniform(2, 1).unwrap(),
            Mode::Min,
            Method::Exact,
        )
        .unwrap();
        assert!((v - 31.0 / 16.0).abs() < 1e-9);
        let v = index_policy_value(&[a, b], &Matroid::uniform(2, 2).unwrap(), Mode::Min, Method::Exact).unwrap();
        assert!((v - 5.0).abs() < 1e-9);

        let w1 = Dist::new(&[(2.0, 0.75), (4.0, 0.25)]).unwrap();
        let w2 = Dist::new(&[(1.0, 0.25), (3.0, 0.75)]).unwrap();
        let u = Matroid::uniform(2, 1).unwrap();
        assert!(
            (surrogate_bound(&[w1.clone(), w2], &u, Mode::Min, Method::Exact).unwrap() - 31.0 / 16.0).abs() < 1e-12
        );
        assert!(
            (surrogate_bound(std::slice::from_ref(&w1), &one, Mode::Min, Method::Exact).unwrap() - 2.5).abs() < 1e-12
        );
        assert_eq!(
            surrogate_bound(&[w1], &Matroid::uniform(1, 0).unwrap(), Mode::Max, Method::Exact).unwrap(),
            0.0
        );
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let (a, b) = two_box_chains();
        let u = Matroid::uniform(2, 1).unwrap();
        let mc = Method::MonteCarlo { seed: 7, reps: 20_000 };
        let x = index_policy_value(&[a.clone(), b.clone()], &u, Mode::Min, mc).unwrap();
        let y = index_policy_value(&[a, b], &u, Mode::Min, mc).unwrap();
        assert_eq!(x, y);
        assert!((x - 31.0 / 16.0).abs() < 0.05);
    }

    #[test]
    fn max_mode_single_box() {
        // Draining level 1.5 is positive, so the box is opened: E[X] - c = 1.
        let c = Chain::pb(
            &Dist::new(&[(0.0, 1.0 / 3.0), (2.0, 1.0 / 3.0), (4.0, 1.0 / 3.0)]).unwrap(),
            1.0,
        )
        .unwrap();
        let one = Matroid::uniform(1, 1).unwrap();
        let v = index_policy_value(&[c], &one, Mode::Max, Method::Exact).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn greedy_matches_enumeration() {
        let m = Matroid::partition(vec![vec![0, 2], vec![1, 3, 4]], vec![1, 2]).unwrap();
        let w = [3.0, -1.0, 2.0, 5.0, 0.5];
        let mut best_min = f64::INFINITY;
        let mut best_max = 0.0_f64;
        for s in 0..32u64 {
            let sum: f64 = (0..5).filter(|&i| s >> i & 1 == 1).map(|i| w[i]).sum();
            if m.independent(s) {
                best_max = best_max.max(sum);
                if m.rank(s) == m.full_rank() {
                    best_min = best_min.min(sum);
                }
            }
        }
        assert_eq!(greedy_opt(&w, &m, Mode::Min), best_min);
        assert_eq!(greedy_opt(&w, &m, Mode::Max), best_max);
    }
}
