use std::collections::HashMap;

use super::matroid::Set;
use super::policy::STATE_CAP;
use super::Instance;
use crate::cims::{apply_commitment, enumerate_commitments, Commitment, Mdp, Node, NodeId};
use crate::error::{Error, Result};
use crate::mode::Mode;

/// Cap on the number of commitment tuples [`commitment_gap`] evaluates.
pub const GAP_TUPLE_CAP: u128 = 10_000;

/// Output of [`brute_force_opt`].
#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    pub value: f64,
    /// First move of an optimal policy: `"accept i"`, `"i: label"` or `"stop"`.
    pub root_action: String,
}

/// Output of [`commitment_gap`].
#[derive(Clone, Debug, PartialEq)]
pub struct GapResult {
    pub opt: f64,
    /// Optimum of the instance restricted to the best commitment tuple.
    pub committed: f64,
    /// `committed / opt`; at least 1 in min-mode, at most 1 in max-mode.
    pub gap: f64,
    pub best: Vec<Commitment>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Move {
    Stop,
    Accept(usize),
    Act(usize, usize),
}

struct Solver<'a> {
    inst: &'a Instance,
    memo: HashMap<(Vec<NodeId>, Set), (f64, Move)>,
}

impl Solver<'_> {
    fn solve(&mut self, state: &mut Vec<NodeId>, s: Set) -> Result<(f64, Move)> {
        if let Some(&v) = self.memo.get(&(state.clone(), s)) {
            return Ok(v);
        }
        if self.memo.len() >= STATE_CAP {
            return Err(Error::CapExceeded {
                what: "brute-force joint states",
                count: self.memo.len() as u128 + 1,
                cap: STATE_CAP as u128,
            });
        }
        let inst = self.inst;
        let m = &inst.matroid;
        let mode = inst.mode;
        let mut best = match mode {
            Mode::Min if m.rank(s) == m.full_rank() => (0.0, Move::Stop),
            Mode::Min => (f64::INFINITY, Move::Stop),
            Mode::Max => (0.0, Move::Stop),
        };
        let done = mode == Mode::Min && m.rank(s) == m.full_rank();
        for i in (0..state.len()).filter(|&i| !done && s >> i & 1 == 0) {
            let feasible = match mode {
                Mode::Min => m.augments(s, i),
                Mode::Max => m.independent(s | 1 << i),
            };
            if !feasible {
                continue;
            }
            let here = state[i];
            match inst.mdps[i].node(here) {
                Node::Terminal { value } => {
                    let v = value + self.solve(state, s | 1 << i)?.0;
                    if mode.better(v, best.0) {
                        best = (v, Move::Accept(i));
                    }
                }
                Node::Decision { actions } => {
                    for (k, a) in actions.iter().enumerate() {
                        let mut v = mode.cost_sign() * a.cost;
                        for &(q, child) in &a.transitions {
                            state[i] = child;
                            v += q * self.solve(state, s)?.0;
                        }
                        state[i] = here;
                        if mode.better(v, best.0) {
                            best = (v, Move::Act(i, k));
                        }
                    }
                }
            }
        }
        self.memo.insert((state.clone(), s), best);
        Ok(best)
    }
}

/// Optimal adaptive policy value by backward induction over the joint state of all
/// MDPs and the accepted set. Min-mode must complete a basis (infinite when it cannot);
/// max-mode may stop at any time.
///
/// # Errors
///
/// More than [`STATE_CAP`] joint states.
pub fn brute_force_opt(inst: &Instance) -> Result<OptResult> {
    let mut solver = Solver {
        inst,
        memo: HashMap::new(),
    };
    let (value, mv) = solver.solve(&mut vec![0; inst.mdps.len()], 0)?;
    let root_action = match mv {
        Move::Stop => "stop".to_string(),
        Move::Accept(i) => format!("accept {i}"),
        Move::Act(i, k) => format!("{i}: {}", inst.mdps[i].node(0).actions()[k].label),
    };
    Ok(OptResult { value, root_action })
}

/// Best deterministic commitment tuple and its ratio to the unrestricted optimum.
/// Ties keep the first tuple in enumeration order. A zero optimum gives gap 1 when the
/// committed value is also zero.
///
/// # Errors
///
/// More than [`GAP_TUPLE_CAP`] tuples, or a brute-force cap.
pub fn commitment_gap(inst: &Instance) -> Result<GapResult> {
    let per: Vec<Vec<Commitment>> = inst.mdps.iter().map(enumerate_commitments).collect::<Result<_>>()?;
    let count = per.iter().fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128));
    if count > GAP_TUPLE_CAP {
        return Err(Error::CapExceeded {
            what: "commitment tuples",
            count,
            cap: GAP_TUPLE_CAP,
        });
    }
    let opt = brute_force_opt(inst)?.value;
    // Chains are evaluated once per (alternative, commitment).
    let chains: Vec<Vec<Mdp>> = inst
        .mdps
        .iter()
        .zip(&per)
        .map(|(m, cs)| {
            cs.iter()
                .map(|c| Ok(apply_commitment(m, c)?.mdp().clone()))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let mut pick = vec![0usize; per.len()];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let restricted = Instance {
            mdps: pick.iter().enumerate().map(|(i, &k)| chains[i][k].clone()).collect(),
            matroid: inst.matroid.clone(),
            mode: inst.mode,
        };
        let v = brute_force_opt(&restricted)?.value;
        if best.as_ref().is_none_or(|(b, _)| inst.mode.better(v, *b)) {
            best = Some((v, pick.clone()));
        }
        let mut i = 0;
        loop {
            if i == per.len() {
                let (committed, tuple) = best.expect("at least one tuple");
                let gap = if committed == opt { 1.0 } else { committed / opt };
                return Ok(GapResult {
                    opt,
                    committed,
                    gap,
                    best: tuple.iter().enumerate().map(|(i, &k)| per[i][k].clone()).collect(),
                });
            }
            pick[i] += 1;
            if pick[i] < per[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cims::Tree;
    use crate::dist::Dist;
    use crate::select::Matroid;

    fn lookahead_instance() -> Instance {
        let m1 = Mdp::from_tree(&Tree::pb(&Dist::new(&[(0.0, 0.5), (50.0, 0.5)]).unwrap(), 3.0)).unwrap();
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

    #[test]
    fn lookahead_optimum_and_gap() {
        let inst = lookahead_instance();
        let opt = brute_force_opt(&inst).unwrap();
        assert!((opt.value - 4.5).abs() < 1e-9);
        assert_eq!(opt.root_action, "1: a2");
        let gap = commitment_gap(&inst).unwrap();
        assert!((gap.gap - 1.0).abs() < 1e-9);
        assert_eq!(gap.best[1].describe(&inst.mdps[1]), vec!["a2", "a3"]);
    }

    #[test]
    fn max_mode_may_stop() {
        let bad = Mdp::from_tree(&Tree::pb(&Dist::new(&[(0.0, 0.5), (1.0, 0.5)]).unwrap(), 2.0)).unwrap();
        let inst = Instance::new(vec![bad], Matroid::uniform(1, 1).unwrap(), Mode::Max).unwrap();
        let r = brute_force_opt(&inst).unwrap();
        assert_eq!((r.value, r.root_action.as_str()), (0.0, "stop"));
        assert_eq!(commitment_gap(&inst).unwrap().gap, 1.0);
    }
}
