//! Additive boxes: the value is a sum of independent components, each probed at its
//! own cost. Minimization.

use crate::amort::water_fill;
use crate::cims::{Action, Chain, Commitment, Mdp, Node, NodeId};
use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::mode::Mode;

/// Largest component count accepted by [`AdditiveBox::build`].
pub const BUILD_CAP: usize = 5;
/// Largest component count accepted by [`AdditiveBox::static_commit`].
pub const STATIC_CAP: usize = 6;

/// Per-node record of which atom each component realized (`None` while unprobed).
pub type Probes = Vec<Option<usize>>;

/// A box whose cost is `X_1 + ... + X_k`; component `j` is probed at cost `c_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdditiveBox {
    components: Vec<(Dist, f64)>,
}

/// Result of [`AdditiveBox::static_commit`].
#[derive(Clone, Debug, PartialEq)]
pub struct StaticCommit {
    pub ordering: Vec<usize>,
    pub index: f64,
}

impl AdditiveBox {
    /// # Errors
    ///
    /// No components, or a negative or non-finite cost.
    pub fn new(components: Vec<(Dist, f64)>) -> Result<AdditiveBox> {
        if components.is_empty() {
            return Err(Error::Domain("additive box needs at least one component".into()));
        }
        if let Some((_, c)) = components.iter().find(|(_, c)| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::Domain(format!("component cost {c} must be nonnegative")));
        }
        Ok(AdditiveBox { components })
    }

    pub fn components(&self) -> &[(Dist, f64)] {
        &self.components
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// Full adaptive MDP: every state may probe any unprobed component.
    ///
    /// # Errors
    ///
    /// More than [`BUILD_CAP`] components.
    pub fn build(&self) -> Result<Mdp> {
        Ok(self.build_indexed()?.0)
    }

    /// [`AdditiveBox::build`] together with the probe record of every node.
    pub fn build_indexed(&self) -> Result<(Mdp, Vec<Probes>)> {
        if self.k() > BUILD_CAP {
            return Err(Error::CapExceeded {
                what: "additive components",
                count: self.k() as u128,
                cap: BUILD_CAP as u128,
            });
        }
        let mut nodes = Vec::new();
        let mut probes = Vec::new();
        self.grow(vec![None; self.k()], None, &mut nodes, &mut probes);
        Ok((Mdp::from_nodes(nodes)?, probes))
    }

    /// Chain probing components in `order`.
    ///
    /// # Errors
    ///
    /// `order` is not a permutation of the components.
    pub fn static_chain(&self, order: &[usize]) -> Result<(Chain, Vec<Probes>)> {
        let mut seen = vec![false; self.k()];
        if order.len() != self.k()
            || order
                .iter()
                .any(|&j| j >= self.k() || std::mem::replace(&mut seen[j], true))
        {
            return Err(Error::Domain(format!(
                "{order:?} is not a permutation of 0..{}",
                self.k()
            )));
        }
        let mut nodes = Vec::new();
        let mut probes = Vec::new();
        self.grow(vec![None; self.k()], Some(order), &mut nodes, &mut probes);
        Ok((Chain::new(Mdp::from_nodes(nodes)?)?, probes))
    }

    /// Appends the subtree for state `state`. With `order`, only the first unprobed
    /// component in that order may be probed.
    fn grow(&self, state: Probes, order: Option<&[usize]>, nodes: &mut Vec<Node>, probes: &mut Vec<Probes>) -> NodeId {
        let me = nodes.len();
        nodes.push(Node::Terminal { value: 0.0 });
        probes.push(state.clone());
        let open: Vec<usize> = match order {
            Some(o) => o.iter().copied().filter(|&j| state[j].is_none()).take(1).collect(),
            None => (0..self.k()).filter(|&j| state[j].is_none()).collect(),
        };
        if open.is_empty() {
            let value = state
                .iter()
                .zip(&self.components)
                .map(|(a, (d, _))| d.values()[a.expect("all probed")])
                .sum();
            nodes[me] = Node::Terminal { value };
            return me;
        }
        let mut actions = Vec::with_capacity(open.len());
        for j in open {
            let (d, c) = &self.components[j];
            let mut transitions = Vec::with_capacity(d.len());
            for (a, &p) in d.probs().iter().enumerate() {
                let mut next = state.clone();
                next[j] = Some(a);
                transitions.push((p, self.grow(next, order, nodes, probes)));
            }
            actions.push(Action {
                label: format!("probe {j}"),
                cost: *c,
                transitions,
            });
        }
        nodes[me] = Node::Decision { actions };
        me
    }

    /// The commitment of the full MDP that follows `order` everywhere.
    pub fn static_commitment(&self, mdp: &Mdp, probes: &[Probes], order: &[usize]) -> Commitment {
        Commitment::from_fn(mdp, |id| {
            let state = &probes[id];
            let next = order
                .iter()
                .copied()
                .find(|&j| state[j].is_none())
                .expect("decision node");
            (0..next).filter(|&j| state[j].is_none()).count()
        })
    }

    /// Static ordering with the smallest water-filling index; ties go to the
    /// lexicographically first ordering.
    ///
    /// # Errors
    ///
    /// More than [`STATIC_CAP`] components.
    pub fn static_commit(&self) -> Result<StaticCommit> {
        if self.k() > STATIC_CAP {
            return Err(Error::CapExceeded {
                what: "additive orderings",
                count: (1..=self.k() as u128).product(),
                cap: 720,
            });
        }
        let mut best: Option<StaticCommit> = None;
        for ordering in permutations(self.k()) {
            let (chain, _) = self.static_chain(&ordering)?;
            let index = water_fill(&chain, Mode::Min).root_index();
            if best.as_ref().is_none_or(|b| index < b.index) {
                best = Some(StaticCommit { ordering, index });
            }
        }
        Ok(best.expect("at least one ordering"))
    }
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (1..k).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..k)
            .rev()
            .find(|&j| cur[j] > cur[i - 1])
            .expect("pivot has a successor");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cims::{apply_commitment, enumerate_commitments, validate_mdp};
    use crate::dist::EPS;

    fn coin() -> Dist {
        Dist::new(&[(0.0, 0.5), (2.0, 0.5)]).unwrap()
    }

    #[test]
    fn shapes() {
        let one = AdditiveBox::new(vec![(coin(), 0.5)]).unwrap();
        let m = one.build().unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.node(0).actions().len(), 1);

        let two = AdditiveBox::new(vec![
            (coin(), 0.5),
            (Dist::new(&[(1.0, 0.5), (3.0, 0.5)]).unwrap(), 0.1),
        ])
        .unwrap();
        let (m, probes) = two.build_indexed().unwrap();
        let stats = validate_mdp(&m).unwrap();
        assert_eq!(m.node(0).actions().len(), 2);
        assert_eq!(stats.horizon, 2);
        assert_eq!(stats.leaves, 8);
        for (id, p) in probes.iter().enumerate() {
            if let Some(v) = m.value(id) {
                let want = [0.0, 2.0][p[0].unwrap()] + [1.0, 3.0][p[1].unwrap()];
                assert_eq!(v, want);
            }
        }
        assert!(matches!(
            AdditiveBox::new(vec![(coin(), 0.0); 6]).unwrap().build(),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn static_commit_picks_min_index() {
        let b = AdditiveBox::new(vec![(coin(), 0.5), (Dist::point(1.0), 0.0)]).unwrap();
        let idx: Vec<f64> = [[0, 1], [1, 0]]
            .iter()
            .map(|o| water_fill(&b.static_chain(o).unwrap().0, Mode::Min).root_index())
            .collect();
        // Probing the coin first: level 1 over {0, 2}, then the free constant adds 1.
        assert!((idx[0] - 2.0).abs() < EPS);
        assert!((idx[1] - 2.0).abs() < EPS);
        let s = b.static_commit().unwrap();
        assert_eq!(s.ordering, vec![0, 1]);
        assert!((s.index - 2.0).abs() < EPS);

        let sym = AdditiveBox::new(vec![(coin(), 0.3); 3]).unwrap();
        assert_eq!(sym.static_commit().unwrap().ordering, vec![0, 1, 2]);

        let single = AdditiveBox::new(vec![(coin(), 0.5)]).unwrap();
        assert!((single.static_commit().unwrap().index - 1.0).abs() < EPS);
    }

    #[test]
    fn static_commitment_matches_chain() {
        let b = AdditiveBox::new(vec![
            (coin(), 0.5),
            (Dist::new(&[(1.0, 0.25), (3.0, 0.75)]).unwrap(), 0.2),
        ])
        .unwrap();
        let (m, probes) = b.build_indexed().unwrap();
        assert_eq!(enumerate_commitments(&m).unwrap().len(), 2);
        for order in permutations(2) {
            let pi = b.static_commitment(&m, &probes, &order);
            let via = water_fill(&apply_commitment(&m, &pi).unwrap(), Mode::Min);
            let direct = water_fill(&b.static_chain(&order).unwrap().0, Mode::Min);
            assert!(via.surrogate.approx_eq(&direct.surrogate, 1e-12));
        }
    }

    #[test]
    fn permutation_order() {
        assert_eq!(
            permutations(3),
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0]
            ]
        );
    }
}
