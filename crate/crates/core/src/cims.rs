//! Tree-shaped costly-information MDPs, commitments and the chains they induce.
//!
//! An [`Mdp`] is an arena of [`Node`]s rooted at node `0`. Decision nodes carry costly
//! actions with stochastic transitions to children; terminal nodes carry the value
//! accepted when the alternative is selected there. Every node has exactly one parent,
//! so a root-to-leaf path (a trajectory) is identified by its leaf.
//!
//! A [`Commitment`] fixes a (possibly randomized) action at each decision node and
//! turns the MDP into a [`Chain`], an MDP whose decision nodes have a single action.

use crate::dist::{Dist, EPS, EPS_P};
use crate::error::{Error, Result};

/// Index of a node in an [`Mdp`] arena.
pub type NodeId = usize;

/// A costly action with its transition distribution over child nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    pub label: String,
    pub cost: f64,
    /// `(probability, child)` pairs.
    pub transitions: Vec<(f64, NodeId)>,
}

/// A state of an MDP.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Terminal { value: f64 },
    Decision { actions: Vec<Action> },
}

impl Node {
    pub fn is_terminal(&self) -> bool {
        matches!(self, Node::Terminal { .. })
    }

    pub fn actions(&self) -> &[Action] {
        match self {
            Node::Terminal { .. } => &[],
            Node::Decision { actions } => actions,
        }
    }
}

/// One action of a [`Tree::Node`]: `(label, cost, [(prob, subtree)])`.
pub type TreeAction = (String, f64, Vec<(f64, Tree)>);

/// Nested description of an MDP, convenient for building instances by hand.
#[derive(Clone, Debug, PartialEq)]
pub enum Tree {
    Leaf(f64),
    Node(Vec<TreeAction>),
}

impl Tree {
    pub fn leaf(value: f64) -> Tree {
        Tree::Leaf(value)
    }

    /// A decision node with the given actions.
    pub fn node(actions: Vec<TreeAction>) -> Tree {
        Tree::Node(actions)
    }

    /// One action of a [`Tree::Node`].
    pub fn act(label: &str, cost: f64, branches: Vec<(f64, Tree)>) -> TreeAction {
        (label.to_string(), cost, branches)
    }

    /// A single-action node: pay `cost`, then land on a terminal drawn from `dist`.
    pub fn pb(dist: &Dist, cost: f64) -> Tree {
        Tree::node(vec![Tree::act(
            "open",
            cost,
            dist.atoms().map(|(v, p)| (p, Tree::leaf(v))).collect(),
        )])
    }
}

/// A tree-shaped costly-information MDP.
#[derive(Clone, Debug, PartialEq)]
pub struct Mdp {
    nodes: Vec<Node>,
}

/// Shape summary returned by [`validate_mdp`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MdpStats {
    /// Longest number of actions on a root-to-leaf path.
    pub horizon: usize,
    pub states: usize,
    pub leaves: usize,
}

impl Mdp {
    /// Builds and validates an MDP from a nested description.
    pub fn from_tree(tree: &Tree) -> Result<Mdp> {
        let m = Self::from_tree_unchecked(tree);
        validate_mdp(&m)?;
        Ok(m)
    }

    /// Builds an MDP without validation; see [`validate_mdp`].
    pub fn from_tree_unchecked(tree: &Tree) -> Mdp {
        let mut nodes = Vec::new();
        fn push(t: &Tree, nodes: &mut Vec<Node>) -> NodeId {
            let id = nodes.len();
            nodes.push(Node::Terminal { value: 0.0 });
            nodes[id] = match t {
                Tree::Leaf(v) => Node::Terminal { value: *v },
                Tree::Node(acts) => Node::Decision {
                    actions: acts
                        .iter()
                        .map(|(label, cost, branches)| Action {
                            label: label.clone(),
                            cost: *cost,
                            transitions: branches.iter().map(|(p, sub)| (*p, push(sub, nodes))).collect(),
                        })
                        .collect(),
                },
            };
            id
        }
        push(tree, &mut nodes);
        Mdp { nodes }
    }

    /// Builds an MDP from a raw arena rooted at node `0` and validates it.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Mdp> {
        let m = Mdp { nodes };
        validate_mdp(&m)?;
        Ok(m)
    }

    /// A single terminal of value `v`.
    pub fn terminal(v: f64) -> Mdp {
        Mdp {
            nodes: vec![Node::Terminal { value: v }],
        }
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Back to the nested description.
    pub fn to_tree(&self) -> Tree {
        self.subtree(self.root())
    }

    fn subtree(&self, id: NodeId) -> Tree {
        match &self.nodes[id] {
            Node::Terminal { value } => Tree::Leaf(*value),
            Node::Decision { actions } => Tree::Node(
                actions
                    .iter()
                    .map(|a| {
                        (
                            a.label.clone(),
                            a.cost,
                            a.transitions.iter().map(|&(p, c)| (p, self.subtree(c))).collect(),
                        )
                    })
                    .collect(),
            ),
        }
    }

    /// The sub-MDP rooted at `id`, re-indexed from zero.
    pub fn sub_mdp(&self, id: NodeId) -> Mdp {
        Self::from_tree_unchecked(&self.subtree(id))
    }

    /// Terminal value of a terminal node.
    pub fn value(&self, id: NodeId) -> Option<f64> {
        match self.nodes[id] {
            Node::Terminal { value } => Some(value),
            Node::Decision { .. } => None,
        }
    }

    /// Expected terminal value reached from `id` under each action, following the
    /// first action at deeper nodes.
    pub fn action_means(&self, id: NodeId) -> Vec<f64> {
        self.nodes[id]
            .actions()
            .iter()
            .map(|a| a.transitions.iter().map(|&(p, c)| p * self.first_action_mean(c)).sum())
            .collect()
    }

    fn first_action_mean(&self, id: NodeId) -> f64 {
        match &self.nodes[id] {
            Node::Terminal { value } => *value,
            Node::Decision { actions } => actions[0]
                .transitions
                .iter()
                .map(|&(p, c)| p * self.first_action_mean(c))
                .sum(),
        }
    }

    /// Posterior mean `v(s)` when every action at every node below `id` leads to the
    /// same expected terminal value (within [`EPS`]); `None` otherwise.
    pub fn posterior_mean(&self, id: NodeId) -> Option<f64> {
        match &self.nodes[id] {
            Node::Terminal { value } => Some(*value),
            Node::Decision { actions } => {
                let mut mean = None;
                for a in actions {
                    let mut m = 0.0;
                    for &(p, c) in &a.transitions {
                        m += p * self.posterior_mean(c)?;
                    }
                    match mean {
                        None => mean = Some(m),
                        Some(prev) if (prev - m).abs() <= EPS * m.abs().max(1.0) => {}
                        Some(_) => return None,
                    }
                }
                mean
            }
        }
    }
}

/// Checks the structural invariants of an MDP.
///
/// # Errors
///
/// [`Error::InvalidMdp`] listing every violation with the path of the offending node
/// (`root/<action>/<branch>/...`).
pub fn validate_mdp(m: &Mdp) -> Result<MdpStats> {
    let mut problems = Vec::new();
    if m.nodes.is_empty() {
        return Err(Error::InvalidMdp(vec!["no nodes".into()]));
    }
    let n = m.nodes.len();
    let mut parents = vec![0usize; n];
    for node in &m.nodes {
        for a in node.actions() {
            for &(_, c) in &a.transitions {
                if c < n {
                    parents[c] += 1;
                }
            }
        }
    }
    if parents[0] > 0 {
        problems.push("root has a parent".to_string());
    }
    let mut horizon = 0;
    let mut leaves = 0;
    let mut seen = vec![false; n];
    let mut stack = vec![(0usize, "root".to_string(), 0usize)];
    while let Some((id, path, depth)) = stack.pop() {
        if seen[id] {
            continue;
        }
        seen[id] = true;
        horizon = horizon.max(depth);
        if parents[id] > 1 {
            problems.push(format!("{path}: node has {} parents", parents[id]));
        }
        match &m.nodes[id] {
            Node::Terminal { value } => {
                leaves += 1;
                if !(value.is_finite() && *value >= 0.0) {
                    problems.push(format!("{path}: terminal value {value} is not a nonnegative number"));
                }
            }
            Node::Decision { actions } => {
                if actions.is_empty() {
                    problems.push(format!("{path}: decision node without actions"));
                }
                for (ai, a) in actions.iter().enumerate() {
                    let apath = format!(
                        "{path}/{}",
                        if a.label.is_empty() {
                            ai.to_string()
                        } else {
                            a.label.clone()
                        }
                    );
                    if !(a.cost.is_finite() && a.cost >= 0.0) {
                        problems.push(format!("{apath}: cost {} is not a nonnegative number", a.cost));
                    }
                    if a.transitions.is_empty() {
                        problems.push(format!("{apath}: action without transitions"));
                    }
                    let mut mass = 0.0;
                    for (bi, &(p, c)) in a.transitions.iter().enumerate() {
                        if !(p.is_finite() && p > 0.0) {
                            problems.push(format!("{apath}/{bi}: transition probability {p}"));
                        }
                        mass += p;
                        if c >= n {
                            problems.push(format!("{apath}/{bi}: child {c} out of range"));
                        } else {
                            stack.push((c, format!("{apath}/{bi}"), depth + 1));
                        }
                    }
                    let tol = EPS_P * (a.transitions.len() as f64).max(1.0);
                    if !a.transitions.is_empty() && (mass - 1.0).abs() > tol {
                        problems.push(format!("{apath}: transition mass {mass}"));
                    }
                }
            }
        }
    }
    let unreachable = seen.iter().filter(|s| !**s).count();
    if unreachable > 0 {
        problems.push(format!("{unreachable} nodes unreachable from the root"));
    }
    if problems.is_empty() {
        Ok(MdpStats {
            horizon,
            states: n,
            leaves,
        })
    } else {
        Err(Error::InvalidMdp(problems))
    }
}

/// An MDP whose decision nodes each have exactly one action.
///
/// Keeps the id of the originating MDP node for every chain node, so results computed
/// on the chain can be mapped back.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    mdp: Mdp,
    origin: Vec<NodeId>,
}

impl Chain {
    /// Wraps a single-action MDP.
    ///
    /// # Errors
    ///
    /// A decision node with more than one action, or an invalid MDP.
    pub fn new(mdp: Mdp) -> Result<Chain> {
        validate_mdp(&mdp)?;
        let bad: Vec<String> = mdp
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.actions().len() > 1)
            .map(|(i, n)| format!("node {i} has {} actions", n.actions().len()))
            .collect();
        if !bad.is_empty() {
            return Err(Error::InvalidMdp(bad));
        }
        let origin = (0..mdp.len()).collect();
        Ok(Chain { mdp, origin })
    }

    /// Classical Pandora's box: one action of cost `cost` revealing `dist`.
    pub fn pb(dist: &Dist, cost: f64) -> Result<Chain> {
        Chain::new(Mdp::from_tree(&Tree::pb(dist, cost))?)
    }

    pub fn mdp(&self) -> &Mdp {
        &self.mdp
    }

    /// The node of the source MDP that chain node `id` came from.
    pub fn origin(&self, id: NodeId) -> NodeId {
        self.origin[id]
    }

    /// The single action at `id`, if it is a decision node.
    pub fn action(&self, id: NodeId) -> Option<&Action> {
        self.mdp.nodes[id].actions().first()
    }

    /// Leaves as `(node, path probability, value)` in depth-first order.
    pub fn leaves(&self) -> Vec<(NodeId, f64, f64)> {
        let mut out = Vec::new();
        let mut stack = vec![(self.mdp.root(), 1.0)];
        while let Some((id, p)) = stack.pop() {
            match &self.mdp.nodes[id] {
                Node::Terminal { value } => out.push((id, p, *value)),
                Node::Decision { actions } => {
                    for &(q, c) in actions[0].transitions.iter().rev() {
                        stack.push((c, p * q));
                    }
                }
            }
        }
        out
    }

    /// Distribution of the accepted terminal value.
    pub fn value_dist(&self) -> Dist {
        let atoms: Vec<(f64, f64)> = self.leaves().into_iter().map(|(_, p, v)| (v, p)).collect();
        Dist::from_weights(&atoms).expect("chain leaves carry positive mass")
    }
}

/// A per-state choice of action distribution.
///
/// Indexed by MDP node; terminal and unreachable nodes carry no choice.
#[derive(Clone, Debug, PartialEq)]
pub struct Commitment {
    choice: Vec<Option<Vec<f64>>>,
}

impl Commitment {
    /// A deterministic commitment from per-node action indices.
    pub fn deterministic(actions: Vec<Option<usize>>, mdp: &Mdp) -> Commitment {
        let choice = actions
            .into_iter()
            .enumerate()
            .map(|(id, a)| {
                a.map(|k| {
                    let mut v = vec![0.0; mdp.node(id).actions().len().max(k + 1)];
                    v[k] = 1.0;
                    v
                })
            })
            .collect();
        Commitment { choice }
    }

    /// A deterministic commitment picking `f(node)` at every decision node.
    pub fn from_fn(mdp: &Mdp, f: impl Fn(NodeId) -> usize) -> Commitment {
        let acts = (0..mdp.len())
            .map(|id| (!mdp.node(id).is_terminal()).then(|| f(id)))
            .collect();
        Self::deterministic(acts, mdp)
    }

    /// A randomized commitment from per-node probability vectors.
    pub fn randomized(choice: Vec<Option<Vec<f64>>>) -> Commitment {
        Commitment { choice }
    }

    /// The trivial commitment of a chain.
    pub fn trivial(mdp: &Mdp) -> Commitment {
        Self::from_fn(mdp, |_| 0)
    }

    pub fn choice(&self, id: NodeId) -> Option<&[f64]> {
        self.choice.get(id).and_then(|c| c.as_deref())
    }

    /// The chosen action at `id` when it is deterministic.
    pub fn action(&self, id: NodeId) -> Option<usize> {
        let c = self.choice(id)?;
        let k = c.iter().position(|&p| p > 0.0)?;
        (c.iter().filter(|&&p| p > 0.0).count() == 1).then_some(k)
    }

    pub fn is_deterministic(&self) -> bool {
        self.choice
            .iter()
            .flatten()
            .all(|c| c.iter().filter(|&&p| p > 0.0).count() == 1)
    }

    /// Chosen action labels along the states reachable under the commitment, in
    /// depth-first order.
    pub fn describe(&self, mdp: &Mdp) -> Vec<String> {
        let mut out = Vec::new();
        let mut stack = vec![mdp.root()];
        while let Some(id) = stack.pop() {
            let acts = mdp.node(id).actions();
            if acts.is_empty() {
                continue;
            }
            if let Some(c) = self.choice(id) {
                for (k, &p) in c.iter().enumerate().rev() {
                    if p > 0.0 {
                        if p < 1.0 {
                            out.push(format!("{}@{p}", acts[k].label));
                        } else {
                            out.push(acts[k].label.clone());
                        }
                        for &(_, ch) in acts[k].transitions.iter().rev() {
                            stack.push(ch);
                        }
                    }
                }
            }
        }
        out
    }
}

/// The chain obtained by following `pi` in `m`.
///
/// Randomized choices become one mixture action whose cost is the weighted mean cost
/// and whose transitions are the weighted union of the chosen actions' transitions.
///
/// # Errors
///
/// A reachable decision node without a valid choice.
pub fn apply_commitment(m: &Mdp, pi: &Commitment) -> Result<Chain> {
    let mut nodes: Vec<Node> = Vec::new();
    let mut origin: Vec<NodeId> = Vec::new();
    fn walk(m: &Mdp, pi: &Commitment, id: NodeId, nodes: &mut Vec<Node>, origin: &mut Vec<NodeId>) -> Result<NodeId> {
        let me = nodes.len();
        nodes.push(Node::Terminal { value: 0.0 });
        origin.push(id);
        match m.node(id) {
            Node::Terminal { value } => nodes[me] = Node::Terminal { value: *value },
            Node::Decision { actions } => {
                let c = pi
                    .choice(id)
                    .filter(|c| c.len() <= actions.len() || c[actions.len()..].iter().all(|&p| p == 0.0))
                    .ok_or_else(|| Error::Domain(format!("commitment has no valid choice at node {id}")))?;
                let total: f64 = c.iter().sum();
                if c.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > EPS_P * (c.len() as f64).max(1.0) {
                    return Err(Error::Domain(format!("choice at node {id} is not a distribution")));
                }
                let picked: Vec<(usize, f64)> = c.iter().copied().enumerate().filter(|&(_, p)| p > 0.0).collect();
                let label = if picked.len() == 1 {
                    actions[picked[0].0].label.clone()
                } else {
                    "mix".to_string()
                };
                let mut cost = 0.0;
                let mut transitions = Vec::new();
                for (k, w) in picked {
                    cost += w * actions[k].cost;
                    for &(p, child) in &actions[k].transitions {
                        let cid = walk(m, pi, child, nodes, origin)?;
                        transitions.push((w * p, cid));
                    }
                }
                nodes[me] = Node::Decision {
                    actions: vec![Action {
                        label,
                        cost,
                        transitions,
                    }],
                };
            }
        }
        Ok(me)
    }
    walk(m, pi, m.root(), &mut nodes, &mut origin)?;
    Ok(Chain {
        mdp: Mdp { nodes },
        origin,
    })
}

/// Number of distinct deterministic commitments (choices at unreachable nodes are not
/// counted), saturating.
pub fn count_commitments(m: &Mdp) -> u128 {
    fn count(m: &Mdp, id: NodeId) -> u128 {
        m.node(id)
            .actions()
            .iter()
            .map(|a| {
                a.transitions
                    .iter()
                    .fold(1u128, |acc, &(_, c)| acc.saturating_mul(count(m, c)))
            })
            .fold(if m.node(id).is_terminal() { 1 } else { 0 }, |acc: u128, x| {
                acc.saturating_add(x)
            })
    }
    count(m, m.root())
}

/// Default cap on [`enumerate_commitments`].
pub const COMMITMENT_CAP: u128 = 10_000;

/// All deterministic commitments, ordered lexicographically by the action chosen at
/// each reachable decision node in depth-first order. Unreachable nodes are left
/// without a choice, so commitments that differ only off-path are not repeated.
///
/// # Errors
///
/// [`Error::CapExceeded`] when there are more than `cap` commitments.
pub fn enumerate_commitments_capped(m: &Mdp, cap: u128) -> Result<Vec<Commitment>> {
    let count = count_commitments(m);
    if count > cap {
        return Err(Error::CapExceeded {
            what: "deterministic commitments",
            count,
            cap,
        });
    }
    // Each partial assignment is a vector of optional action indices.
    fn expand(m: &Mdp, id: NodeId, partials: Vec<Vec<Option<usize>>>) -> Vec<Vec<Option<usize>>> {
        let acts = m.node(id).actions();
        if acts.is_empty() {
            return partials;
        }
        let mut out = Vec::new();
        for p in partials {
            for (k, a) in acts.iter().enumerate() {
                let mut q = p.clone();
                q[id] = Some(k);
                let mut cur = vec![q];
                for &(_, c) in &a.transitions {
                    cur = expand(m, c, cur);
                }
                out.extend(cur);
            }
        }
        out
    }
    let all = expand(m, m.root(), vec![vec![None; m.len()]]);
    Ok(all.into_iter().map(|a| Commitment::deterministic(a, m)).collect())
}

/// [`enumerate_commitments_capped`] with the default cap of 10,000.
pub fn enumerate_commitments(m: &Mdp) -> Result<Vec<Commitment>> {
    enumerate_commitments_capped(m, COMMITMENT_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(pairs: &[(f64, f64)]) -> Dist {
        Dist::new(pairs).unwrap()
    }

    /// Lookahead instance: a1 gives 5; a2 gives 0 or a choice between 12 and
    /// a fair coin over {0, 50}.
    fn m2() -> Mdp {
        let s = Tree::node(vec![
            Tree::act("a3", 0.0, vec![(1.0, Tree::leaf(12.0))]),
            Tree::act("a4", 0.0, vec![(0.5, Tree::leaf(0.0)), (0.5, Tree::leaf(50.0))]),
        ]);
        Mdp::from_tree(&Tree::node(vec![
            Tree::act("a1", 0.0, vec![(1.0, Tree::leaf(5.0))]),
            Tree::act("a2", 0.0, vec![(0.5, Tree::leaf(0.0)), (0.5, s)]),
        ]))
        .unwrap()
    }

    #[test]
    fn validation() {
        assert_eq!(
            validate_mdp(&Mdp::terminal(5.0)).unwrap(),
            MdpStats {
                horizon: 0,
                states: 1,
                leaves: 1
            }
        );
        let pb = Mdp::from_tree(&Tree::pb(&d(&[(0.0, 0.5), (2.0, 0.5)]), 1.0)).unwrap();
        assert_eq!(validate_mdp(&pb).unwrap().horizon, 1);
        let bad = Mdp::from_tree_unchecked(&Tree::node(vec![Tree::act(
            "a",
            1.0,
            vec![(0.5, Tree::leaf(1.0)), (0.4, Tree::leaf(2.0))],
        )]));
        let Err(Error::InvalidMdp(msgs)) = validate_mdp(&bad) else {
            panic!("expected invalid mdp");
        };
        assert!(msgs.iter().any(|m| m.contains("transition mass 0.9")));
    }

    #[test]
    fn commitments_of_nested_choice() {
        let m = m2();
        let all = enumerate_commitments(&m).unwrap();
        assert_eq!(all.len(), 3);
        let names: Vec<Vec<String>> = all.iter().map(|c| c.describe(&m)).collect();
        assert_eq!(names, vec![vec!["a1"], vec!["a2", "a3"], vec!["a2", "a4"]]);
        let pb = Mdp::from_tree(&Tree::pb(&Dist::point(1.0), 1.0)).unwrap();
        assert_eq!(enumerate_commitments(&pb).unwrap().len(), 1);
        assert!(matches!(
            enumerate_commitments_capped(&m, 2),
            Err(Error::CapExceeded { count: 3, .. })
        ));
    }

    #[test]
    fn applying_commitments() {
        let m = m2();
        let all = enumerate_commitments(&m).unwrap();
        let c23 = apply_commitment(&m, &all[1]).unwrap();
        let vals = c23.value_dist();
        assert_eq!(vals, d(&[(0.0, 0.5), (12.0, 0.5)]));
        let mix = Commitment::randomized(
            (0..m.len())
                .map(|i| match i {
                    0 => Some(vec![0.5, 0.5]),
                    _ if !m.node(i).is_terminal() => Some(vec![1.0, 0.0]),
                    _ => None,
                })
                .collect(),
        );
        let ch = apply_commitment(&m, &mix).unwrap();
        assert_eq!(ch.value_dist(), d(&[(0.0, 0.25), (5.0, 0.5), (12.0, 0.25)]));
        assert!(!mix.is_deterministic());
        let chain = Chain::pb(&d(&[(1.0, 0.5), (3.0, 0.5)]), 1.0).unwrap();
        let same = apply_commitment(chain.mdp(), &Commitment::trivial(chain.mdp())).unwrap();
        assert_eq!(same.mdp(), chain.mdp());
        let missing = Commitment::randomized(vec![None; m.len()]);
        assert!(apply_commitment(&m, &missing).is_err());
    }

    #[test]
    fn posterior_means() {
        let pb = Mdp::from_tree(&Tree::pb(&d(&[(0.0, 0.5), (2.0, 0.5)]), 1.0)).unwrap();
        assert_eq!(pb.posterior_mean(0), Some(1.0));
        assert_eq!(m2().posterior_mean(0), None);
        assert_eq!(m2().action_means(0), vec![5.0, 6.0]);
    }
}
