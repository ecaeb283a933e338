//! Cost amortization.
//!
//! [`water_fill`] spreads each action cost of a chain over the trajectories below it,
//! raising the cheapest trajectories first (minimization) or lowering the most valuable
//! ones first (maximization). The resulting random trajectory cost is the surrogate
//! `W*` of the chain. For general MDPs the surrogate is read off the optimality curve
//! computed by [`mdp_curve`], and [`decompose`] shows how any deterministic commitment
//! reproduces it trajectory by trajectory.

use crate::cims::{Chain, Commitment, Mdp, Node, NodeId};
use crate::curve::{combine, curve_of, dist_of, sdom_map, Curve};
use crate::dist::{Dist, Side};
use crate::error::{Error, Result};
use crate::mode::Mode;

/// Output of [`water_fill`], indexed by chain node id.
#[derive(Clone, Debug, PartialEq)]
pub struct Amortization {
    pub mode: Mode,
    /// Water level solved at each decision node.
    pub water_level: Vec<Option<f64>>,
    /// Index of every node: best trajectory cost among the leaves below it.
    pub state_index: Vec<f64>,
    /// Amortized cost of the trajectory ending at each leaf.
    pub trajectory_cost: Vec<Option<f64>>,
    /// Path probability of each leaf.
    pub leaf_prob: Vec<Option<f64>>,
    /// Cost shares `(leaf, b)` charged by each decision node to the leaves below it.
    pub shares: Vec<Vec<(NodeId, f64)>>,
    pub surrogate: Dist,
}

impl Amortization {
    /// Index of the chain's root.
    pub fn root_index(&self) -> f64 {
        self.state_index[0]
    }
}

/// Water filling (min) or water draining (max) of a chain.
pub fn water_fill(chain: &Chain, mode: Mode) -> Amortization {
    let m = chain.mdp();
    let n = m.len();
    let mut out = Amortization {
        mode,
        water_level: vec![None; n],
        state_index: vec![0.0; n],
        trajectory_cost: vec![None; n],
        leaf_prob: vec![None; n],
        shares: vec![Vec::new(); n],
        surrogate: Dist::point(0.0),
    };
    let leaves = fill(m, m.root(), mode, &mut out);
    for &(leaf, p, rho) in &leaves {
        out.trajectory_cost[leaf] = Some(rho);
        out.leaf_prob[leaf] = Some(p);
    }
    let atoms: Vec<(f64, f64)> = leaves.iter().map(|&(_, p, r)| (r, p)).collect();
    out.surrogate = Dist::from_weights(&atoms).expect("chain leaves carry positive mass");
    out
}

/// Post-order pass returning `(leaf, probability conditional on id, cost)`.
fn fill(m: &Mdp, id: NodeId, mode: Mode, out: &mut Amortization) -> Vec<(NodeId, f64, f64)> {
    let leaves = match m.node(id) {
        Node::Terminal { value } => vec![(id, 1.0, *value)],
        Node::Decision { actions } => {
            let a = &actions[0];
            let mut below = Vec::new();
            for &(q, c) in &a.transitions {
                below.extend(fill(m, c, mode, out).into_iter().map(|(l, p, r)| (l, q * p, r)));
            }
            let atoms: Vec<(f64, f64)> = below.iter().map(|&(_, p, r)| (r, p)).collect();
            let costs = Dist::from_weights(&atoms).expect("subtree leaves carry positive mass");
            let (g, shares): (f64, Vec<(NodeId, f64)>) = match mode {
                Mode::Min => {
                    let g = costs.solve_level(a.cost, Side::Below);
                    let s = below.iter().map(|&(l, _, r)| (l, (g - r).max(0.0))).collect();
                    for e in &mut below {
                        e.2 = e.2.max(g);
                    }
                    (g, s)
                }
                Mode::Max => {
                    let g = costs.solve_level(a.cost, Side::Above);
                    let s = below.iter().map(|&(l, _, r)| (l, (r - g).max(0.0))).collect();
                    for e in &mut below {
                        e.2 = e.2.min(g);
                    }
                    (g, s)
                }
            };
            out.water_level[id] = Some(g);
            out.shares[id] = shares;
            below
        }
    };
    out.state_index[id] = leaves
        .iter()
        .map(|e| e.2)
        .reduce(|a, b| mode.pick(a, b))
        .expect("every subtree has a leaf");
    leaves
}

/// Optimality curve of the local game against an outside option `y`:
/// `f(y) = min(y, min_a (c_a + sum_s P(s | a) f_s(y)))` in min-mode, mirrored in
/// max-mode with costs subtracted.
pub fn mdp_curve(m: &Mdp, mode: Mode) -> Curve {
    node_curves(m, mode)[m.root()].clone().expect("root curve computed")
}

/// Curves of every node's sub-MDP.
pub(crate) fn node_curves(m: &Mdp, mode: Mode) -> Vec<Option<Curve>> {
    let mut out = vec![None; m.len()];
    fn rec(m: &Mdp, id: NodeId, mode: Mode, out: &mut Vec<Option<Curve>>) -> Curve {
        let c = match m.node(id) {
            Node::Terminal { value } => curve_of(&Dist::point(*value), mode),
            Node::Decision { actions } => {
                let mut options = vec![Curve::identity(mode)];
                for a in actions {
                    let kids: Vec<(f64, Curve)> =
                        a.transitions.iter().map(|&(q, c)| (q, rec(m, c, mode, out))).collect();
                    let parts: Vec<(f64, &Curve)> = kids.iter().map(|(q, c)| (*q, c)).collect();
                    options.push(Curve::affine(mode, &parts, mode.cost_sign() * a.cost));
                }
                combine(&options).expect("curves share a mode")
            }
        };
        out[id] = Some(c.clone());
        c
    }
    rec(m, m.root(), mode, &mut out);
    out
}

/// The surrogate `W*` of an MDP, the distribution whose clamp curve is
/// [`mdp_curve`].
///
/// # Errors
///
/// The envelope failed to be a clamp curve; this indicates a numerical problem rather
/// than bad input.
pub fn mdp_surrogate(m: &Mdp, mode: Mode) -> Result<Dist> {
    dist_of(&mdp_curve(m, mode))
}

/// Per-trajectory surrogate costs of a deterministic commitment.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    /// Leaves reachable under the commitment as `(leaf, path probability, cost dist)`.
    pub per_leaf: Vec<(NodeId, f64, Dist)>,
    /// Shares `(leaf, b)` charged by each reachable decision node, indexed by MDP node.
    pub shares: Vec<Vec<(NodeId, f64)>>,
}

impl Decomposition {
    /// Mixture of the per-leaf cost distributions over the leaf probabilities.
    pub fn mixed(&self) -> Dist {
        Dist::mixture(self.per_leaf.iter().map(|(_, p, d)| (*p, d)))
    }
}

/// Splits the surrogate of `m` over the trajectories of the chain `m^pi`.
///
/// At each decision node the children's surrogates are mixed into `Z`, the water level
/// `g` of the chosen action is solved on `Z`, and the node's own surrogate is coupled to
/// `max(g, Z)` (min-mode; `min(g, Z)` in max-mode) through [`sdom_map`]. Trajectory
/// cost distributions are pushed through these couplings from the leaves upwards.
///
/// # Errors
///
/// A randomized or incomplete commitment.
pub fn decompose(m: &Mdp, pi: &Commitment, mode: Mode) -> Result<Decomposition> {
    let curves = node_curves(m, mode);
    let mut surrogates: Vec<Option<Dist>> = vec![None; m.len()];
    for (id, c) in curves.iter().enumerate() {
        if let Some(c) = c {
            surrogates[id] = Some(dist_of(c)?);
        }
    }
    let mut shares = vec![Vec::new(); m.len()];
    let leaves = dec(m, pi, m.root(), mode, &surrogates, &mut shares)?;
    Ok(Decomposition {
        per_leaf: leaves,
        shares,
    })
}

fn dec(
    m: &Mdp,
    pi: &Commitment,
    id: NodeId,
    mode: Mode,
    surrogates: &[Option<Dist>],
    shares: &mut [Vec<(NodeId, f64)>],
) -> Result<Vec<(NodeId, f64, Dist)>> {
    let actions = match m.node(id) {
        Node::Terminal { value } => return Ok(vec![(id, 1.0, Dist::point(*value))]),
        Node::Decision { actions } => actions,
    };
    let k = pi
        .action(id)
        .ok_or_else(|| Error::Domain(format!("decomposition needs a deterministic choice at node {id}")))?;
    let a = actions
        .get(k)
        .ok_or_else(|| Error::Domain(format!("action {k} out of range at node {id}")))?;
    let mut below = Vec::new();
    let mut z_parts = Vec::new();
    for &(q, c) in &a.transitions {
        let sub = dec(m, pi, c, mode, surrogates, shares)?;
        below.extend(sub.into_iter().map(|(l, p, d)| (l, q * p, d)));
        z_parts.push((q, surrogates[c].as_ref().expect("surrogate per node")));
    }
    let z = Dist::mixture(z_parts);
    let clamp = |v: f64, g: f64| match mode {
        Mode::Min => v.max(g),
        Mode::Max => v.min(g),
    };
    let g = match mode {
        Mode::Min => z.solve_level(a.cost, Side::Below),
        Mode::Max => z.solve_level(a.cost, Side::Above),
    };
    let z_hat = z.map(|v| clamp(v, g));
    let own = surrogates[id].as_ref().expect("surrogate per node");
    let map = sdom_map(own, &z_hat, mode)?;
    let mut out = Vec::with_capacity(below.len());
    let mut node_shares = Vec::with_capacity(below.len());
    for (leaf, p, d) in below {
        let lifted = d.map(|v| clamp(v, g));
        let pushed = map.pushforward(&lifted)?;
        let b = mode.cost_sign() * (pushed.mean() - d.mean());
        node_shares.push((leaf, b));
        out.push((leaf, p, pushed));
    }
    shares[id] = node_shares;
    Ok(out)
}
