//! Weighing scale. The cost of an alternative is `X`; each weighing at cost `c`
//! reveals whether `X <= t` for a chosen threshold `t`. Stopping yields the conditional
//! mean. Minimization.

use crate::amort::water_fill;
use crate::cims::{Chain, Mdp, Node, NodeId, Tree};
use crate::dist::{Dist, Side, EPS};
use crate::error::{Error, Result};
use crate::mode::Mode;

/// Node cap for [`WsAlternative::build`].
pub const BUILD_NODE_CAP: usize = 200_000;
/// Longest threshold sequence a halving chain may use.
pub const MAX_HALVINGS: usize = 64;

/// A weighing-scale alternative.
#[derive(Clone, Debug, PartialEq)]
pub struct WsAlternative {
    pub dist: Dist,
    pub cost: f64,
}

/// Derived quantities of a [`WsAlternative`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WsParams {
    pub mu: f64,
    pub median: f64,
    /// `c = E[(g - X)^+]`.
    pub g: f64,
    /// `c = E[(X - h)^+]`.
    pub h: f64,
    /// `mu / M + log2(mu / g)`, defined when `g <= mu`.
    pub kappa: Option<f64>,
}

/// A one-sided halving chain with the thresholds it actually weighs against.
#[derive(Clone, Debug)]
pub struct Halving {
    pub chain: Chain,
    pub thresholds: Vec<f64>,
}

impl Halving {
    /// Leaf reached when the hidden value is `x`.
    pub fn leaf_of(&self, x: f64) -> NodeId {
        let m = self.chain.mdp();
        let mut id = m.root();
        let mut depth = 0;
        while let Some(a) = m.node(id).actions().first() {
            // Transitions are `[<= t, > t]`.
            id = if x > self.thresholds[depth] {
                a.transitions[1].1
            } else {
                a.transitions[0].1
            };
            depth += 1;
        }
        id
    }

    /// Number of weighings on the longest path.
    pub fn levels(&self) -> usize {
        self.thresholds.len()
    }
}

impl WsAlternative {
    /// # Errors
    ///
    /// Negative or non-finite cost.
    pub fn new(dist: Dist, cost: f64) -> Result<WsAlternative> {
        if !(cost.is_finite() && cost >= 0.0) {
            return Err(Error::Domain(format!("weigh cost {cost} must be nonnegative")));
        }
        Ok(WsAlternative { dist, cost })
    }

    pub fn params(&self) -> WsParams {
        let mu = self.dist.mean();
        let median = self.dist.quantile(0.5);
        let g = self.dist.solve_level(self.cost, Side::Below);
        let h = self.dist.solve_level(self.cost, Side::Above);
        let kappa = (g <= mu).then(|| mu / median + (mu / g).log2());
        WsParams {
            mu,
            median,
            g,
            h,
            kappa,
        }
    }

    /// Tree MDP over a threshold menu (the support atoms when `thresholds` is `None`).
    /// Every state can stop at cost 0 for its conditional mean, or weigh against any
    /// menu threshold that splits its conditional support. States whose support is no
    /// wider than the weigh cost only stop.
    ///
    /// # Errors
    ///
    /// An empty menu, or more than [`BUILD_NODE_CAP`] nodes.
    pub fn build(&self, thresholds: Option<&[f64]>) -> Result<Mdp> {
        let menu: Vec<f64> = match thresholds {
            Some(t) => t.to_vec(),
            None => self.dist.values().to_vec(),
        };
        if thresholds.is_some_and(|t| t.is_empty()) {
            return Mdp::from_tree(&Tree::node(vec![Tree::act(
                "stop",
                0.0,
                vec![(1.0, Tree::leaf(self.dist.mean()))],
            )]));
        }
        if menu.is_empty() {
            return Err(Error::Domain("empty threshold menu".into()));
        }
        let mut nodes = Vec::new();
        self.grow(&self.dist, &menu, &mut nodes)?;
        Mdp::from_nodes(nodes)
    }

    fn grow(&self, d: &Dist, menu: &[f64], nodes: &mut Vec<Node>) -> Result<NodeId> {
        if nodes.len() + 2 > BUILD_NODE_CAP {
            return Err(Error::CapExceeded {
                what: "weighing-scale nodes",
                count: (nodes.len() + 2) as u128,
                cap: BUILD_NODE_CAP as u128,
            });
        }
        let me = nodes.len();
        nodes.push(Node::Terminal { value: 0.0 });
        let stop_leaf = nodes.len();
        nodes.push(Node::Terminal { value: d.mean() });
        let mut actions = vec![crate::cims::Action {
            label: "stop".into(),
            cost: 0.0,
            transitions: vec![(1.0, stop_leaf)],
        }];
        if d.max() - d.min() > self.cost {
            for &t in menu.iter().filter(|&&t| t >= d.min() && t < d.max()) {
                let s = d.condition_split(t)?;
                let le = self.grow(&s.le, menu, nodes)?;
                let gt = self.grow(&s.gt, menu, nodes)?;
                actions.push(crate::cims::Action {
                    label: format!("weigh {t}"),
                    cost: self.cost,
                    transitions: vec![(s.p_le, le), (s.p_gt, gt)],
                });
            }
        }
        nodes[me] = Node::Decision { actions };
        Ok(me)
    }

    /// One-sided halving: weigh against `t2, t2/2, t2/4, ...` while the threshold is
    /// at least `t1`. A `>` outcome stops at the conditional mean; a `<=` outcome moves
    /// to the next threshold. Thresholds at or above the current conditional maximum
    /// are skipped, and the chain stops once a threshold falls below the conditional
    /// minimum or one atom remains.
    pub fn halving(&self, t1: f64, t2: f64) -> Halving {
        let mut thresholds = Vec::new();
        let mut t = t2;
        let mut cur = self.dist.clone();
        // Built bottom-up as a list of (p_le, gt_mean) steps.
        let mut steps: Vec<(f64, f64)> = Vec::new();
        let mut n = 0;
        while t >= t1 && t > 0.0 && n < MAX_HALVINGS {
            n += 1;
            if cur.len() == 1 || t < cur.min() {
                break;
            }
            if t < cur.max() {
                let s = cur.condition_split(t).expect("threshold inside the support");
                thresholds.push(t);
                steps.push((s.p_le, s.gt.mean()));
                cur = s.le;
            }
            t /= 2.0;
        }
        let mut tree = Tree::leaf(cur.mean());
        for &(p_le, gt_mean) in steps.iter().rev() {
            tree = Tree::node(vec![Tree::act(
                "weigh",
                self.cost,
                vec![(p_le, tree), (1.0 - p_le, Tree::leaf(gt_mean))],
            )]);
        }
        let chain = Chain::new(Mdp::from_tree_unchecked(&tree)).expect("halving tree is a chain");
        Halving { chain, thresholds }
    }

    /// Commitment rule: no weighings when `g > min(mu, M)`, otherwise one-sided
    /// halving from `min(M, h)` down to `g`.
    pub fn commit(&self) -> Halving {
        let p = self.params();
        if p.g > p.mu.min(p.median) {
            return Halving {
                chain: Chain::new(Mdp::terminal(p.mu)).expect("terminal chain"),
                thresholds: Vec::new(),
            };
        }
        self.halving(p.g, p.median.min(p.h))
    }

    /// Surrogate of the full weighing MDP: `min(h, max(g, X))` when `g <= mu`,
    /// otherwise the point `mu`.
    pub fn surrogate_reference(&self) -> Dist {
        let p = self.params();
        if p.g > p.mu {
            return Dist::point(p.mu);
        }
        self.dist.map(|x| p.h.min(p.g.max(x)))
    }

    /// Pointwise bound on the halving chain's trajectory cost,
    /// `k g + 2 min(2 mu, max(x, g))` with `k` weigh levels.
    pub fn halving_bound(&self, h: &Halving, x: f64) -> f64 {
        let p = self.params();
        h.levels() as f64 * p.g + 2.0 * (2.0 * p.mu).min(x.max(p.g))
    }

    /// First atom `x` whose trajectory cost under [`WsAlternative::commit`] exceeds
    /// [`WsAlternative::halving_bound`], with the offending cost and bound.
    pub fn halving_bound_witness(&self) -> Option<(f64, f64, f64)> {
        let h = self.commit();
        let fill = water_fill(&h.chain, Mode::Min);
        self.dist.values().iter().find_map(|&x| {
            let rho = fill.trajectory_cost[h.leaf_of(x)].expect("leaf");
            let u = self.halving_bound(&h, x);
            (rho > u + EPS * u.abs().max(1.0)).then_some((x, rho, u))
        })
    }
}
