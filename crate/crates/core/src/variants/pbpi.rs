//! Pandora's box with partial inspection.
//!
//! A box can be opened at cost `c^o`, revealing its value, or peeked into at cost
//! `c^p`, which reveals the same value but still requires paying `c^o` to make the box
//! selectable.

use crate::amort::mdp_curve;
use crate::cims::{Commitment, Mdp, Tree};
use crate::curve::{combine, curve_of, diag_scale, Curve};
use crate::dist::{Dist, Side};
use crate::error::{Error, Result};
use crate::mode::Mode;

/// A partial-inspection box.
#[derive(Clone, Debug, PartialEq)]
pub struct PbpiBox {
    pub dist: Dist,
    pub open_cost: f64,
    pub peek_cost: f64,
}

/// Which action a commitment takes at the root of a partial-inspection box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PbpiAction {
    Open,
    Peek,
}

/// Result of [`PbpiBox::commit`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PbpiCommit {
    pub action: PbpiAction,
    /// `(c^o / c^p)(1 - c^o / g^p)`, when a peek action exists.
    pub rule_lhs: Option<f64>,
    /// `1 + min(c^p / c^o, c^o / g^p)`, when a peek action exists.
    pub rule_rhs: Option<f64>,
}

impl PbpiBox {
    /// # Errors
    ///
    /// Negative or non-finite costs.
    pub fn new(dist: Dist, open_cost: f64, peek_cost: f64) -> Result<PbpiBox> {
        for (name, c) in [("open", open_cost), ("peek", peek_cost)] {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::Domain(format!("{name} cost {c} must be nonnegative")));
            }
        }
        Ok(PbpiBox {
            dist,
            open_cost,
            peek_cost,
        })
    }

    /// False when peeking costs at least as much as opening; the box is then a
    /// classical Pandora's box.
    pub fn has_peek(&self) -> bool {
        self.peek_cost < self.open_cost
    }

    /// Opening index `g^o`: `c^o = E[(g^o - X)^+]`.
    pub fn g_open(&self) -> f64 {
        self.dist.solve_level(self.open_cost, Side::Below)
    }

    /// Peeking index `g^p`: `c^p = E[(g^p - X - c^o)^+]`.
    pub fn g_peek(&self) -> f64 {
        self.dist.shift(self.open_cost).solve_level(self.peek_cost, Side::Below)
    }

    /// Largest outside option where the open and peek curves meet: the maximal `t`
    /// with `E[(t - X)^+] - E[(t - X - c^o)^+] = c^o - c^p`. Infinite when peeking is
    /// free.
    pub fn crossing(&self) -> f64 {
        let target = self.open_cost - self.peek_cost;
        if target >= self.open_cost {
            return f64::INFINITY;
        }
        let diff = |t: f64| {
            self.dist.expected_shortfall(t, Side::Below) - self.dist.expected_shortfall(t - self.open_cost, Side::Below)
        };
        let mut pts: Vec<f64> = self
            .dist
            .values()
            .iter()
            .flat_map(|&x| [x, x + self.open_cost])
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        // `diff` is nondecreasing and reaches `c^o` at the last point.
        let k = pts.iter().rposition(|&t| diff(t) <= target).unwrap_or(0);
        let (t0, d0) = (pts[k], diff(pts[k]));
        if k + 1 == pts.len() || d0 >= target {
            return t0;
        }
        let (t1, d1) = (pts[k + 1], diff(pts[k + 1]));
        t0 + (target - d0) / (d1 - d0) * (t1 - t0)
    }

    /// True in the regime `g^p < g^o < crossing` where peeking can beat opening;
    /// elsewhere opening dominates.
    pub fn is_nontrivial(&self) -> bool {
        self.has_peek() && self.g_peek() < self.g_open() && self.g_open() < self.crossing()
    }

    /// Tree MDP: `open` leads to the value; `peek` leads to a state per value whose
    /// only action opens the box.
    pub fn build(&self) -> Mdp {
        let open = Tree::act(
            "open",
            self.open_cost,
            self.dist.atoms().map(|(v, p)| (p, Tree::leaf(v))).collect(),
        );
        let mut actions = vec![open];
        if self.has_peek() {
            actions.push(Tree::act(
                "peek",
                self.peek_cost,
                self.dist
                    .atoms()
                    .map(|(v, p)| {
                        (
                            p,
                            Tree::node(vec![Tree::act("open", self.open_cost, vec![(1.0, Tree::leaf(v))])]),
                        )
                    })
                    .collect(),
            ));
        }
        Mdp::from_tree(&Tree::node(actions)).expect("box tree is valid")
    }

    /// The commitment taking `action` at the root of [`PbpiBox::build`].
    pub fn commitment(&self, mdp: &Mdp, action: PbpiAction) -> Commitment {
        let root = match action {
            PbpiAction::Peek if self.has_peek() => 1,
            _ => 0,
        };
        Commitment::from_fn(mdp, |id| if id == mdp.root() { root } else { 0 })
    }

    /// Commitment rule: open unless the box is in the nontrivial regime and
    /// `(c^o / c^p)(1 - c^o / g^p) > 1 + min(c^p / c^o, c^o / g^p)`.
    pub fn commit(&self) -> PbpiCommit {
        if !self.has_peek() {
            return PbpiCommit {
                action: PbpiAction::Open,
                rule_lhs: None,
                rule_rhs: None,
            };
        }
        let (co, cp, gp) = (self.open_cost, self.peek_cost, self.g_peek());
        let lhs = (co / cp) * (1.0 - co / gp);
        let rhs = 1.0 + (cp / co).min(co / gp);
        let action = if !self.is_nontrivial() || lhs <= rhs {
            PbpiAction::Open
        } else {
            PbpiAction::Peek
        };
        PbpiCommit {
            action,
            rule_lhs: Some(lhs),
            rule_rhs: Some(rhs),
        }
    }

    /// `min(y, c^o + E[min(y, X)])`, the curve of committing to open.
    pub fn open_curve(&self) -> Curve {
        let f = Curve::affine(Mode::Min, &[(1.0, &curve_of(&self.dist, Mode::Min))], self.open_cost);
        combine(&[Curve::identity(Mode::Min), f]).expect("same mode")
    }

    /// `min(y, c^p + E[min(y, X + c^o)])`, the curve of committing to peek.
    pub fn peek_curve(&self) -> Curve {
        let shifted = curve_of(&self.dist.shift(self.open_cost), Mode::Min);
        let f = Curve::affine(Mode::Min, &[(1.0, &shifted)], self.peek_cost);
        combine(&[Curve::identity(Mode::Min), f]).expect("same mode")
    }

    /// Scale factor of the open-side bound, `(c^o / c^p)(1 - c^o / g^p)`.
    pub fn open_bound_alpha(&self) -> f64 {
        (self.open_cost / self.peek_cost) * (1.0 - self.open_cost / self.g_peek())
    }

    /// Scale factor of the peek-side bound, `1 + min(c^p / c^o, c^o / g^p)`.
    pub fn peek_bound_alpha(&self) -> f64 {
        1.0 + (self.peek_cost / self.open_cost).min(self.open_cost / self.g_peek())
    }

    /// Checks `min(y, f^o(y)) <= a f(y / a)` and `min(y, f^p(y)) <= a' f(y / a')` at
    /// every breakpoint, with the two scale factors above. Returns the first violating
    /// `y` for each side. Only meaningful in the nontrivial regime.
    pub fn check_bounds(&self, tol: f64) -> (Option<f64>, Option<f64>) {
        let f = mdp_curve(&self.build(), Mode::Min);
        let side = |lhs: Curve, a: f64| match diag_scale(&f, a.max(1.0)) {
            Ok(scaled) => lhs.le_witness(&scaled, tol),
            Err(_) => Some(f64::NAN),
        };
        (
            side(self.open_curve(), self.open_bound_alpha()),
            side(self.peek_curve(), self.peek_bound_alpha()),
        )
    }
}

/// Splits boxes into those committed to opening, `c^o / c^p <= 1 + c^p / c^o`, and
/// those committed to peeking. Returns box indices `(open, peek)`.
pub fn phi_partition(boxes: &[PbpiBox]) -> (Vec<usize>, Vec<usize>) {
    let mut open = Vec::new();
    let mut peek = Vec::new();
    for (i, b) in boxes.iter().enumerate() {
        let (co, cp) = (b.open_cost, b.peek_cost);
        if !b.has_peek() || co / cp <= 1.0 + cp / co {
            open.push(i);
        } else {
            peek.push(i);
        }
    }
    (open, peek)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::EPS;

    fn coin() -> Dist {
        Dist::new(&[(0.0, 0.5), (2.0, 0.5)]).unwrap()
    }

    #[test]
    fn indices_and_rule() {
        let b = PbpiBox::new(coin(), 0.5, 0.4).unwrap();
        assert!((b.g_open() - 1.0).abs() < EPS);
        assert!((b.g_peek() - 1.3).abs() < EPS);
        let c = b.commit();
        assert_eq!(c.action, PbpiAction::Open);
        assert!((c.rule_lhs.unwrap() - 0.5 / 0.4 * (1.0 - 0.5 / 1.3)).abs() < EPS);
        assert!((c.rule_rhs.unwrap() - (1.0 + 0.5 / 1.3)).abs() < EPS);

        let b = PbpiBox::new(coin(), 0.5, 0.1).unwrap();
        assert!((b.g_peek() - 0.7).abs() < EPS);
        assert!((b.crossing() - 2.3).abs() < EPS);
        let c = b.commit();
        assert_eq!(c.action, PbpiAction::Peek);
        assert!((c.rule_lhs.unwrap() - 5.0 * (1.0 - 0.5 / 0.7)).abs() < EPS);
        assert!((c.rule_rhs.unwrap() - 1.2).abs() < EPS);
        assert_eq!((b.check_bounds(1e-9)), (None, None));

        let same = PbpiBox::new(coin(), 0.5, 0.5).unwrap();
        assert_eq!(same.commit().action, PbpiAction::Open);
        assert_eq!(crate::cims::enumerate_commitments(&same.build()).unwrap().len(), 1);
    }

    #[test]
    fn open_curve_matches_definition() {
        let b = PbpiBox::new(coin(), 0.5, 0.1).unwrap();
        let m = b.build();
        let open = crate::cims::apply_commitment(&m, &b.commitment(&m, PbpiAction::Open)).unwrap();
        let via_chain = curve_of(&crate::amort::water_fill(&open, Mode::Min).surrogate, Mode::Min);
        for y in [0.0_f64, 0.3, 1.0, 1.7, 2.5, 4.0] {
            let direct = y.min(0.5 + coin().expected_clamp(y, Mode::Min));
            assert!((b.open_curve().eval(y) - direct).abs() < EPS);
            assert!((via_chain.eval(y) - direct).abs() < EPS);
        }
    }

    #[test]
    fn partition() {
        let d = coin();
        let boxes = vec![
            PbpiBox::new(d.clone(), 1.5, 1.0).unwrap(),
            PbpiBox::new(d.clone(), 2.0, 1.0).unwrap(),
            PbpiBox::new(d, 1.0, 1.0).unwrap(),
        ];
        assert_eq!(phi_partition(&boxes), (vec![0, 2], vec![1]));
    }
}
