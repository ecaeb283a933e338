//! Pandora's box with optional inspection, maximization. A box can be opened at cost
//! `c` to reveal its value `X`, or grabbed unopened for the value `mu = E[X]`.

use crate::cims::{Mdp, Tree};
use crate::dist::{Dist, Side, EPS};
use crate::error::{Error, Result};
use crate::mode::Mode;

/// An optional-inspection box.
#[derive(Clone, Debug, PartialEq)]
pub struct PboiBox {
    pub dist: Dist,
    pub cost: f64,
}

/// Derived quantities of a [`PboiBox`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PboiParams {
    pub mu: f64,
    /// Opening index, `c = E[(X - g)^+]`.
    pub g: f64,
    /// Backup index, `c = E[(h - X)^+]`.
    pub h: f64,
    /// True when the box was degenerate and replaced by `({mu: 1}, 0)`.
    pub normalized: bool,
}

/// Output of [`PboiBox::semilocal_rule`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemilocalRule {
    pub alpha: f64,
    /// Probability of committing to grab.
    pub p: f64,
    /// True when `c = mu` made the slack term undefined and the clamp branch was used.
    pub singular: bool,
}

impl PboiBox {
    /// # Errors
    ///
    /// Negative values or a negative or non-finite cost.
    pub fn new(dist: Dist, cost: f64) -> Result<PboiBox> {
        if !dist.is_nonneg() {
            return Err(Error::Domain("optional-inspection values must be nonnegative".into()));
        }
        if !(cost.is_finite() && cost >= 0.0) {
            return Err(Error::Domain(format!("open cost {cost} must be nonnegative")));
        }
        Ok(PboiBox { dist, cost })
    }

    /// The `n`-th member of the gap family: `{1: 1 - 1/n^2, n^3: 1/n^2}` with cost
    /// `n - 1`.
    pub fn b_n(n: u32) -> PboiBox {
        let n = f64::from(n);
        let q = 1.0 / (n * n);
        PboiBox {
            dist: Dist::new(&[(1.0, 1.0 - q), (n * n * n, q)]).expect("valid weights"),
            cost: n - 1.0,
        }
    }

    fn raw(&self) -> (f64, f64, f64) {
        let mu = self.dist.mean();
        let g = self.dist.solve_level(self.cost, Side::Above);
        let h = self.dist.solve_level(self.cost, Side::Below);
        (mu, g, h)
    }

    /// True when opening is never optimal: `g < h'` or `c > mu`.
    pub fn is_degenerate(&self) -> bool {
        let (mu, g, h) = self.raw();
        let tol = EPS * mu.abs().max(1.0);
        g < h - tol || self.cost > mu + tol
    }

    /// `mu`, `g` and `h`, after normalizing a degenerate box.
    pub fn params(&self) -> PboiParams {
        if self.is_degenerate() {
            let mu = self.dist.mean();
            return PboiParams {
                mu,
                g: mu,
                h: mu,
                normalized: true,
            };
        }
        let (mu, g, h) = self.raw();
        PboiParams {
            mu,
            g,
            h,
            normalized: false,
        }
    }

    /// The box itself, or `({mu: 1}, 0)` when it is degenerate.
    pub fn normalized(&self) -> PboiBox {
        if self.is_degenerate() {
            PboiBox {
                dist: Dist::point(self.dist.mean()),
                cost: 0.0,
            }
        } else {
            self.clone()
        }
    }

    /// Tree MDP with a free `grab` action worth `mu` and an `open` action.
    pub fn build(&self) -> Mdp {
        let mu = self.dist.mean();
        Mdp::from_tree(&Tree::node(vec![
            Tree::act("grab", 0.0, vec![(1.0, Tree::leaf(mu))]),
            Tree::act(
                "open",
                self.cost,
                self.dist.atoms().map(|(v, p)| (p, Tree::leaf(v))).collect(),
            ),
        ]))
        .expect("box tree is valid")
    }

    /// Surrogate of committing to open, `min(X, g)`.
    pub fn w_open(&self) -> Dist {
        let p = self.params();
        let b = self.normalized();
        b.dist.map(|x| x.min(p.g))
    }

    /// Surrogate of committing to grab, the point `mu`.
    pub fn w_grab(&self) -> Dist {
        Dist::point(self.params().mu)
    }

    /// Surrogate of the box, `max(min(X, g), h)`.
    pub fn w_star(&self) -> Dist {
        let h = self.params().h;
        self.w_open().map(|x| x.max(h))
    }

    /// `alpha(beta) = 1 / (1 + c/mu - beta c / (mu - c))`, set to 1 outside `(0, 1]`,
    /// and `p = (c / mu) alpha`.
    pub fn semilocal_rule(&self, beta: f64) -> SemilocalRule {
        let b = self.normalized();
        let mu = b.dist.mean();
        let c = b.cost;
        if mu <= 0.0 {
            return SemilocalRule {
                alpha: 1.0,
                p: 0.0,
                singular: false,
            };
        }
        let r = c / mu;
        if (mu - c).abs() <= EPS * mu && beta > 0.0 {
            return SemilocalRule {
                alpha: 1.0,
                p: r.min(1.0),
                singular: true,
            };
        }
        let slack = if beta == 0.0 { 0.0 } else { beta * c / (mu - c) };
        let raw = 1.0 / (1.0 + r - slack);
        let alpha = if raw > 0.0 && raw <= 1.0 { raw } else { 1.0 };
        SemilocalRule {
            alpha,
            p: (r * alpha).min(1.0),
            singular: false,
        }
    }

    /// First `y >= 0` violating
    /// `(1 - p) E[max(W_o, y)] + p E[max(mu, y)] >= E[max(alpha W*, y)] - p beta mu`.
    /// All three sides are piecewise linear with kinks at their atoms and slope 1 past
    /// the largest, so checking `0` and every kink is exact.
    pub fn semilocal_witness(&self, p: f64, alpha: f64, beta: f64) -> Option<f64> {
        let mu = self.params().mu;
        let wo = self.w_open();
        let wg = self.w_grab();
        let ws = self.w_star().scale(alpha);
        let mut ys: Vec<f64> = std::iter::once(0.0)
            .chain(wo.values().iter().copied())
            .chain(wg.values().iter().copied())
            .chain(ws.values().iter().copied())
            .filter(|&y| y >= 0.0)
            .collect();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        let tol = EPS * wo.max().max(mu).max(1.0);
        ys.into_iter().find(|&y| {
            let lhs = (1.0 - p) * wo.expected_clamp(y, Mode::Max) + p * wg.expected_clamp(y, Mode::Max);
            let rhs = ws.expected_clamp(y, Mode::Max) - p * beta * mu;
            lhs < rhs - tol
        })
    }

    /// See [`PboiBox::semilocal_witness`].
    pub fn check_semilocal(&self, p: f64, alpha: f64, beta: f64) -> bool {
        self.semilocal_witness(p, alpha, beta).is_none()
    }
}

/// `alpha(beta)` as a function of `r = c / mu` alone.
pub fn alpha_of_ratio(r: f64, beta: f64) -> f64 {
    if r >= 1.0 {
        return 1.0;
    }
    let raw = 1.0 / (1.0 + r - beta * r / (1.0 - r));
    if raw > 0.0 && raw <= 1.0 {
        raw
    } else {
        1.0
    }
}
