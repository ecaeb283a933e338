//! Finite discrete distributions.
//!
//! A [`Dist`] stores atoms sorted by strictly increasing value with probabilities that
//! sum to one. The index equations of the framework are solved here by walking the
//! piecewise-linear shortfall functions `t -> E[(t - X)^+]` and `t -> E[(X - t)^+]`
//! exactly, segment by segment.
//!
//! User-facing constructors require nonnegative values. Surrogate costs in the
//! maximization setting can be negative (a box whose cost exceeds its value), so the
//! crate also builds signed distributions internally through [`Dist::from_weights`].

use std::fmt;

use crate::error::{Error, Result};
use crate::mode::Mode;

/// Comparison tolerance for values.
pub const EPS: f64 = 1e-9;

/// Tolerance for probability sums.
pub const EPS_P: f64 = 1e-12;

/// Relative distance under which two atom values are treated as one.
const MERGE_REL: f64 = 1e-12;

/// Which tail an expected shortfall or index equation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// `E[(t - X)^+]`, the shortfall below a threshold.
    Below,
    /// `E[(X - t)^+]`, the excess above a threshold.
    Above,
}

/// A finite probability distribution over real values.
#[derive(Clone, Debug, PartialEq)]
pub struct Dist {
    values: Vec<f64>,
    probs: Vec<f64>,
}

/// Result of [`Dist::condition_split`].
#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub le: Dist,
    pub p_le: f64,
    pub gt: Dist,
    pub p_gt: f64,
}

/// Mean and median of a distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub median: f64,
}

fn same_value(a: f64, b: f64) -> bool {
    (a - b).abs() <= MERGE_REL * a.abs().max(b.abs()).max(1.0)
}

impl Dist {
    /// Builds a distribution from `(value, prob)` pairs.
    ///
    /// Values must be finite and nonnegative, probabilities positive, and the total
    /// within [`EPS_P`] of one (scaled by the atom count to absorb decimal rounding).
    /// Duplicate values are merged and probabilities renormalized.
    pub fn new(pairs: &[(f64, f64)]) -> Result<Dist> {
        if let Some(&(v, _)) = pairs.iter().find(|(v, _)| *v < 0.0) {
            return Err(Error::InvalidDist(format!("negative value {v}")));
        }
        Self::signed(pairs)
    }

    /// Like [`Dist::new`] but allows negative values.
    pub fn signed(pairs: &[(f64, f64)]) -> Result<Dist> {
        if pairs.is_empty() {
            return Err(Error::InvalidDist("no atoms".into()));
        }
        for &(v, p) in pairs {
            if !v.is_finite() {
                return Err(Error::InvalidDist(format!("non-finite value {v}")));
            }
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::InvalidDist(format!("nonpositive probability {p}")));
            }
        }
        let total: f64 = pairs.iter().map(|&(_, p)| p).sum();
        let tol = EPS_P * (pairs.len() as f64).max(1.0);
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidDist(format!("probabilities sum to {total}")));
        }
        Ok(Self::canonical(pairs.to_vec()))
    }

    /// Builds a distribution from nonnegative weights, normalizing them to sum to one.
    /// Zero weights are dropped; values may be negative.
    pub fn from_weights(pairs: &[(f64, f64)]) -> Result<Dist> {
        let mut total = 0.0;
        for &(v, w) in pairs {
            if !v.is_finite() || !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidDist(format!("bad weighted atom ({v}, {w})")));
            }
            total += w;
        }
        if !(total > 0.0) {
            return Err(Error::InvalidDist("total weight is zero".into()));
        }
        Ok(Self::canonical(pairs.to_vec()))
    }

    /// A point mass.
    pub fn point(v: f64) -> Dist {
        Dist {
            values: vec![v],
            probs: vec![1.0],
        }
    }

    fn canonical(mut pairs: Vec<(f64, f64)>) -> Dist {
        pairs.retain(|&(_, p)| p > 0.0);
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut probs: Vec<f64> = Vec::with_capacity(pairs.len());
        for (v, p) in pairs {
            match values.last() {
                Some(&last) if same_value(last, v) => *probs.last_mut().unwrap() += p,
                _ => {
                    values.push(if v == 0.0 { 0.0 } else { v });
                    probs.push(p);
                }
            }
        }
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        Dist { values, probs }
    }

    /// Atoms as `(value, prob)` in increasing value order.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a distribution has at least one atom.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn mean(&self) -> f64 {
        self.atoms().map(|(v, p)| v * p).sum()
    }

    /// Median with the infimum convention, `quantile(0.5)`.
    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    pub fn moments(&self) -> Moments {
        Moments {
            mean: self.mean(),
            median: self.median(),
        }
    }

    /// True when every atom is nonnegative.
    pub fn is_nonneg(&self) -> bool {
        self.min() >= 0.0
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|&v| v <= x);
        if k == self.len() {
            1.0
        } else {
            self.probs[..k].iter().sum()
        }
    }

    /// Smallest atom `v` with `P(X <= v) >= q`; `q <= 0` gives the minimum.
    pub fn quantile(&self, q: f64) -> f64 {
        if q <= 0.0 {
            return self.min();
        }
        let mut cum = 0.0;
        for (v, p) in self.atoms() {
            cum += p;
            if cum >= q - EPS_P {
                return v;
            }
        }
        self.max()
    }

    /// `E[(t - X)^+]` for [`Side::Below`], `E[(X - t)^+]` for [`Side::Above`].
    pub fn expected_shortfall(&self, t: f64, side: Side) -> f64 {
        match side {
            Side::Below => self.atoms().map(|(v, p)| p * (t - v).max(0.0)).sum(),
            Side::Above => self.atoms().map(|(v, p)| p * (v - t).max(0.0)).sum(),
        }
    }

    /// `E[min(y, X)]` or `E[max(y, X)]`.
    pub fn expected_clamp(&self, y: f64, mode: Mode) -> f64 {
        match mode {
            Mode::Min => self.atoms().map(|(v, p)| p * v.min(y)).sum(),
            Mode::Max => self.atoms().map(|(v, p)| p * v.max(y)).sum(),
        }
    }

    /// Solves the index equation `c = E[(g - X)^+]` (below) or `c = E[(X - g)^+]`
    /// (above).
    ///
    /// At `c = 0` the boundary of the solution set is returned: the minimum atom for
    /// `Below` and the maximum atom for `Above`.
    ///
    /// # Errors
    ///
    /// Negative or non-finite `c`; for `Above` on a nonnegative distribution, `c` larger
    /// than the mean (the root would be negative).
    pub fn solve_index(&self, c: f64, side: Side) -> Result<f64> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!("index cost must be nonnegative, got {c}")));
        }
        if side == Side::Above && self.is_nonneg() {
            let mean = self.mean();
            if c > mean + EPS_P * mean.abs().max(1.0) {
                return Err(Error::Degenerate(format!(
                    "cost {c} exceeds the mean {mean}; no nonnegative solution"
                )));
            }
        }
        Ok(self.solve_level(c, side))
    }

    /// Unchecked version of [`Dist::solve_index`] that accepts any `c >= 0` and may
    /// return a value below the support.
    pub fn solve_level(&self, c: f64, side: Side) -> f64 {
        let n = self.len();
        match side {
            Side::Below => {
                if c <= 0.0 {
                    return self.values[0];
                }
                let mut f = 0.0;
                let mut cum = 0.0;
                for i in 0..n {
                    cum += self.probs[i];
                    if i + 1 == n {
                        return self.values[i] + (c - f);
                    }
                    let seg = cum * (self.values[i + 1] - self.values[i]);
                    if f + seg >= c {
                        return self.values[i] + (c - f) / cum;
                    }
                    f += seg;
                }
                unreachable!()
            }
            Side::Above => {
                if c <= 0.0 {
                    return self.values[n - 1];
                }
                let mut f = 0.0;
                let mut tail = 0.0;
                for i in (0..n).rev() {
                    tail += self.probs[i];
                    if i == 0 {
                        return self.values[0] - (c - f);
                    }
                    let seg = tail * (self.values[i] - self.values[i - 1]);
                    if f + seg >= c {
                        return self.values[i] - (c - f) / tail;
                    }
                    f += seg;
                }
                unreachable!()
            }
        }
    }

    /// Conditions on `X <= t` and `X > t`.
    ///
    /// # Errors
    ///
    /// `t` outside `[min, max)`, which would leave one side empty.
    pub fn condition_split(&self, t: f64) -> Result<Split> {
        if !(t >= self.min() && t < self.max()) {
            return Err(Error::Domain(format!(
                "threshold {t} outside [{}, {}) leaves an empty side",
                self.min(),
                self.max()
            )));
        }
        let k = self.values.partition_point(|&v| v <= t);
        let lo: Vec<(f64, f64)> = self.atoms().take(k).collect();
        let hi: Vec<(f64, f64)> = self.atoms().skip(k).collect();
        let p_le: f64 = lo.iter().map(|a| a.1).sum();
        let p_gt: f64 = hi.iter().map(|a| a.1).sum();
        let total = p_le + p_gt;
        Ok(Split {
            le: Self::canonical(lo),
            p_le: p_le / total,
            gt: Self::canonical(hi),
            p_gt: p_gt / total,
        })
    }

    /// Pushforward under `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Dist {
        Self::canonical(self.atoms().map(|(v, p)| (f(v), p)).collect())
    }

    /// All values multiplied by `a`.
    pub fn scale(&self, a: f64) -> Dist {
        self.map(|v| a * v)
    }

    /// All values shifted by `d`.
    pub fn shift(&self, d: f64) -> Dist {
        self.map(|v| v + d)
    }

    /// Mixture `sum_k w_k D_k` for nonnegative weights summing to one.
    pub fn mixture<'a>(parts: impl IntoIterator<Item = (f64, &'a Dist)>) -> Dist {
        let mut pairs = Vec::new();
        for (w, d) in parts {
            pairs.extend(d.atoms().map(|(v, p)| (v, w * p)));
        }
        Self::canonical(pairs)
    }

    /// Compares two distributions up to value and probability tolerance `tol`.
    ///
    /// Atoms of both distributions are clustered when consecutive values are within
    /// `tol` of each other; the distributions agree when every cluster carries the same
    /// mass in both.
    pub fn approx_eq(&self, other: &Dist, tol: f64) -> bool {
        let mut all: Vec<(f64, f64, bool)> = self
            .atoms()
            .map(|(v, p)| (v, p, true))
            .chain(other.atoms().map(|(v, p)| (v, p, false)))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        let vtol = tol * all.iter().map(|a| a.0.abs()).fold(1.0, f64::max);
        let mut i = 0;
        while i < all.len() {
            let (mut ma, mut mb) = (0.0, 0.0);
            let mut j = i;
            loop {
                if all[j].2 {
                    ma += all[j].1;
                } else {
                    mb += all[j].1;
                }
                if j + 1 < all.len() && all[j + 1].0 - all[j].0 <= vtol {
                    j += 1;
                } else {
                    break;
                }
            }
            if (ma - mb).abs() > tol {
                return false;
            }
            i = j + 1;
        }
        true
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, p)) in self.atoms().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}: {p}")?;
        }
        f.write_str("}")
    }
}
