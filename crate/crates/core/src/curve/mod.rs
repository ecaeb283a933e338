//! Exact piecewise-linear optimality curves.
//!
//! The optimality curve of a distribution `W` is `y -> E[min(y, W)]` in minimization
//! mode and `y -> E[max(y, W)]` in maximization mode. Curves are stored as knot lists
//! with explicit edge slopes; every comparison happens at knots and computed crossings,
//! never on a sampled grid.

mod sdom;

pub use sdom::{sdom_map, StochasticMap};

use crate::dist::{Dist, EPS};
use crate::error::{Error, Result};
use crate::mode::Mode;

/// Slope differences at or below this are treated as collinear.
const SLOPE_TOL: f64 = 1e-11;

/// A continuous piecewise-linear function on the real line.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    mode: Mode,
    xs: Vec<f64>,
    fs: Vec<f64>,
    left: f64,
    right: f64,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

impl Curve {
    /// Builds a curve from knots and edge slopes. Knots are sorted, near-duplicate
    /// abscissae merged and collinear interior knots dropped.
    pub fn from_knots(mode: Mode, knots: &[(f64, f64)], left: f64, right: f64) -> Result<Curve> {
        if knots.is_empty() {
            return Err(Error::MalformedCurve("no knots".into()));
        }
        if knots.iter().any(|(x, f)| !x.is_finite() || !f.is_finite()) || !left.is_finite() || !right.is_finite() {
            return Err(Error::MalformedCurve("non-finite knot or slope".into()));
        }
        let mut k = knots.to_vec();
        k.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self::simplified(mode, k, left, right))
    }

    fn simplified(mode: Mode, knots: Vec<(f64, f64)>, left: f64, right: f64) -> Curve {
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(knots.len());
        for (x, f) in knots {
            match pts.last() {
                Some(&(px, _)) if close(px, x) => {}
                _ => pts.push((x, f)),
            }
        }
        let slope = |a: (f64, f64), b: (f64, f64)| (b.1 - a.1) / (b.0 - a.0);
        let mut kept: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
        for p in pts {
            while kept.len() >= 2 {
                let n = kept.len();
                if (slope(kept[n - 2], kept[n - 1]) - slope(kept[n - 1], p)).abs() <= SLOPE_TOL {
                    kept.pop();
                } else {
                    break;
                }
            }
            kept.push(p);
        }
        while kept.len() >= 2 && (slope(kept[0], kept[1]) - left).abs() <= SLOPE_TOL {
            kept.remove(0);
        }
        while kept.len() >= 2 {
            let n = kept.len();
            if (slope(kept[n - 2], kept[n - 1]) - right).abs() <= SLOPE_TOL {
                kept.pop();
            } else {
                break;
            }
        }
        Curve {
            mode,
            xs: kept.iter().map(|k| k.0).collect(),
            fs: kept.iter().map(|k| k.1).collect(),
            left,
            right,
        }
    }

    /// The line `y -> y`, the value of taking the outside option.
    pub fn identity(mode: Mode) -> Curve {
        Curve {
            mode,
            xs: vec![0.0],
            fs: vec![0.0],
            left: 1.0,
            right: 1.0,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Knots as `(y, f(y))`.
    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.fs.iter().copied())
    }

    pub fn left_slope(&self) -> f64 {
        self.left
    }

    pub fn right_slope(&self) -> f64 {
        self.right
    }

    /// Breakpoints as `(y, slope to the right of y)`.
    pub fn breakpoints(&self) -> Vec<(f64, f64)> {
        let n = self.xs.len();
        (0..n).map(|i| (self.xs[i], self.slope_after(i))).collect()
    }

    fn slope_after(&self, i: usize) -> f64 {
        if i + 1 < self.xs.len() {
            (self.fs[i + 1] - self.fs[i]) / (self.xs[i + 1] - self.xs[i])
        } else {
            self.right
        }
    }

    pub fn value_at_zero(&self) -> f64 {
        self.eval(0.0)
    }

    /// Evaluates the curve at `y`.
    pub fn eval(&self, y: f64) -> f64 {
        let n = self.xs.len();
        if y <= self.xs[0] {
            return self.fs[0] + self.left * (y - self.xs[0]);
        }
        if y >= self.xs[n - 1] {
            return self.fs[n - 1] + self.right * (y - self.xs[n - 1]);
        }
        let k = self.xs.partition_point(|&x| x <= y);
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let (f0, f1) = (self.fs[k - 1], self.fs[k]);
        f0 + (f1 - f0) * (y - x0) / (x1 - x0)
    }

    /// `sum_k w_k f_k(y) + constant`.
    pub fn affine(mode: Mode, parts: &[(f64, &Curve)], constant: f64) -> Curve {
        let mut xs: Vec<f64> = parts.iter().flat_map(|(_, c)| c.xs.iter().copied()).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| close(*a, *b));
        if xs.is_empty() {
            xs.push(0.0);
        }
        let knots: Vec<(f64, f64)> = xs
            .iter()
            .map(|&x| (x, constant + parts.iter().map(|(w, c)| w * c.eval(x)).sum::<f64>()))
            .collect();
        let left = parts.iter().map(|(w, c)| w * c.left).sum();
        let right = parts.iter().map(|(w, c)| w * c.right).sum();
        Self::simplified(mode, knots, left, right)
    }

    /// A point `y` with `self(y) > other(y) + tol * scale`, if any. Checked at the union
    /// of knots and on both unbounded edges.
    pub fn le_witness(&self, other: &Curve, tol: f64) -> Option<f64> {
        let t = tol * self.scale_for_tol().max(other.scale_for_tol());
        let mut ys: Vec<f64> = self.xs.iter().chain(&other.xs).copied().collect();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        if let Some(&y) = ys.iter().find(|&&y| self.eval(y) > other.eval(y) + t) {
            return Some(y);
        }
        let (lo, hi) = (ys[0], ys[ys.len() - 1]);
        if self.left < other.left - SLOPE_TOL {
            return Some(lo - 1.0 - (self.eval(lo) - other.eval(lo)).abs() / (other.left - self.left));
        }
        if self.right > other.right + SLOPE_TOL {
            return Some(hi + 1.0 + (other.eval(hi) - self.eval(hi)).abs() / (self.right - other.right));
        }
        None
    }

    fn scale_for_tol(&self) -> f64 {
        self.xs
            .iter()
            .chain(self.fs.iter())
            .fold(1.0_f64, |m, v| m.max(v.abs()))
    }
}

/// The optimality curve `E[min(y, W)]` (min) or `E[max(y, W)]` (max).
pub fn curve_of(w: &Dist, mode: Mode) -> Curve {
    let n = w.len();
    let mut knots = Vec::with_capacity(n);
    match mode {
        Mode::Min => {
            // f(v_i) = sum_{j<i} p_j v_j + v_i * P(W >= v_i)
            let mut below_mass = 0.0;
            let mut below_sum = 0.0;
            for (v, p) in w.atoms() {
                knots.push((v, below_sum + v * (1.0 - below_mass)));
                below_mass += p;
                below_sum += p * v;
            }
            Curve::simplified(mode, knots, 1.0, 0.0)
        }
        Mode::Max => {
            // f(v_i) = v_i * P(W <= v_i) + sum_{j>i} p_j v_j
            let mut above_sum = w.mean();
            let mut below_mass = 0.0;
            for (v, p) in w.atoms() {
                below_mass += p;
                above_sum -= p * v;
                knots.push((v, v * below_mass + above_sum));
            }
            Curve::simplified(mode, knots, 0.0, 1.0)
        }
    }
}

/// Recovers the distribution whose optimality curve is `f`.
///
/// # Errors
///
/// Edge slopes other than `(1, 0)` for min-mode or `(0, 1)` for max-mode, slopes outside
/// `[0, 1]`, non-monotone slopes, or a curve that leaves the diagonal on the side where
/// the outside option must win.
pub fn dist_of(f: &Curve) -> Result<Dist> {
    let (want_left, want_right) = match f.mode {
        Mode::Min => (1.0, 0.0),
        Mode::Max => (0.0, 1.0),
    };
    if (f.left - want_left).abs() > EPS || (f.right - want_right).abs() > EPS {
        return Err(Error::MalformedCurve(format!(
            "edge slopes ({}, {}) instead of ({want_left}, {want_right})",
            f.left, f.right
        )));
    }
    let n = f.xs.len();
    let scale = f.scale_for_tol();
    let (ax, af) = match f.mode {
        Mode::Min => (f.xs[0], f.fs[0]),
        Mode::Max => (f.xs[n - 1], f.fs[n - 1]),
    };
    if (ax - af).abs() > EPS * scale {
        return Err(Error::MalformedCurve(format!(
            "curve does not meet the diagonal: f({ax}) = {af}"
        )));
    }
    let mut slopes = Vec::with_capacity(n + 1);
    slopes.push(f.left);
    for i in 0..n {
        slopes.push(f.slope_after(i));
    }
    let mut atoms = Vec::with_capacity(n);
    for i in 0..n {
        let (before, after) = (slopes[i], slopes[i + 1]);
        if !(-EPS..=1.0 + EPS).contains(&after) {
            return Err(Error::MalformedCurve(format!("slope {after} outside [0, 1]")));
        }
        let mass = match f.mode {
            Mode::Min => before - after,
            Mode::Max => after - before,
        };
        if mass < -EPS {
            return Err(Error::MalformedCurve(format!("slopes not monotone at y = {}", f.xs[i])));
        }
        if mass > 1e-12 {
            atoms.push((f.xs[i], mass));
        }
    }
    Dist::from_weights(&atoms)
}

/// Pointwise envelope of curves sharing a mode: minimum in min-mode, maximum in
/// max-mode. Crossings of the pieces become new knots.
pub fn combine(curves: &[Curve]) -> Result<Curve> {
    let first = curves
        .first()
        .ok_or_else(|| Error::Domain("combine needs at least one curve".into()))?;
    let mode = first.mode;
    if curves.iter().any(|c| c.mode != mode) {
        return Err(Error::Domain("combine needs curves of one mode".into()));
    }
    if curves.len() == 1 {
        return Ok(first.clone());
    }
    let env = |y: f64| -> f64 {
        curves.iter().map(|c| c.eval(y)).fold(
            match mode {
                Mode::Min => f64::INFINITY,
                Mode::Max => f64::NEG_INFINITY,
            },
            |a, b| mode.pick(a, b),
        )
    };
    let mut base: Vec<f64> = curves.iter().flat_map(|c| c.xs.iter().copied()).collect();
    base.sort_by(f64::total_cmp);
    base.dedup_by(|a, b| close(*a, *b));
    let mut pts = base.clone();
    let m = curves.len();
    for w in base.windows(2) {
        let (a, b) = (w[0], w[1]);
        for i in 0..m {
            for j in (i + 1)..m {
                let da = curves[i].eval(a) - curves[j].eval(a);
                let db = curves[i].eval(b) - curves[j].eval(b);
                if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
                    pts.push(a + (b - a) * da / (da - db));
                }
            }
        }
    }
    let (lo, hi) = (base[0], *base.last().unwrap());
    for i in 0..m {
        for j in (i + 1)..m {
            let (ci, cj) = (&curves[i], &curves[j]);
            let ds = ci.left - cj.left;
            if ds != 0.0 {
                let t = (ci.eval(lo) - cj.eval(lo)) / ds;
                if t > 0.0 {
                    pts.push(lo - t);
                }
            }
            let ds = ci.right - cj.right;
            if ds != 0.0 {
                let t = -(ci.eval(hi) - cj.eval(hi)) / ds;
                if t > 0.0 {
                    pts.push(hi + t);
                }
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| close(*a, *b));
    let knots: Vec<(f64, f64)> = pts.iter().map(|&y| (y, env(y))).collect();
    let (y0, y1) = (pts[0], *pts.last().unwrap());
    let e0 = env(y0);
    let e1 = env(y1);
    let tol0 = 1e-12 * e0.abs().max(1.0);
    let tol1 = 1e-12 * e1.abs().max(1.0);
    let active0 = curves.iter().filter(|c| (c.eval(y0) - e0).abs() <= tol0);
    let active1 = curves.iter().filter(|c| (c.eval(y1) - e1).abs() <= tol1);
    // Moving left, the min envelope follows the steepest active piece; moving right it
    // follows the flattest one. Max-mode mirrors both.
    let left = match mode {
        Mode::Min => active0.map(|c| c.left).fold(f64::NEG_INFINITY, f64::max),
        Mode::Max => active0.map(|c| c.left).fold(f64::INFINITY, f64::min),
    };
    let right = match mode {
        Mode::Min => active1.map(|c| c.right).fold(f64::INFINITY, f64::min),
        Mode::Max => active1.map(|c| c.right).fold(f64::NEG_INFINITY, f64::max),
    };
    Ok(Curve::simplified(mode, knots, left, right))
}

/// The diagonally scaled curve `y -> a f(y / a)`.
///
/// # Errors
///
/// `a < 1` in min-mode or `a` outside `(0, 1]` in max-mode.
pub fn diag_scale(f: &Curve, a: f64) -> Result<Curve> {
    let ok = match f.mode {
        Mode::Min => a >= 1.0 && a.is_finite(),
        Mode::Max => a > 0.0 && a <= 1.0,
    };
    if !ok {
        return Err(Error::Domain(format!(
            "scale factor {a} outside the range for {} curves",
            f.mode
        )));
    }
    Ok(Curve {
        mode: f.mode,
        xs: f.xs.iter().map(|x| a * x).collect(),
        fs: f.fs.iter().map(|v| a * v).collect(),
        left: f.left,
        right: f.right,
    })
}

fn value_scale(a: &Dist, b: &Dist) -> f64 {
    a.values().iter().chain(b.values()).fold(1.0_f64, |m, v| m.max(v.abs()))
}

/// First outside option `y` where second-order dominance of `a` over `b` fails.
///
/// Min-mode requires `E[min(y, A)] <= E[min(y, B)]` for all `y`; max-mode requires
/// `E[max(y, A)] >= E[max(y, B)]`. Both sides are piecewise linear with kinks at atoms
/// and agree on the far side of all atoms, so the atoms are the only points to check.
pub fn dominance_2nd_witness(a: &Dist, b: &Dist, mode: Mode) -> Option<f64> {
    let tol = EPS * value_scale(a, b);
    let mut ys: Vec<f64> = a.values().iter().chain(b.values()).copied().collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    ys.into_iter().find(|&y| {
        let fa = a.expected_clamp(y, mode);
        let fb = b.expected_clamp(y, mode);
        match mode {
            Mode::Min => fa > fb + tol,
            Mode::Max => fa < fb - tol,
        }
    })
}

/// Second-order stochastic dominance test (see [`dominance_2nd_witness`]).
pub fn dominates_2nd(a: &Dist, b: &Dist, mode: Mode) -> bool {
    dominance_2nd_witness(a, b, mode).is_none()
}

/// A quantile level `q` with `quantile(a, q) > quantile(b, q)`, if any.
///
/// Decided on the merged CDF steps: `a` is quantile-wise below `b` exactly when
/// `F_a(x) >= F_b(x)` for every `x`. Values of `a` may exceed those of `b` by the value
/// tolerance.
pub fn dominance_1st_witness(a: &Dist, b: &Dist) -> Option<f64> {
    let vtol = EPS * value_scale(a, b);
    b.values().iter().find_map(|&x| {
        let fa = a.cdf(x + vtol);
        let fb = b.cdf(x);
        (fa < fb - 1e-12).then_some(0.5 * (fa + fb))
    })
}

/// True when `quantile(a, q) <= quantile(b, q)` for every `q`.
pub fn dominates_1st(a: &Dist, b: &Dist) -> bool {
    dominance_1st_witness(a, b).is_none()
}

/// Best diagonal scaling `a` with `dominates_2nd(w_pi, a * w_m)`.
///
/// Min-mode returns the smallest `a >= 1`, max-mode the largest `a <= 1`. The search is
/// a bisection of at most 200 steps down to a relative width of `1e-12`; each step is
/// an exact dominance test.
///
/// # Errors
///
/// Min-mode: no `a <= 1e6` works. Max-mode: not even a vanishing scale works.
pub fn local_approx_factor(w_pi: &Dist, w_m: &Dist, mode: Mode) -> Result<f64> {
    let ok = |a: f64| dominates_2nd(w_pi, &w_m.scale(a), mode);
    if ok(1.0) {
        return Ok(1.0);
    }
    match mode {
        Mode::Min => {
            const CAP: f64 = 1e6;
            let mut hi = 2.0;
            while !ok(hi) {
                if hi >= CAP {
                    return Err(Error::Domain(format!("no local approximation factor up to {CAP}")));
                }
                hi = (hi * 2.0).min(CAP);
            }
            let mut lo = 1.0;
            for _ in 0..200 {
                if hi - lo <= 1e-12 * hi {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if ok(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(hi)
        }
        Mode::Max => {
            let floor = 1e-12;
            if !ok(floor) {
                return Err(Error::Domain("no positive local approximation factor".into()));
            }
            let (mut lo, mut hi) = (floor, 1.0);
            for _ in 0..200 {
                if hi - lo <= 1e-12 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if ok(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(lo)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(pairs: &[(f64, f64)]) -> Dist {
        Dist::new(pairs).unwrap()
    }

    #[test]
    fn curve_of_min_example() {
        let c = curve_of(&d(&[(2.0, 0.75), (4.0, 0.25)]), Mode::Min);
        assert_eq!(c.breakpoints(), vec![(2.0, 0.25), (4.0, 0.0)]);
        assert_eq!(c.left_slope(), 1.0);
        assert!((c.eval(100.0) - 2.5).abs() < EPS);
        assert_eq!(c.value_at_zero(), 0.0);
        let c = curve_of(&d(&[(1.0, 0.25), (3.0, 0.75)]), Mode::Min);
        assert_eq!(c.breakpoints(), vec![(1.0, 0.75), (3.0, 0.0)]);
        assert!((c.eval(10.0) - 2.5).abs() < EPS);
    }

    #[test]
    fn curve_of_max_starts_at_mean() {
        let w = d(&[(2.0, 0.75), (4.0, 0.25)]);
        let c = curve_of(&w, Mode::Max);
        assert!((c.value_at_zero() - 2.5).abs() < EPS);
        assert!((c.eval(3.0) - (0.75 * 3.0 + 0.25 * 4.0)).abs() < EPS);
        assert!((c.eval(5.0) - 5.0).abs() < EPS);
    }

    #[test]
    fn round_trips() {
        for mode in [Mode::Min, Mode::Max] {
            let w = d(&[(0.0, 0.1), (1.5, 0.2), (2.0, 0.3), (7.0, 0.4)]);
            assert!(dist_of(&curve_of(&w, mode)).unwrap().approx_eq(&w, 1e-12));
            let p = Dist::point(3.0);
            assert_eq!(dist_of(&curve_of(&p, mode)).unwrap(), p);
        }
    }

    #[test]
    fn envelope_of_two_action_curves() {
        let f1 = curve_of(&d(&[(2.0, 0.75), (4.0, 0.25)]), Mode::Min);
        let f2 = curve_of(&d(&[(1.0, 0.25), (3.0, 0.75)]), Mode::Min);
        let env = combine(&[f1.clone(), f2]).unwrap();
        let ys: Vec<f64> = env.breakpoints().iter().map(|b| b.0).collect();
        assert_eq!(ys.len(), 3);
        assert!((ys[0] - 1.0).abs() < EPS && (ys[1] - 2.5).abs() < EPS && (ys[2] - 4.0).abs() < EPS);
        let w = dist_of(&env).unwrap();
        assert!(w.approx_eq(&d(&[(1.0, 0.25), (2.5, 0.5), (4.0, 0.25)]), 1e-12));
        assert_eq!(combine(std::slice::from_ref(&f1)).unwrap(), f1);
        assert_eq!(combine(&[f1.clone(), f1.clone()]).unwrap(), f1);
    }

    #[test]
    fn envelope_crossing_left_of_all_knots() {
        // Lines y and 1 + y/2 in max-mode cross at y = 2; the constant 0 dominates left.
        let id = Curve::identity(Mode::Max);
        let half = Curve::affine(Mode::Max, &[(0.5, &id)], 1.0);
        let env = combine(&[id, half]).unwrap();
        assert!((env.eval(-10.0) - (1.0 - 5.0)).abs() < EPS);
        assert!((env.eval(2.0) - 2.0).abs() < EPS);
        assert!((env.eval(6.0) - 6.0).abs() < EPS);
        assert_eq!(env.left_slope(), 0.5);
        assert_eq!(env.right_slope(), 1.0);
    }

    #[test]
    fn diagonal_scaling() {
        let f = curve_of(&d(&[(2.0, 0.75), (4.0, 0.25)]), Mode::Min);
        assert_eq!(diag_scale(&f, 1.0).unwrap(), f);
        let g = diag_scale(&f, 2.0).unwrap();
        assert_eq!(g, curve_of(&d(&[(4.0, 0.75), (8.0, 0.25)]), Mode::Min));
        assert!(diag_scale(&f, 0.5).is_err());
        let m = curve_of(&d(&[(2.0, 1.0)]), Mode::Max);
        assert!(diag_scale(&m, 1.5).is_err());
        assert!(diag_scale(&m, 0.5).is_ok());
    }

    #[test]
    fn dominance_examples() {
        let wm = d(&[(1.0, 0.25), (2.5, 0.5), (4.0, 0.25)]);
        let z = d(&[(2.0, 0.75), (4.0, 0.25)]);
        assert!(dominates_2nd(&wm, &z, Mode::Min));
        assert!(dominates_2nd(&wm, &wm, Mode::Min));
        assert!(!dominates_2nd(&Dist::point(3.0), &Dist::point(1.0), Mode::Min));
        assert!(dominates_1st(
            &d(&[(1.0, 0.5), (2.0, 0.5)]),
            &d(&[(1.0, 0.5), (3.0, 0.5)])
        ));
        let a = d(&[(1.0, 0.25), (3.0, 0.75)]);
        let q = dominance_1st_witness(&a, &z).expect("no quantile dominance");
        assert!(a.quantile(q) > z.quantile(q));
    }

    #[test]
    fn factor_of_scaled_copy() {
        let w = d(&[(1.0, 0.3), (2.0, 0.7)]);
        assert_eq!(local_approx_factor(&w, &w, Mode::Min).unwrap(), 1.0);
        let f = local_approx_factor(&w.scale(2.0), &w, Mode::Min).unwrap();
        assert!((f - 2.0).abs() < 1e-6);
        let f = local_approx_factor(&w.scale(0.5), &w, Mode::Max).unwrap();
        assert!((f - 0.5).abs() < 1e-6);
    }
}
