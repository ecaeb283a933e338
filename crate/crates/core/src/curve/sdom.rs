//! Constructive second-order dominance.
//!
//! Given `X` whose min-curve lies below that of `Z`, builds a random map `m` with
//! `z ~ Z, x ~ m(z)` distributed as `X` and `E[m(z)] <= z`. The construction walks the
//! atoms of `X` left to right. At each step the chord of `f_X` leaving the current atom
//! is extended until it meets `f_Z` again, and every atom of `Z` strictly between the
//! two meeting points is split between its left neighbour (the current atom) and its
//! right neighbour with the mean-preserving gadget ratio. Once all but the last atom
//! agree, the remaining mass is collapsed onto the top atom of `X`.
//!
//! Max-mode reflects values through `C - v` and reuses the min-mode construction.

use crate::dist::{Dist, EPS};
use crate::error::{Error, Result};
use crate::mode::Mode;

use super::dominance_2nd_witness;

/// A row-stochastic map from the atoms of one distribution to distributions.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMap {
    rows: Vec<(f64, Dist)>,
}

impl StochasticMap {
    /// Rows as `(z, m(z))` in increasing `z`.
    pub fn rows(&self) -> &[(f64, Dist)] {
        &self.rows
    }

    /// The row for `z`, matched within a relative tolerance of [`EPS`].
    pub fn get(&self, z: f64) -> Option<&Dist> {
        self.rows
            .iter()
            .find(|(v, _)| (v - z).abs() <= EPS * v.abs().max(z.abs()).max(1.0))
            .map(|(_, d)| d)
    }

    /// Distribution of `m(z)` for `z ~ source`.
    ///
    /// # Errors
    ///
    /// An atom of `source` has no row.
    pub fn pushforward(&self, source: &Dist) -> Result<Dist> {
        let mut parts = Vec::with_capacity(source.len());
        for (z, p) in source.atoms() {
            let row = self
                .get(z)
                .ok_or_else(|| Error::Domain(format!("no row for value {z}")))?;
            parts.push((p, row));
        }
        Ok(Dist::mixture(parts))
    }
}

/// Builds the dominance map of `x` over `z` (see the module docs).
///
/// # Errors
///
/// [`Error::NotDominated`] with the first outside option where
/// `E[min(y, X)] <= E[min(y, Z)]` (or its max-mode mirror) fails.
pub fn sdom_map(x: &Dist, z: &Dist, mode: Mode) -> Result<StochasticMap> {
    if let Some(y) = dominance_2nd_witness(x, z, mode) {
        return Err(Error::NotDominated { y });
    }
    let rows = match mode {
        Mode::Min => min_rows(&atoms(x), &atoms(z)),
        Mode::Max => {
            let c = x.max().max(z.max());
            let rx: Vec<(f64, f64)> = atoms(x).into_iter().rev().map(|(v, p)| (c - v, p)).collect();
            let rz: Vec<(f64, f64)> = atoms(z).into_iter().rev().map(|(v, p)| (c - v, p)).collect();
            let mut rows = min_rows(&rx, &rz);
            rows.reverse();
            for row in &mut rows {
                for e in row.iter_mut() {
                    e.0 = c - e.0;
                }
            }
            rows
        }
    };
    let xs = x.values();
    let out = z
        .values()
        .iter()
        .zip(rows)
        .map(|(&zv, row)| {
            let snapped: Vec<(f64, f64)> = row.into_iter().map(|(v, w)| (nearest(xs, v), w)).collect();
            let d = Dist::from_weights(&snapped).expect("gadget rows carry positive mass");
            (zv, d)
        })
        .collect();
    Ok(StochasticMap { rows: out })
}

fn atoms(d: &Dist) -> Vec<(f64, f64)> {
    d.atoms().collect()
}

fn nearest(xs: &[f64], v: f64) -> f64 {
    *xs.iter()
        .min_by(|a, b| (*a - v).abs().total_cmp(&(*b - v).abs()))
        .unwrap()
}

/// Current aggregate of all rows, merged on exact value equality.
fn current(rows: &[Vec<(f64, f64)>], pz: &[f64]) -> Vec<(f64, f64)> {
    let mut all: Vec<(f64, f64)> = rows
        .iter()
        .zip(pz)
        .flat_map(|(r, &p)| r.iter().map(move |&(v, w)| (v, p * w)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(all.len());
    for (v, p) in all {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += p,
            _ => out.push((v, p)),
        }
    }
    out.retain(|a| a.1 > 0.0);
    out
}

fn clamp_curve(atoms: &[(f64, f64)], y: f64) -> f64 {
    atoms.iter().map(|&(v, p)| p * v.min(y)).sum()
}

/// Replaces every occurrence of value `from` in the rows by the split
/// `{lo: lambda, hi: 1 - lambda}`.
fn split_value(rows: &mut [Vec<(f64, f64)>], from: f64, lo: f64, hi: f64, lambda: f64) {
    for row in rows.iter_mut() {
        let mut next = Vec::with_capacity(row.len() + 1);
        for &(v, w) in row.iter() {
            if v == from {
                if lambda > 0.0 {
                    next.push((lo, w * lambda));
                }
                if lambda < 1.0 {
                    next.push((hi, w * (1.0 - lambda)));
                }
            } else {
                next.push((v, w));
            }
        }
        row.clear();
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(next.len());
        next.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (v, w) in next {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += w,
                _ => merged.push((v, w)),
            }
        }
        *row = merged;
    }
}

fn min_rows(x: &[(f64, f64)], z: &[(f64, f64)]) -> Vec<Vec<(f64, f64)>> {
    let scale = x.iter().chain(z).fold(1.0_f64, |m, a| m.max(a.0.abs()));
    let vtol = EPS * scale;
    let pz: Vec<f64> = z.iter().map(|a| a.1).collect();
    let mut rows: Vec<Vec<(f64, f64)>> = z.iter().map(|&(v, _)| vec![(v, 1.0)]).collect();
    let m = x.len();
    let mut cum_x = 0.0;
    for i in 0..m.saturating_sub(1) {
        let (a, pa) = x[i];
        cum_x += pa;
        let cur = current(&rows, &pz);
        // Snap a current atom sitting on `a` to exactly `a`.
        if let Some(&(v, _)) = cur.iter().find(|c| c.0 != a && (c.0 - a).abs() <= vtol) {
            split_value(&mut rows, v, a, a, 1.0);
        }
        let cur = current(&rows, &pz);
        let k = cur.partition_point(|c| c.0 < a);
        if k < cur.len() && cur[k].0 == a && (cur[k].1 - pa).abs() <= EPS {
            continue;
        }
        let s = 1.0 - cum_x;
        let fa = clamp_curve(&cur, a);
        let line = |y: f64| fa + s * (y - a);
        let mut prev = (a, 0.0);
        let mut b = None;
        for &(v, _) in cur.iter().filter(|c| c.0 > a) {
            let d = clamp_curve(&cur, v) - line(v);
            if d <= vtol {
                b = Some(if d >= -vtol {
                    v
                } else {
                    prev.0 + (v - prev.0) * prev.1 / (prev.1 - d)
                });
                break;
            }
            prev = (v, d);
        }
        let mut b = b.unwrap_or_else(|| {
            // Beyond the last atom the curve is flat and the line keeps rising.
            if s > 0.0 {
                prev.0 + prev.1 / s
            } else {
                prev.0
            }
        });
        if let Some(&(v, _)) = x.iter().chain(cur.iter()).find(|c| (c.0 - b).abs() <= vtol) {
            b = v;
        }
        // Gadget sweep over the atoms strictly inside (a, b).
        loop {
            let cur = current(&rows, &pz);
            let Some(j) = cur.iter().position(|c| c.0 > a && c.0 < b) else {
                break;
            };
            let (zv, pzv) = cur[j];
            let t = cur.get(j + 1).map_or(b, |c| c.0.min(b));
            let s1 = 1.0 - cur.iter().take_while(|c| c.0 <= a).map(|c| c.1).sum::<f64>();
            let s2 = s1 - pzv;
            let sc = (clamp_curve(&cur, t) - clamp_curve(&cur, a)) / (t - a);
            let mut lambda = ((s1 - sc) / (s1 - s2)).clamp(0.0, 1.0);
            if lambda <= 1e-12 {
                lambda = 0.0;
            } else if lambda >= 1.0 - 1e-12 {
                lambda = 1.0;
            }
            split_value(&mut rows, zv, a, t, lambda);
        }
    }
    // Every atom past the agreed prefix sits at or above the top atom of X.
    let top = x[m - 1].0;
    let prefix: Vec<f64> = x[..m - 1].iter().map(|a| a.0).collect();
    for row in &mut rows {
        for e in row.iter_mut() {
            if !prefix.contains(&e.0) {
                e.0 = top;
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(pairs: &[(f64, f64)]) -> Dist {
        Dist::new(pairs).unwrap()
    }

    #[test]
    fn two_action_split() {
        let x = d(&[(1.0, 0.25), (2.5, 0.5), (4.0, 0.25)]);
        let z = d(&[(2.0, 0.75), (4.0, 0.25)]);
        let m = sdom_map(&x, &z, Mode::Min).unwrap();
        assert!(m
            .get(2.0)
            .unwrap()
            .approx_eq(&d(&[(1.0, 1.0 / 3.0), (2.5, 2.0 / 3.0)]), 1e-9));
        assert_eq!(m.get(4.0).unwrap(), &Dist::point(4.0));
        assert!(m.pushforward(&z).unwrap().approx_eq(&x, 1e-12));
    }

    #[test]
    fn identity_and_single_source() {
        let w = d(&[(1.0, 0.2), (3.0, 0.3), (5.0, 0.5)]);
        for mode in [Mode::Min, Mode::Max] {
            let m = sdom_map(&w, &w, mode).unwrap();
            for (z, row) in m.rows() {
                assert_eq!(row, &Dist::point(*z));
            }
        }
        let x = d(&[(0.0, 0.5), (2.0, 0.5)]);
        let m = sdom_map(&x, &Dist::point(1.0), Mode::Min).unwrap();
        assert!(m.get(1.0).unwrap().approx_eq(&x, 1e-12));
    }

    #[test]
    fn max_mode_spread() {
        // In max-mode the spread {0, 2} dominates the point 1.
        let x = d(&[(0.0, 0.5), (2.0, 0.5)]);
        let m = sdom_map(&x, &Dist::point(1.0), Mode::Max).unwrap();
        assert!(m.get(1.0).unwrap().approx_eq(&x, 1e-12));
        assert!(matches!(
            sdom_map(&Dist::point(1.0), &x, Mode::Max),
            Err(Error::NotDominated { .. })
        ));
    }

    #[test]
    fn rejects_non_dominated() {
        let err = sdom_map(&Dist::point(3.0), &Dist::point(1.0), Mode::Min).unwrap_err();
        assert!(matches!(err, Error::NotDominated { .. }));
    }
}
