//! Seeded generators of small random instances for tests and benchmarks.
//!
//! Values are drawn on a half-integer grid and costs on a quarter grid, so ties and
//! coinciding breakpoints occur often.

use rand::Rng;

use crate::cims::{Chain, Mdp, Tree};
use crate::dist::Dist;
use crate::variants::{PboiBox, PbpiBox, WsAlternative};

/// Random distribution with `1..=max_atoms` atoms in `[0, max_value]`.
pub fn dist<R: Rng>(rng: &mut R, max_atoms: usize, max_value: f64) -> Dist {
    let n = rng.gen_range(1..=max_atoms.max(1));
    let steps = (2.0 * max_value).floor().max(1.0) as u32;
    let atoms: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            (
                f64::from(rng.gen_range(0..=steps)) / 2.0,
                f64::from(rng.gen_range(1..=8u32)),
            )
        })
        .collect();
    Dist::from_weights(&atoms).expect("positive weights")
}

/// Random cost in `[0, max]` on a quarter grid.
pub fn cost<R: Rng>(rng: &mut R, max: f64) -> f64 {
    f64::from(rng.gen_range(0..=(4.0 * max).floor() as u32)) / 4.0
}

fn branches<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| f64::from(rng.gen_range(1..=6u32))).collect();
    let total: f64 = w.iter().sum();
    let mut p: Vec<f64> = w.iter().map(|x| x / total).collect();
    // Put the rounding residue on the last branch so the sum is one.
    let head: f64 = p[..k - 1].iter().sum();
    p[k - 1] = 1.0 - head;
    p
}

fn tree<R: Rng>(rng: &mut R, depth: usize, max_branch: usize, max_actions: usize) -> Tree {
    if depth == 0 || rng.gen_bool(0.25) {
        return Tree::leaf(f64::from(rng.gen_range(0..=20u32)) / 2.0);
    }
    let n_actions = rng.gen_range(1..=max_actions.max(1));
    let actions = (0..n_actions)
        .map(|a| {
            let k = rng.gen_range(1..=max_branch.max(1));
            let probs = branches(rng, k);
            let kids = probs
                .into_iter()
                .map(|p| (p, tree(rng, depth - 1, max_branch, max_actions)))
                .collect();
            Tree::act(&format!("a{a}"), cost(rng, 2.0), kids)
        })
        .collect();
    Tree::node(actions)
}

/// Random tree MDP with root a decision node.
pub fn mdp<R: Rng>(rng: &mut R, depth: usize, max_branch: usize, max_actions: usize) -> Mdp {
    loop {
        let t = tree(rng, depth, max_branch, max_actions);
        if matches!(t, Tree::Node(_)) {
            return Mdp::from_tree(&t).expect("generated trees are valid");
        }
    }
}

/// Random chain (one action per decision node).
pub fn chain<R: Rng>(rng: &mut R, depth: usize, max_branch: usize) -> Chain {
    Chain::new(mdp(rng, depth, max_branch, 1)).expect("single-action tree")
}

/// Random partial-inspection box with `0 < c^p <= c^o`.
pub fn pbpi_box<R: Rng>(rng: &mut R, max_atoms: usize) -> PbpiBox {
    let d = dist(rng, max_atoms, 10.0);
    let co = f64::from(rng.gen_range(1..=12u32)) / 4.0;
    let cp = co * f64::from(rng.gen_range(1..=8u32)) / 8.0;
    PbpiBox::new(d, co, cp).expect("positive costs")
}

/// Random weighing-scale alternative with positive cost.
pub fn ws_alternative<R: Rng>(rng: &mut R, max_atoms: usize) -> WsAlternative {
    let d = dist(rng, max_atoms, 20.0);
    let c = f64::from(rng.gen_range(1..=8u32)) / 8.0;
    WsAlternative::new(d, c).expect("positive cost")
}

/// Random optional-inspection box, normalized.
pub fn pboi_box<R: Rng>(rng: &mut R, max_atoms: usize) -> PboiBox {
    let d = dist(rng, max_atoms, 20.0);
    let c = cost(rng, 4.0);
    PboiBox::new(d, c).expect("nonnegative inputs").normalized()
}

/// A mean-preserving spread of `d`: one atom is split into two atoms straddling it.
pub fn mean_preserving_spread<R: Rng>(rng: &mut R, d: &Dist) -> Dist {
    let k = rng.gen_range(0..d.len());
    let (v, p) = (d.values()[k], d.probs()[k]);
    let lo_gap = f64::from(rng.gen_range(1..=4u32)) / 2.0;
    let hi_gap = f64::from(rng.gen_range(1..=4u32)) / 2.0;
    // Weights w_lo * lo_gap = w_hi * hi_gap keep the mean.
    let w_lo = hi_gap / (lo_gap + hi_gap);
    let mut atoms: Vec<(f64, f64)> = d.atoms().enumerate().filter(|&(i, _)| i != k).map(|(_, a)| a).collect();
    atoms.push((v - lo_gap, p * w_lo));
    atoms.push((v + hi_gap, p * (1.0 - w_lo)));
    Dist::from_weights(&atoms).expect("positive weights")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cims::validate_mdp;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shapes_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let m = mdp(&mut rng, 3, 3, 3);
            let s = validate_mdp(&m).unwrap();
            assert!(s.horizon <= 3);
            assert!(m.nodes().iter().all(|n| n.actions().len() <= 3));
            let d = dist(&mut rng, 5, 10.0);
            let s = mean_preserving_spread(&mut rng, &d);
            assert!((s.mean() - d.mean()).abs() < 1e-9);
            let b = pbpi_box(&mut rng, 5);
            assert!(b.peek_cost > 0.0 && b.peek_cost <= b.open_cost);
        }
    }
}
