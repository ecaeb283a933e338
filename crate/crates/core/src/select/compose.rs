use super::matroid::{Matroid, Set};
use super::policy::{index_policy_value, replica_rng};
use super::Method;
use crate::cims::{Chain, Mdp};
use crate::error::{Error, Result};
use crate::mode::Mode;
use crate::variants::PboiBox;

use rand::Rng;

/// Grab probabilities `p_i` from [`PboiBox::semilocal_rule`] at slack `beta`.
pub fn grab_probabilities(boxes: &[PboiBox], beta: f64) -> Vec<f64> {
    boxes.iter().map(|b| b.semilocal_rule(beta).p).collect()
}

/// Expected utility of the randomized grab-or-open composition.
///
/// Boxes are normalized and visited in order of decreasing mean (stable). Box `i` is
/// committed to grabbing when its coin (probability `probs[i]`) lands heads and adding
/// it keeps the grabbed set independent; every other box is committed to opening. The
/// resulting chains are played by the water-draining index policy. [`Method::Exact`]
/// enumerates all coin outcomes.
///
/// # Errors
///
/// Length mismatches, probabilities outside `[0, 1]`, more than 20 boxes under
/// [`Method::Exact`], or an index-policy cap.
pub fn semilocal_compose(boxes: &[PboiBox], matroid: &Matroid, probs: &[f64], method: Method) -> Result<f64> {
    if boxes.len() != probs.len() {
        return Err(Error::Domain(format!(
            "{} boxes but {} probabilities",
            boxes.len(),
            probs.len()
        )));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Domain(format!("grab probability {p} outside [0, 1]")));
    }
    let boxes: Vec<PboiBox> = boxes.iter().map(PboiBox::normalized).collect();
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&a, &b| boxes[b].dist.mean().total_cmp(&boxes[a].dist.mean()));
    let open: Vec<Chain> = boxes
        .iter()
        .map(|b| Chain::pb(&b.dist, b.cost))
        .collect::<Result<_>>()?;
    let grab: Vec<Chain> = boxes
        .iter()
        .map(|b| Chain::new(Mdp::terminal(b.dist.mean())))
        .collect::<Result<_>>()?;
    let grabbed_set = |coins: &dyn Fn(usize) -> bool| -> Set {
        let mut s: Set = 0;
        for &i in &order {
            if coins(i) && matroid.independent(s | 1 << i) {
                s |= 1 << i;
            }
        }
        s
    };
    let chains_for = |s: Set| -> Vec<Chain> {
        (0..boxes.len())
            .map(|i| {
                if s >> i & 1 == 1 {
                    grab[i].clone()
                } else {
                    open[i].clone()
                }
            })
            .collect()
    };
    match method {
        Method::Exact => {
            if boxes.len() > 20 {
                return Err(Error::CapExceeded {
                    what: "coin outcomes",
                    count: 1u128 << boxes.len(),
                    cap: 1 << 20,
                });
            }
            let mut total = 0.0;
            for heads in 0u64..1 << boxes.len() {
                let p: f64 = (0..boxes.len())
                    .map(|i| if heads >> i & 1 == 1 { probs[i] } else { 1.0 - probs[i] })
                    .product();
                if p == 0.0 {
                    continue;
                }
                let s = grabbed_set(&|i| heads >> i & 1 == 1);
                total += p * index_policy_value(&chains_for(s), matroid, Mode::Max, Method::Exact)?;
            }
            Ok(total)
        }
        Method::MonteCarlo { seed, reps } => {
            if reps == 0 {
                return Err(Error::Domain("Monte Carlo needs at least one replica".into()));
            }
            let mut sum = 0.0;
            for r in 0..reps {
                let mut rng = replica_rng(seed, r);
                let heads: Vec<bool> = probs.iter().map(|&p| rng.gen::<f64>() < p).collect();
                let s = grabbed_set(&|i| heads[i]);
                let inner = Method::MonteCarlo {
                    seed: rng.gen(),
                    reps: 1,
                };
                sum += index_policy_value(&chains_for(s), matroid, Mode::Max, inner)?;
            }
            Ok(sum / reps as f64)
        }
    }
}
