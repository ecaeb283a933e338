//! Selection over a matroid.
//!
//! In min-mode the decision maker must accept a basis and pays inspection costs plus
//! accepted values; in max-mode the accepted set must stay independent and the payoff
//! is accepted values minus costs. Alternatives are numbered `0..n` and identified with
//! matroid elements.

mod brute;
mod compose;
mod matroid;
mod policy;

pub use brute::{brute_force_opt, commitment_gap, GapResult, OptResult, GAP_TUPLE_CAP};
pub use compose::{grab_probabilities, semilocal_compose};
pub use matroid::{Matroid, OracleAnswer, Set, MAX_ELEMENTS};
pub use policy::{greedy_opt, index_policy_value, surrogate_bound, STATE_CAP};

use crate::cims::{validate_mdp, Mdp};
use crate::error::{Error, Result};
use crate::mode::Mode;

/// How expectations are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Exact enumeration or memoized recursion.
    Exact,
    /// Average of `reps` simulated runs; replica `r` draws from stream `r` of a
    /// generator seeded with `seed`.
    MonteCarlo { seed: u64, reps: u64 },
}

/// A selection problem: one MDP per matroid element.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub mdps: Vec<Mdp>,
    pub matroid: Matroid,
    pub mode: Mode,
}

impl Instance {
    /// # Errors
    ///
    /// An invalid MDP, or an MDP count different from the matroid's ground set.
    pub fn new(mdps: Vec<Mdp>, matroid: Matroid, mode: Mode) -> Result<Instance> {
        if mdps.len() != matroid.n() {
            return Err(Error::Domain(format!(
                "{} alternatives but the matroid has {} elements",
                mdps.len(),
                matroid.n()
            )));
        }
        for m in &mdps {
            validate_mdp(m)?;
        }
        Ok(Instance { mdps, matroid, mode })
    }
}
