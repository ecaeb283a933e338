//! Costly-information combinatorial selection.
//!
//! A decision maker picks a feasible set of stochastic alternatives (a basis of a
//! matroid when minimizing cost, an independent set when maximizing value) and may pay
//! to learn about each alternative through its own tree-shaped Markov decision
//! process. This crate implements the amortization machinery that makes such problems
//! tractable:
//!
//! * [`dist`]: finite distributions and the index equations `c = E[(g - X)^+]`.
//! * [`curve`]: exact piecewise-linear optimality curves, dominance tests and the
//!   constructive second-order dominance map.
//! * [`cims`]: the tree MDP model, commitments and the chains they induce.
//! * [`amort`]: water filling (minimization) and water draining (maximization),
//!   surrogate costs of general MDPs and the action-independent decomposition.
//! * [`variants`]: Pandora's Box with partial inspection, additive boxes, the weighing
//!   scale and optional inspection, with their commitment rules.
//! * [`select`]: matroids, index policies, the surrogate bound, a brute-force optimum
//!   oracle, commitment gaps and the semilocal composition policy.
//!
//! All arithmetic is `f64`. Equalities in tests are within [`EPS`]; probability sums
//! are checked against [`EPS_P`].

// Negated float comparisons are how input checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amort;
pub mod cims;
pub mod curve;
pub mod dist;
mod error;
mod mode;
pub mod random;
pub mod select;
pub mod variants;

pub use amort::{decompose, mdp_curve, mdp_surrogate, water_fill, Amortization, Decomposition};
pub use cims::{
    apply_commitment, enumerate_commitments, validate_mdp, Action, Chain, Commitment, Mdp, MdpStats, Node, NodeId,
    Tree, TreeAction,
};
pub use curve::{
    combine, curve_of, diag_scale, dist_of, dominates_1st, dominates_2nd, local_approx_factor, sdom_map, Curve,
    StochasticMap,
};
pub use dist::{Dist, Side, Split, EPS, EPS_P};
pub use error::{Error, Result};
pub use mode::Mode;
pub use select::{
    brute_force_opt, commitment_gap, index_policy_value, semilocal_compose, surrogate_bound, GapResult, Instance,
    Matroid, Method, OptResult,
};
