//! Box families and their commitment rules.
//!
//! Each family builds a tree MDP for one alternative and offers a rule choosing a
//! commitment for it:
//!
//! * [`pbpi`]: partial inspection (peek before opening), minimization.
//! * [`additive`]: a box whose value is a sum of separately probed components.
//! * [`ws`]: the weighing scale, where information comes from threshold comparisons.
//! * [`pboi`]: optional inspection (grab without opening), maximization.

pub mod additive;
pub mod pboi;
pub mod pbpi;
pub mod ws;

pub use additive::{permutations, AdditiveBox, Probes, StaticCommit};
pub use pboi::{alpha_of_ratio, PboiBox, PboiParams, SemilocalRule};
pub use pbpi::{phi_partition, PbpiAction, PbpiBox, PbpiCommit};
pub use ws::{Halving, WsAlternative, WsParams};
