//! Exact Bayes-optimal fixed-budget best-arm identification for Gaussian
//! arms at small horizons, plus the Monte-Carlo machinery to study it.
//!
//! * [`model`]: arms, instances, beliefs, histories, seeds.
//! * [`posterior`]: Gaussian posterior updates, predictive laws, terminal
//!   losses and tail bounds.
//! * [`bellman`]: the exact loss recursion, expected Bellman improvement,
//!   the two-armed closed form and a Monte-Carlo oracle.
//! * [`policies`]: Bayes-optimal, alternating, successive rejects, uniform.
//! * [`simulate`]: regret estimation, event probes, starvation states.
//! * [`experiment`]: config-driven runs behind the `bai` binary.
//! * [`validate`]: the acceptance suite.

pub mod bellman;
pub mod error;
pub mod experiment;
pub mod model;
pub mod policies;
pub mod posterior;
pub mod quadrature;
pub mod simulate;
pub mod stats;
pub mod validate;

pub use bellman::{exact_loss, BellmanResult, DpConfig};
pub use error::{Error, Result};
pub use model::{replay, Arm, ArmStats, BeliefState, Draw, History, Instance, PriorMode, Seed};
pub use policies::Policy;
pub use simulate::RegretEstimate;
