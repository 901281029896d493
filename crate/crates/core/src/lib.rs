//! Tabular reinforcement-learning laboratory for metric-endowed MDPs.
//!
//! The crate is organised bottom-up:
//!
//! * [`mdp`] holds the tabular model, its JSON form, structural validation
//!   and the exact oracles (value iteration, finite-horizon backward
//!   induction) every other module measures against.
//! * [`env`] generates lattice gridworlds and size sweeps.
//! * [`submdp`] carves metric balls out of a parent MDP and plans
//!   overlapping sub-MDP centers.
//! * [`bounds`] evaluates the closed-form sample-complexity expressions.
//! * [`algorithms`] contains probabilistic delayed Q-learning and the
//!   baseline learners behind one trace format.
//! * [`harness`] runs sweeps, detects convergence, aggregates, fits scaling
//!   models and renders SVG figures.

// `!(x >= lo)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod bounds;
pub mod env;
pub mod graph;
pub mod harness;
pub mod mdp;
pub mod submdp;
mod util;

pub use algorithms::{
    dql_run, pdql_run, pql_run, qlearning_run, vrql_run, LearnError, Learner, RunTrace,
    Termination, TracePoint,
};
pub use bounds::{BoundInputs, BoundReport};
pub use env::{LatticeConfig, RewardSpec};
pub use harness::{ConvergenceRecord, ExperimentConfig, HarnessError};
pub use mdp::{MdpError, MdpSpec, Metric, Policy, QTable, ValueTable};
pub use submdp::{CoveragePlan, SubMdp};
pub use util::derive_seed;
