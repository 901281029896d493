//! Learners with generative access to an [`MdpSpec`].
//!
//! Every learner spends one timestep per generative sample and reports a
//! [`RunTrace`] in a shared format, so sample counts are comparable across
//! algorithms.

mod pdql;
mod pql;
mod qlearning;
mod vrql;

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::mdp::{row_max, MdpSpec, QTable, ValueTable};

pub use pdql::{
    default_params, dql_batch_size, dql_run, memory_footprint, pdql_run, pdql_run_observed,
    MemoryFootprint, NoopObserver, PdqlAudit, PdqlObserver, PdqlParams, PdqlRunner, PdqlState,
    StepOutcome, UnlockScope,
};
pub use pql::{pql_run, PqlParams};
pub use qlearning::{qlearning_run, LearningRate, QLearningParams};
pub use vrql::{vrql_run, VrqlParams};

/// Default timesteps between trace points.
pub const DEFAULT_TRACE_STRIDE: u64 = 1000;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("oracle has {found} states, MDP has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("budget of {} timesteps exhausted", .0.total_timesteps)]
    BudgetExhausted(Box<RunTrace>),
}

impl LearnError {
    /// The partial trace of a budget-exhausted run.
    pub fn partial_trace(&self) -> Option<&RunTrace> {
        match self {
            LearnError::BudgetExhausted(t) => Some(t),
            _ => None,
        }
    }
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Every state-action pair is locked.
    AllLocked,
    /// The learner used its whole budget as planned (no lock mechanism).
    BudgetSpent,
    /// The learner finished its configured number of phases or epochs.
    Completed,
    /// The budget ran out before the learner's own stopping rule fired.
    BudgetExhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub timestep: u64,
    /// Signed `mean_s (max_a Q(s,a) - V*(s))`.
    pub mean_error: f64,
    pub locked_fraction: f64,
    /// Successful value updates so far.
    pub updates: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunTrace {
    pub points: Vec<TracePoint>,
    /// Timestep at which the learner's own stopping rule fired.
    pub converged_at: Option<u64>,
    pub termination: Termination,
    pub total_timesteps: u64,
    pub attempted_updates: u64,
    pub successful_updates: u64,
    #[serde(skip)]
    pub final_q: QTable,
    /// Per-epoch variance of value increments (variance-reduced learner only).
    pub epoch_increment_variance: Vec<f64>,
    pub config: serde_json::Value,
}

impl RunTrace {
    pub fn final_point(&self) -> Option<&TracePoint> {
        self.points.last()
    }

    pub fn final_mean_error(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.mean_error)
    }

    /// CSV with header `timestep,mean_error,locked_fraction,updates`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("timestep,mean_error,locked_fraction,updates\n");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                p.timestep, p.mean_error, p.locked_fraction, p.updates
            );
        }
        out
    }

    /// Run metadata without the trace points.
    pub fn snapshot_json(&self) -> String {
        let snapshot = serde_json::json!({
            "config": self.config,
            "termination": self.termination,
            "converged_at": self.converged_at,
            "total_timesteps": self.total_timesteps,
            "attempted_updates": self.attempted_updates,
            "successful_updates": self.successful_updates,
            "epoch_increment_variance": self.epoch_increment_variance,
        });
        serde_json::to_string_pretty(&snapshot).expect("snapshot serializes")
    }
}

/// Common interface over all learners.
pub trait Learner: Send + Sync {
    fn name(&self) -> &str;

    fn run(&self, spec: &MdpSpec, oracle: &ValueTable, seed: u64) -> Result<RunTrace, LearnError>;
}

fn check_oracle(spec: &MdpSpec, oracle: &ValueTable) -> Result<(), LearnError> {
    if oracle.len() != spec.num_states() {
        return Err(LearnError::DimensionMismatch {
            expected: spec.num_states(),
            found: oracle.len(),
        });
    }
    Ok(())
}

fn check_unit(name: &str, value: f64) -> Result<(), LearnError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(LearnError::InvalidParams(format!(
            "{name} = {value} outside (0, 1)"
        )))
    }
}

/// Signed mean gap of the greedy values of `q` to the oracle.
pub(crate) fn q_mean_error(q: &QTable, oracle: &ValueTable) -> f64 {
    let n = q.num_states();
    let total: f64 = (0..n).map(|s| row_max(q.row(s)) - oracle.0[s]).sum();
    total / n as f64
}

/// `r + γ max_a' Q(s', a')` for one generative sample.
#[inline]
pub(crate) fn bootstrap_target(q: &QTable, gamma: f64, reward: f64, next: usize) -> f64 {
    reward + gamma * row_max(q.row(next))
}

/// Sample variance with `n - 1` in the denominator; 0 for fewer than two.
pub(crate) fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub struct Pdql(pub PdqlParams);
pub struct Dql(pub PdqlParams);
pub struct QLearning(pub QLearningParams);
pub struct Pql(pub PqlParams);
pub struct Vrql(pub VrqlParams);

impl Learner for Pdql {
    fn name(&self) -> &str {
        "pdql"
    }
    fn run(&self, spec: &MdpSpec, oracle: &ValueTable, seed: u64) -> Result<RunTrace, LearnError> {
        pdql_run(spec, &self.0, oracle, seed)
    }
}

impl Learner for Dql {
    fn name(&self) -> &str {
        "dql"
    }
    fn run(&self, spec: &MdpSpec, oracle: &ValueTable, seed: u64) -> Result<RunTrace, LearnError> {
        dql_run(spec, &self.0, oracle, seed)
    }
}

impl Learner for QLearning {
    fn name(&self) -> &str {
        "qlearning"
    }
    fn run(&self, spec: &MdpSpec, oracle: &ValueTable, seed: u64) -> Result<RunTrace, LearnError> {
        qlearning_run(spec, &self.0, oracle, seed)
    }
}

impl Learner for Pql {
    fn name(&self) -> &str {
        "pql"
    }
    fn run(&self, spec: &MdpSpec, oracle: &ValueTable, seed: u64) -> Result<RunTrace, LearnError> {
        pql_run(spec, &self.0, oracle, seed)
    }
}

impl Learner for Vrql {
    fn name(&self) -> &str {
        "vrql"
    }
    fn run(&self, spec: &MdpSpec, oracle: &ValueTable, seed: u64) -> Result<RunTrace, LearnError> {
        vrql_run(spec, &self.0, oracle, seed)
    }
}
