//! TOML experiment configuration.

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::algorithms::{
    default_params, dql_batch_size, LearningRate, PdqlParams, PqlParams, QLearningParams,
    VrqlParams, DEFAULT_TRACE_STRIDE,
};
use crate::bounds::{sample_complexity_bound, BoundInputs};
use crate::env::{size_sweep_configs, LatticeConfig, RewardSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub env: EnvSection,
    #[serde(rename = "learner", default)]
    pub learners: Vec<LearnerConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Convergence target: a run has converged once `|mean_error| <= epsilon`
    /// holds at every later trace point.
    pub epsilon: f64,
    pub delta: f64,
    pub gamma: f64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Budget per cell as a multiple of the closed-form sample-complexity
    /// bound at `(epsilon, delta, gamma, S, A)`.
    #[serde(default = "default_multiplier")]
    pub budget_multiplier: f64,
    /// Absolute budget per cell; overrides `budget_multiplier`.
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default = "default_stride")]
    pub trace_stride: u64,
    /// Lattice size used for the convergence-curve figure.
    #[serde(default)]
    pub figure_b_size: Option<usize>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

fn default_multiplier() -> f64 {
    1.0
}

fn default_stride() -> u64 {
    DEFAULT_TRACE_STRIDE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSection {
    /// A single lattice.
    #[serde(default)]
    pub dims: Option<Vec<usize>>,
    /// A size sweep over most-square 2-D lattices.
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub slip_prob: f64,
    #[serde(default)]
    pub wrap: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub reward: RewardSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Pdql,
    Dql,
    Qlearning,
    Pql,
    Vrql,
}

impl LearnerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LearnerKind::Pdql => "pdql",
            LearnerKind::Dql => "dql",
            LearnerKind::Qlearning => "qlearning",
            LearnerKind::Pql => "pql",
            LearnerKind::Vrql => "vrql",
        }
    }
}

/// Batch size used by the globally-unlocking learner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DqlBatch {
    /// Its own published schedule.
    Published,
    /// The same `q` as the locally-unlocking learner.
    Shared,
}

/// One learner with optional per-learner overrides.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    pub name: Option<LearnerKind>,
    /// Identifier in outputs; defaults to the learner name.
    pub label: Option<String>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub budget: Option<u64>,
    pub q: Option<u64>,
    pub unlock_radius: Option<u32>,
    pub rollout_estimate: Option<bool>,
    pub rollout_horizon: Option<u32>,
    pub dql_batch: Option<DqlBatch>,
    pub learning_rate: Option<f64>,
    pub learning_rate_exponent: Option<f64>,
    pub exploration: Option<f64>,
    pub init: Option<f64>,
    pub phase_length: Option<u64>,
    pub phases: Option<u64>,
    pub epochs: Option<u64>,
    pub inner_steps: Option<u64>,
    pub initial_batch: Option<u64>,
    pub batch_growth: Option<f64>,
}

impl LearnerConfig {
    pub fn kind(&self) -> LearnerKind {
        self.name.expect("validated config has learner names")
    }

    pub fn id(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| self.kind().as_str().to_string())
    }
}

/// Fully resolved parameters for one learner on one lattice size.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum ResolvedLearner {
    Pdql(PdqlParams),
    Dql { params: PdqlParams, batch: DqlBatch },
    Qlearning(QLearningParams),
    Pql(PqlParams),
    Vrql(VrqlParams),
}

fn in_unit(name: &str, v: f64) -> Result<(), HarnessError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(HarnessError::Config(format!(
            "{name} = {v} must lie in (0, 1)"
        )))
    }
}

impl ExperimentConfig {
    /// Parses and validates. TOML errors carry line and column.
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let x = &self.experiment;
        in_unit("experiment.epsilon", x.epsilon)?;
        in_unit("experiment.delta", x.delta)?;
        in_unit("experiment.gamma", x.gamma)?;
        if x.seeds.is_empty() {
            return Err(HarnessError::Config(
                "experiment.seeds must not be empty".into(),
            ));
        }
        if !(x.budget_multiplier >= 0.0) {
            return Err(HarnessError::Config(
                "experiment.budget_multiplier must be nonnegative".into(),
            ));
        }
        if x.trace_stride == 0 {
            return Err(HarnessError::Config(
                "experiment.trace_stride must be >= 1".into(),
            ));
        }
        match (&self.env.dims, &self.env.sizes) {
            (Some(_), Some(_)) => {
                return Err(HarnessError::Config(
                    "env: give either dims or sizes, not both".into(),
                ))
            }
            (None, None) => {
                return Err(HarnessError::Config(
                    "env: one of dims or sizes is required".into(),
                ))
            }
            _ => {}
        }
        // Building the lattices checks dims, sizes and rewards.
        let lattices = self.lattices()?;
        for lattice in &lattices {
            crate::env::make_lattice(lattice, x.gamma)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        if self.learners.is_empty() {
            return Err(HarnessError::Config(
                "at least one [[learner]] is required".into(),
            ));
        }
        let mut ids = BTreeSet::new();
        for (i, l) in self.learners.iter().enumerate() {
            if l.name.is_none() {
                return Err(HarnessError::Config(format!(
                    "learner #{} has no name",
                    i + 1
                )));
            }
            let id = l.id();
            if id.is_empty()
                || !id
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
            {
                return Err(HarnessError::Config(format!(
                    "learner label {id:?} must be nonempty ASCII letters, digits, '-' or '_'"
                )));
            }
            if !ids.insert(id) {
                return Err(HarnessError::Config(format!(
                    "duplicate learner id {:?}; set distinct labels",
                    l.id()
                )));
            }
            for lattice in &lattices {
                self.resolve(l, lattice.num_states(), lattice.num_actions())?;
            }
        }
        Ok(())
    }

    /// One lattice per size, in ascending order.
    pub fn lattices(&self) -> Result<Vec<LatticeConfig>, HarnessError> {
        let base = LatticeConfig {
            dims: self.env.dims.clone().unwrap_or_else(|| vec![2]),
            wrap: self.env.wrap,
            slip_prob: self.env.slip_prob,
            reward: self.env.reward.clone(),
            seed: self.env.seed,
        };
        match &self.env.sizes {
            Some(sizes) => {
                let mut sorted = sizes.clone();
                sorted.sort_unstable();
                sorted.dedup();
                size_sweep_configs(&base, &sorted).map_err(|e| HarnessError::Config(e.to_string()))
            }
            None => Ok(vec![base]),
        }
    }

    /// Timestep budget for one cell.
    pub fn cell_budget(&self, learner: &LearnerConfig, states: usize, actions: usize) -> u64 {
        if let Some(b) = learner.budget.or(self.experiment.budget) {
            return b;
        }
        let x = &self.experiment;
        let inputs = BoundInputs {
            epsilon: x.epsilon,
            delta: x.delta,
            gamma: x.gamma,
            states: states as u64,
            actions: actions as u64,
        };
        let raw = x.budget_multiplier * sample_complexity_bound(&inputs).unwrap_or(f64::INFINITY);
        if raw >= u64::MAX as f64 {
            u64::MAX
        } else {
            raw.ceil() as u64
        }
    }

    /// Resolves a learner's parameters for a lattice with `states` states.
    pub fn resolve(
        &self,
        l: &LearnerConfig,
        states: usize,
        actions: usize,
    ) -> Result<ResolvedLearner, HarnessError> {
        let x = &self.experiment;
        let eps = l.epsilon.unwrap_or(x.epsilon);
        let delta = l.delta.unwrap_or(x.delta);
        let budget = self.cell_budget(l, states, actions);
        let id = l.id();
        let bad = |msg: String| HarnessError::Config(format!("learner {id}: {msg}"));
        in_unit("epsilon", eps).map_err(|e| bad(e.to_string()))?;
        in_unit("delta", delta).map_err(|e| bad(e.to_string()))?;
        let kind = l.kind();
        let pdql_only = [
            ("q", l.q.is_some()),
            ("unlock_radius", l.unlock_radius.is_some()),
            ("rollout_estimate", l.rollout_estimate.is_some()),
            ("rollout_horizon", l.rollout_horizon.is_some()),
        ];
        if !matches!(kind, LearnerKind::Pdql | LearnerKind::Dql) {
            if let Some((k, _)) = pdql_only.iter().find(|(_, set)| *set) {
                return Err(bad(format!("`{k}` applies only to pdql and dql")));
            }
        }
        if kind != LearnerKind::Dql && l.dql_batch.is_some() {
            return Err(bad("`dql_batch` applies only to dql".into()));
        }
        let resolved = match kind {
            LearnerKind::Pdql | LearnerKind::Dql => {
                let mut p = default_params(eps, delta, x.gamma, states, actions)
                    .map_err(|e| bad(e.to_string()))?
                    .with_max_timesteps(budget)
                    .with_trace_stride(x.trace_stride);
                let batch = l.dql_batch.unwrap_or(DqlBatch::Published);
                if kind == LearnerKind::Dql && batch == DqlBatch::Published && l.q.is_none() {
                    p.q = dql_batch_size(eps, delta, x.gamma, states, actions);
                }
                if let Some(q) = l.q {
                    p = p.with_q(q);
                }
                if let Some(r) = l.unlock_radius {
                    p = p.with_unlock_radius(r);
                }
                if l.rollout_estimate == Some(true) {
                    let horizon = l.rollout_horizon.unwrap_or(p.rollout_horizon);
                    p = p.with_rollout(horizon);
                } else if let Some(h) = l.rollout_horizon {
                    p.rollout_horizon = h;
                }
                p.validate().map_err(|e| bad(e.to_string()))?;
                if kind == LearnerKind::Pdql {
                    ResolvedLearner::Pdql(p)
                } else {
                    ResolvedLearner::Dql { params: p, batch }
                }
            }
            LearnerKind::Qlearning => {
                let mut p = QLearningParams::new(budget);
                p.trace_stride = x.trace_stride;
                if let Some(c) = l.learning_rate {
                    p.learning_rate = LearningRate::Constant(c);
                } else if let Some(e) = l.learning_rate_exponent {
                    p.learning_rate = LearningRate::Polynomial { exponent: e };
                }
                if let Some(e) = l.exploration {
                    if !(0.0..=1.0).contains(&e) {
                        return Err(bad(format!("exploration {e} outside [0, 1]")));
                    }
                    p.exploration = e;
                }
                p.init = l.init;
                ResolvedLearner::Qlearning(p)
            }
            LearnerKind::Pql => {
                let h = 1.0 - x.gamma;
                let default_len = ((2.0 * (states * actions) as f64 / delta).ln()
                    / (2.0 * eps * eps * h * h))
                    .ceil() as u64;
                let mut p = PqlParams::new(l.phase_length.unwrap_or(default_len.max(1)), budget);
                if p.phase_length == 0 {
                    return Err(bad("phase_length must be >= 1".into()));
                }
                p.phases = l.phases;
                p.init = l.init;
                ResolvedLearner::Pql(p)
            }
            LearnerKind::Vrql => {
                let mut p = VrqlParams::new(budget);
                p.epochs = l.epochs;
                p.inner_steps = l.inner_steps;
                p.initial_batch = l.initial_batch;
                if let Some(g) = l.batch_growth {
                    if !(g >= 1.0) {
                        return Err(bad(format!("batch_growth {g} must be >= 1")));
                    }
                    p.batch_growth = g;
                }
                p.init = l.init;
                ResolvedLearner::Vrql(p)
            }
        };
        Ok(resolved)
    }

    /// Lattice size for the convergence-curve figure: the configured one, or
    /// the size closest to 200.
    pub fn figure_b_size(&self) -> Result<usize, HarnessError> {
        if let Some(s) = self.experiment.figure_b_size {
            return Ok(s);
        }
        let sizes: Vec<usize> = self
            .lattices()?
            .iter()
            .map(LatticeConfig::num_states)
            .collect();
        Ok(*sizes
            .iter()
            .min_by_key(|&&s| (s as i64 - 200).abs())
            .expect("at least one lattice"))
    }
}
