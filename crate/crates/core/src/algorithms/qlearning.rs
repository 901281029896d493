//! Tabular Q-learning with uniform state resets and ε-greedy actions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    bootstrap_target, check_oracle, q_mean_error, LearnError, RunTrace, Termination, TracePoint,
    DEFAULT_TRACE_STRIDE,
};
use crate::mdp::{argmax, sample_transition, MdpSpec, QTable, ValueTable};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningRate {
    /// `1 / (1 + n(s,a))^exponent`.
    Polynomial {
        exponent: f64,
    },
    Constant(f64),
}

impl LearningRate {
    #[inline]
    fn at(self, visits: u32) -> f64 {
        match self {
            LearningRate::Polynomial { exponent } => (1.0 + visits as f64).powf(-exponent),
            LearningRate::Constant(c) => c,
        }
    }
}

impl Default for LearningRate {
    fn default() -> Self {
        LearningRate::Polynomial { exponent: 0.8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QLearningParams {
    pub learning_rate: LearningRate,
    /// Probability of a uniformly random action.
    pub exploration: f64,
    pub budget: u64,
    /// Initial Q value; `None` means `1 / (1 - γ)`.
    pub init: Option<f64>,
    pub trace_stride: u64,
}

impl QLearningParams {
    pub fn new(budget: u64) -> Self {
        Self {
            learning_rate: LearningRate::default(),
            exploration: 0.1,
            budget,
            init: None,
            trace_stride: DEFAULT_TRACE_STRIDE,
        }
    }
}

/// Spends the whole budget; each timestep resets to a uniformly random
/// state, picks an ε-greedy action and applies one stochastic backup.
pub fn qlearning_run(
    spec: &MdpSpec,
    params: &QLearningParams,
    oracle: &ValueTable,
    seed: u64,
) -> Result<RunTrace, LearnError> {
    check_oracle(spec, oracle)?;
    if !(0.0..=1.0).contains(&params.exploration) {
        return Err(LearnError::InvalidParams(format!(
            "exploration {} outside [0, 1]",
            params.exploration
        )));
    }
    if params.trace_stride == 0 {
        return Err(LearnError::InvalidParams(
            "trace_stride must be >= 1".into(),
        ));
    }
    let (n, na, gamma) = (spec.num_states(), spec.num_actions(), spec.discount());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = QTable::new(n, na, params.init.unwrap_or(1.0 / (1.0 - gamma)));
    let mut visits = vec![0u32; n * na];
    let point = |t: u64, q: &QTable| TracePoint {
        timestep: t,
        mean_error: q_mean_error(q, oracle),
        locked_fraction: 0.0,
        updates: t,
    };
    let mut points = vec![point(0, &q)];
    for t in 1..=params.budget {
        let s = rng.random_range(0..n);
        let a = if rng.random::<f64>() < params.exploration {
            rng.random_range(0..na)
        } else {
            argmax(q.row(s))
        };
        let (next, reward) = sample_transition(spec, s, a, &mut rng);
        let target = bootstrap_target(&q, gamma, reward, next);
        let idx = s * na + a;
        let alpha = params.learning_rate.at(visits[idx]);
        visits[idx] = visits[idx].saturating_add(1);
        let old = q.get(s, a);
        q.set(s, a, old + alpha * (target - old));
        if t % params.trace_stride == 0 {
            points.push(point(t, &q));
        }
    }
    if points.last().map(|p| p.timestep) != Some(params.budget) {
        points.push(point(params.budget, &q));
    }
    Ok(RunTrace {
        points,
        converged_at: None,
        termination: Termination::BudgetSpent,
        total_timesteps: params.budget,
        attempted_updates: params.budget,
        successful_updates: params.budget,
        final_q: q,
        epoch_increment_variance: Vec::new(),
        config: serde_json::json!({
            "algorithm": "qlearning",
            "params": params,
            "seed": seed,
        }),
    })
}
