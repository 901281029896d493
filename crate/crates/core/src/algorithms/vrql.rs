//! Variance-reduced Q-learning with generative access.
//!
//! Each epoch freezes a reference table `Q̄`, estimates its Bellman backup
//! `T̃(Q̄)` from a batch of `N_e` samples per pair, then runs `K` synchronous
//! recentred steps
//! `Q ← (1-λ_k) Q + λ_k [T̂_k(Q) - T̂_k(Q̄) + T̃(Q̄)]` with
//! `λ_k = 1 / (1 + (1-γ) k)`. Both `T̂_k` terms share one sample per pair.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    bootstrap_target, check_oracle, q_mean_error, sample_variance, LearnError, RunTrace,
    Termination, TracePoint,
};
use crate::mdp::{row_max, sample_transition, MdpSpec, QTable, ValueTable};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VrqlParams {
    /// Epochs to run; `None` runs until the budget cannot fund another.
    pub epochs: Option<u64>,
    /// Inner steps per epoch; `None` means `ceil(2 / (1 - γ))`.
    pub inner_steps: Option<u64>,
    /// Recentring batch of the first epoch; `None` means `ceil(1 / (1 - γ)²)`.
    pub initial_batch: Option<u64>,
    /// Factor by which the recentring batch grows per epoch.
    pub batch_growth: f64,
    pub budget: u64,
    /// Initial Q value; `None` means `1 / (1 - γ)`.
    pub init: Option<f64>,
}

impl VrqlParams {
    pub fn new(budget: u64) -> Self {
        Self {
            epochs: None,
            inner_steps: None,
            initial_batch: None,
            batch_growth: 2.0,
            budget,
            init: None,
        }
    }
}

pub fn vrql_run(
    spec: &MdpSpec,
    params: &VrqlParams,
    oracle: &ValueTable,
    seed: u64,
) -> Result<RunTrace, LearnError> {
    check_oracle(spec, oracle)?;
    if !(params.batch_growth >= 1.0) {
        return Err(LearnError::InvalidParams(format!(
            "batch_growth {} must be >= 1",
            params.batch_growth
        )));
    }
    let (n, na, gamma) = (spec.num_states(), spec.num_actions(), spec.discount());
    let h = 1.0 - gamma;
    let inner = params.inner_steps.unwrap_or((2.0 / h).ceil() as u64);
    let batch0 = params
        .initial_batch
        .unwrap_or((1.0 / (h * h)).ceil() as u64)
        .max(1);
    let pairs = (n * na) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = QTable::new(n, na, params.init.unwrap_or(1.0 / h));
    let mut next_q = q.clone();
    let mut recentred = vec![0.0; n * na];
    let mut increments = Vec::with_capacity(n * na * inner as usize);
    let mut variances = Vec::new();
    let mut timestep = 0u64;
    let mut updates = 0u64;
    let mut epoch = 0u64;
    let mut points = vec![TracePoint {
        timestep: 0,
        mean_error: q_mean_error(&q, oracle),
        locked_fraction: 0.0,
        updates: 0,
    }];
    let exhausted = loop {
        if params.epochs.is_some_and(|k| epoch >= k) {
            break false;
        }
        let batch = (batch0 as f64 * params.batch_growth.powi(epoch as i32)).ceil();
        let cost = pairs as f64 * (batch + inner as f64);
        if cost > (params.budget - timestep) as f64 {
            break params.epochs.is_some();
        }
        let batch = batch as u64;
        let reference = q.clone();
        for s in 0..n {
            for a in 0..na {
                let mut total = 0.0;
                for _ in 0..batch {
                    let (next, reward) = sample_transition(spec, s, a, &mut rng);
                    total += bootstrap_target(&reference, gamma, reward, next);
                }
                recentred[s * na + a] = total / batch as f64;
            }
        }
        timestep += pairs * batch;
        increments.clear();
        for k in 1..=inner {
            let lambda = 1.0 / (1.0 + h * k as f64);
            for s in 0..n {
                for a in 0..na {
                    let (next, _) = sample_transition(spec, s, a, &mut rng);
                    let diff = gamma * (row_max(q.row(next)) - row_max(reference.row(next)));
                    let target = diff + recentred[s * na + a];
                    let old = q.get(s, a);
                    let new = (1.0 - lambda) * old + lambda * target;
                    increments.push(new - old);
                    next_q.set(s, a, new);
                }
            }
            std::mem::swap(&mut q, &mut next_q);
            timestep += pairs;
            updates += pairs;
            points.push(TracePoint {
                timestep,
                mean_error: q_mean_error(&q, oracle),
                locked_fraction: 0.0,
                updates,
            });
        }
        variances.push(sample_variance(&increments));
        epoch += 1;
    };
    let trace = RunTrace {
        points,
        converged_at: None,
        termination: match (exhausted, params.epochs) {
            (true, _) => Termination::BudgetExhausted,
            (false, Some(_)) => Termination::Completed,
            (false, None) => Termination::BudgetSpent,
        },
        total_timesteps: timestep,
        attempted_updates: updates,
        successful_updates: updates,
        final_q: q,
        epoch_increment_variance: variances,
        config: serde_json::json!({
            "algorithm": "vrql",
            "params": params,
            "resolved": { "inner_steps": inner, "initial_batch": batch0 },
            "seed": seed,
        }),
    };
    if exhausted {
        Err(LearnError::BudgetExhausted(Box::new(trace)))
    } else {
        Ok(trace)
    }
}
