//! Phased Q-learning: synchronous empirical Bellman backups.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    bootstrap_target, check_oracle, q_mean_error, LearnError, RunTrace, Termination, TracePoint,
};
use crate::mdp::{sample_transition, MdpSpec, QTable, ValueTable};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PqlParams {
    /// Samples per pair per phase.
    pub phase_length: u64,
    /// Phases to run; `None` runs until the budget cannot fund another phase.
    pub phases: Option<u64>,
    pub budget: u64,
    /// Initial Q value; `None` means `1 / (1 - γ)`.
    pub init: Option<f64>,
}

impl PqlParams {
    pub fn new(phase_length: u64, budget: u64) -> Self {
        Self {
            phase_length,
            phases: None,
            budget,
            init: None,
        }
    }
}

/// Each phase samples every pair `phase_length` times and replaces Q by the
/// empirical backups of the previous phase's Q. One trace point per phase.
pub fn pql_run(
    spec: &MdpSpec,
    params: &PqlParams,
    oracle: &ValueTable,
    seed: u64,
) -> Result<RunTrace, LearnError> {
    check_oracle(spec, oracle)?;
    if params.phase_length == 0 {
        return Err(LearnError::InvalidParams(
            "phase_length must be >= 1".into(),
        ));
    }
    let (n, na, gamma) = (spec.num_states(), spec.num_actions(), spec.discount());
    let phase_cost = (n * na) as u64 * params.phase_length;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = QTable::new(n, na, params.init.unwrap_or(1.0 / (1.0 - gamma)));
    let mut next_q = q.clone();
    let mut timestep = 0u64;
    let mut phases_done = 0u64;
    let mut points = vec![TracePoint {
        timestep: 0,
        mean_error: q_mean_error(&q, oracle),
        locked_fraction: 0.0,
        updates: 0,
    }];
    let exhausted = loop {
        if params.phases.is_some_and(|k| phases_done >= k) {
            break false;
        }
        if params.budget - timestep < phase_cost {
            break params.phases.is_some();
        }
        for s in 0..n {
            for a in 0..na {
                let mut total = 0.0;
                for _ in 0..params.phase_length {
                    let (next, reward) = sample_transition(spec, s, a, &mut rng);
                    total += bootstrap_target(&q, gamma, reward, next);
                }
                next_q.set(s, a, total / params.phase_length as f64);
            }
        }
        std::mem::swap(&mut q, &mut next_q);
        timestep += phase_cost;
        phases_done += 1;
        points.push(TracePoint {
            timestep,
            mean_error: q_mean_error(&q, oracle),
            locked_fraction: 0.0,
            updates: phases_done * (n * na) as u64,
        });
    };
    let trace = RunTrace {
        points,
        converged_at: None,
        termination: match (exhausted, params.phases) {
            (true, _) => Termination::BudgetExhausted,
            (false, Some(_)) => Termination::Completed,
            (false, None) => Termination::BudgetSpent,
        },
        total_timesteps: timestep,
        attempted_updates: phases_done * (n * na) as u64,
        successful_updates: phases_done * (n * na) as u64,
        final_q: q,
        epoch_increment_variance: Vec::new(),
        config: serde_json::json!({
            "algorithm": "pql",
            "params": params,
            "seed": seed,
        }),
    };
    if exhausted {
        Err(LearnError::BudgetExhausted(Box::new(trace)))
    } else {
        Ok(trace)
    }
}
