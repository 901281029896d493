//! Probabilistic delayed Q-learning and its globally-unlocking ancestor.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    bootstrap_target, check_oracle, check_unit, q_mean_error, LearnError, RunTrace, Termination,
    TracePoint, DEFAULT_TRACE_STRIDE,
};
use crate::bounds::{q_lower_bound, sample_complexity_bound, BoundInputs};
use crate::graph::{BallScratch, UnitGraph};
use crate::mdp::{argmax, sample_transition, DistanceOracle, MdpSpec, QTable, ValueTable};
use crate::submdp::truncation_radius;
use crate::util::ceil_tol;

/// Which pairs a successful update re-opens.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnlockScope {
    /// Pairs at states within the unlock radius.
    Local,
    /// Every pair.
    Global,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdqlParams {
    pub epsilon: f64,
    pub delta: f64,
    pub gamma: f64,
    /// Samples per attempted update.
    pub q: u64,
    pub unlock_radius: u32,
    pub max_timesteps: u64,
    pub trace_stride: u64,
    /// Replace the bootstrapped successor value with a greedy rollout of
    /// `rollout_horizon` steps, each step costing a timestep.
    pub rollout_estimate: bool,
    pub rollout_horizon: u32,
    pub q_overridden: bool,
    pub unlock_radius_overridden: bool,
}

impl PdqlParams {
    pub fn with_q(mut self, q: u64) -> Self {
        self.q = q;
        self.q_overridden = true;
        self
    }

    pub fn with_unlock_radius(mut self, radius: u32) -> Self {
        self.unlock_radius = radius;
        self.unlock_radius_overridden = true;
        self
    }

    pub fn with_max_timesteps(mut self, max: u64) -> Self {
        self.max_timesteps = max;
        self
    }

    pub fn with_trace_stride(mut self, stride: u64) -> Self {
        self.trace_stride = stride;
        self
    }

    pub fn with_rollout(mut self, horizon: u32) -> Self {
        self.rollout_estimate = true;
        self.rollout_horizon = horizon;
        self
    }

    /// Successful updates any single pair can receive.
    pub fn update_ceiling(&self) -> u64 {
        ceil_tol(1.0 / (self.epsilon * (1.0 - self.gamma))) as u64
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        check_unit("epsilon", self.epsilon)?;
        check_unit("delta", self.delta)?;
        check_unit("gamma", self.gamma)?;
        if self.q == 0 || self.q > u32::MAX as u64 {
            return Err(LearnError::InvalidParams(format!(
                "q = {} outside [1, 2^32)",
                self.q
            )));
        }
        if self.unlock_radius == 0 {
            return Err(LearnError::InvalidParams(
                "unlock_radius must be >= 1".into(),
            ));
        }
        if self.trace_stride == 0 {
            return Err(LearnError::InvalidParams(
                "trace_stride must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Parameters derived from the bounds: `q` from the concentration bound,
/// the unlock radius from the truncation horizon and a timestep cap of
/// `multiplier` times the overall sample-complexity bound.
pub fn default_params(
    epsilon: f64,
    delta: f64,
    gamma: f64,
    states: usize,
    actions: usize,
) -> Result<PdqlParams, LearnError> {
    default_params_with_multiplier(epsilon, delta, gamma, states, actions, 1.0)
}

pub fn default_params_with_multiplier(
    epsilon: f64,
    delta: f64,
    gamma: f64,
    states: usize,
    actions: usize,
    multiplier: f64,
) -> Result<PdqlParams, LearnError> {
    let inputs = BoundInputs::new(epsilon, delta, gamma, states as u64, actions as u64)
        .map_err(|e| LearnError::InvalidParams(e.to_string()))?;
    let q = q_lower_bound(&inputs).expect("inputs checked").value;
    let radius = truncation_radius(epsilon, gamma).expect("inputs checked");
    if !(multiplier >= 0.0) {
        return Err(LearnError::InvalidParams(format!(
            "budget multiplier {multiplier} must be nonnegative"
        )));
    }
    let cap = multiplier * sample_complexity_bound(&inputs).expect("inputs checked");
    let max_timesteps = if cap >= u64::MAX as f64 {
        u64::MAX
    } else {
        cap.ceil() as u64
    };
    Ok(PdqlParams {
        epsilon,
        delta,
        gamma,
        q,
        unlock_radius: radius,
        max_timesteps,
        trace_stride: DEFAULT_TRACE_STRIDE,
        rollout_estimate: false,
        rollout_horizon: radius,
        q_overridden: false,
        unlock_radius_overridden: false,
    })
}

/// Batch size of the original delayed Q-learning analysis:
/// `ln(3SA(1 + SA/(ε(1-γ)))/δ) / (2ε²(1-γ)²)`.
pub fn dql_batch_size(epsilon: f64, delta: f64, gamma: f64, states: usize, actions: usize) -> u64 {
    let sa = (states * actions) as f64;
    let h = 1.0 - gamma;
    let m =
        (3.0 * sa * (1.0 + sa / (epsilon * h)) / delta).ln() / (2.0 * epsilon * epsilon * h * h);
    ceil_tol(m).max(1.0) as u64
}

/// Learner state declared by the algorithm: `Q`, the batch accumulator `U`,
/// the batch counter `C` and the per-pair unlock flag.
#[derive(Clone, Debug)]
pub struct PdqlState {
    pub q_values: QTable,
    pub accumulator: Vec<f64>,
    pub visits: Vec<u32>,
    pub unlocked: Vec<bool>,
    pub timestep: u64,
    rng: ChaCha8Rng,
}

impl PdqlState {
    fn new(states: usize, actions: usize, gamma: f64, seed: u64) -> Self {
        let n = states * actions;
        Self {
            q_values: QTable::new(states, actions, 1.0 / (1.0 - gamma)),
            accumulator: vec![0.0; n],
            visits: vec![0; n],
            unlocked: vec![true; n],
            timestep: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MemoryFootprint {
    /// Stored scalars and flags.
    pub entries: usize,
    /// Allocated capacity in the same units.
    pub capacity: usize,
    pub breakdown: Vec<(String, usize)>,
    /// Coefficients `c, c'` of `entries = c·S·A + c'·S`.
    pub per_pair: usize,
    pub per_state: usize,
}

pub fn memory_footprint(state: &PdqlState) -> MemoryFootprint {
    let breakdown = vec![
        ("q_values".to_string(), state.q_values.values().len()),
        ("accumulator".to_string(), state.accumulator.len()),
        ("visits".to_string(), state.visits.len()),
        ("unlocked".to_string(), state.unlocked.len()),
    ];
    let capacity = state.q_values.values().len()
        + state.accumulator.capacity()
        + state.visits.capacity()
        + state.unlocked.capacity();
    MemoryFootprint {
        entries: breakdown.iter().map(|(_, n)| n).sum(),
        capacity,
        breakdown,
        per_pair: 4,
        per_state: 0,
    }
}

/// Instrumentation hooks, called synchronously from the learner loop.
pub trait PdqlObserver {
    fn on_update(&mut self, _s: usize, _a: usize, _old: f64, _new: f64, _timestep: u64) {}
    fn on_lock(&mut self, _s: usize, _a: usize, _timestep: u64) {}
    /// `states` are the states whose pairs were re-opened around `center`.
    fn on_unlock(&mut self, _center: usize, _states: &[usize], _timestep: u64) {}
}

pub struct NoopObserver;

impl PdqlObserver for NoopObserver {}

/// Checks the update ceiling, per-update descent and unlock locality.
/// Distances come from the MDP's metric, not from the learner's BFS.
pub struct PdqlAudit<'a> {
    epsilon: f64,
    radius: u32,
    scope: UnlockScope,
    ceiling: u64,
    distances: DistanceOracle<'a>,
    num_states: usize,
    num_actions: usize,
    update_counts: Vec<u64>,
    pub updates: u64,
    pub locks: u64,
    pub unlock_events: u64,
    pub ceiling_violations: u64,
    pub descent_violations: u64,
    pub unlock_violations: u64,
}

impl<'a> PdqlAudit<'a> {
    pub fn new(spec: &'a MdpSpec, params: &PdqlParams, scope: UnlockScope) -> Self {
        Self {
            epsilon: params.epsilon,
            radius: params.unlock_radius,
            scope,
            ceiling: params.update_ceiling(),
            distances: DistanceOracle::new(spec),
            num_states: spec.num_states(),
            num_actions: spec.num_actions(),
            update_counts: vec![0; spec.num_states() * spec.num_actions()],
            updates: 0,
            locks: 0,
            unlock_events: 0,
            ceiling_violations: 0,
            descent_violations: 0,
            unlock_violations: 0,
        }
    }

    pub fn max_update_count(&self) -> u64 {
        self.update_counts.iter().copied().max().unwrap_or(0)
    }

    pub fn ceiling(&self) -> u64 {
        self.ceiling
    }

    pub fn violations(&self) -> u64 {
        self.ceiling_violations + self.descent_violations + self.unlock_violations
    }
}

impl PdqlObserver for PdqlAudit<'_> {
    fn on_update(&mut self, s: usize, a: usize, old: f64, new: f64, _timestep: u64) {
        self.updates += 1;
        let count = &mut self.update_counts[s * self.num_actions + a];
        *count += 1;
        if *count > self.ceiling {
            self.ceiling_violations += 1;
        }
        if old - new < self.epsilon * (1.0 - 1e-9) {
            self.descent_violations += 1;
        }
    }

    fn on_lock(&mut self, _s: usize, _a: usize, _timestep: u64) {
        self.locks += 1;
    }

    fn on_unlock(&mut self, center: usize, states: &[usize], _timestep: u64) {
        self.unlock_events += 1;
        let expected: Vec<usize> = match self.scope {
            UnlockScope::Global => (0..self.num_states).collect(),
            UnlockScope::Local => (0..self.num_states)
                .filter(|&t| self.distances.distance(center, t) < self.radius as f64)
                .collect(),
        };
        let mut got = states.to_vec();
        got.sort_unstable();
        if got != expected {
            self.unlock_violations += 1;
        }
    }
}

/// Outcome of a single generative sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Sampled,
    AllLocked,
    BudgetExhausted,
}

/// Step-wise PDQL/DQL engine. The scheduler index (active-state bitset and
/// per-state open counts) lives here, outside the declared learner state.
pub struct PdqlRunner<'a> {
    spec: &'a MdpSpec,
    oracle: &'a ValueTable,
    params: PdqlParams,
    scope: UnlockScope,
    seed: u64,
    state: PdqlState,
    graph: UnitGraph,
    scratch: BallScratch,
    ball: Vec<(usize, u32)>,
    reopened: Vec<usize>,
    open_per_state: Vec<u32>,
    active: Vec<u64>,
    open_pairs: usize,
    cursor: usize,
    attempted: u64,
    successful: u64,
    points: Vec<TracePoint>,
}

impl<'a> PdqlRunner<'a> {
    pub fn new(
        spec: &'a MdpSpec,
        params: &PdqlParams,
        scope: UnlockScope,
        oracle: &'a ValueTable,
        seed: u64,
    ) -> Result<Self, LearnError> {
        params.validate()?;
        check_oracle(spec, oracle)?;
        if (params.gamma - spec.discount()).abs() > 1e-12 {
            return Err(LearnError::InvalidParams(format!(
                "gamma {} differs from the MDP discount {}",
                params.gamma,
                spec.discount()
            )));
        }
        let (n, na) = (spec.num_states(), spec.num_actions());
        let mut active = vec![0u64; n.div_ceil(64)];
        for s in 0..n {
            active[s / 64] |= 1 << (s % 64);
        }
        let mut runner = Self {
            spec,
            oracle,
            params: params.clone(),
            scope,
            seed,
            state: PdqlState::new(n, na, spec.discount(), seed),
            graph: UnitGraph::from_spec(spec),
            scratch: BallScratch::new(n),
            ball: Vec::new(),
            reopened: Vec::with_capacity(n),
            open_per_state: vec![na as u32; n],
            active,
            open_pairs: n * na,
            cursor: 0,
            attempted: 0,
            successful: 0,
            points: Vec::new(),
        };
        runner.record();
        Ok(runner)
    }

    pub fn state(&self) -> &PdqlState {
        &self.state
    }

    pub fn open_pairs(&self) -> usize {
        self.open_pairs
    }

    fn locked_fraction(&self) -> f64 {
        1.0 - self.open_pairs as f64 / self.state.unlocked.len() as f64
    }

    fn record(&mut self) {
        let point = TracePoint {
            timestep: self.state.timestep,
            mean_error: q_mean_error(&self.state.q_values, self.oracle),
            locked_fraction: self.locked_fraction(),
            updates: self.successful,
        };
        match self.points.last_mut() {
            Some(last) if last.timestep == point.timestep => *last = point,
            _ => self.points.push(point),
        }
    }

    /// First state at or after the cursor with an open pair, wrapping.
    fn next_active_state(&self) -> usize {
        let words = self.active.len();
        let start = self.cursor / 64;
        let first = self.active[start] & (!0u64 << (self.cursor % 64));
        if first != 0 {
            return start * 64 + first.trailing_zeros() as usize;
        }
        for i in 1..=words {
            let w = (start + i) % words;
            if self.active[w] != 0 {
                return w * 64 + self.active[w].trailing_zeros() as usize;
            }
        }
        unreachable!("called with at least one open pair")
    }

    fn lock(&mut self, s: usize, a: usize) {
        let na = self.spec.num_actions();
        self.state.unlocked[s * na + a] = false;
        self.open_pairs -= 1;
        self.open_per_state[s] -= 1;
        if self.open_per_state[s] == 0 {
            self.active[s / 64] &= !(1 << (s % 64));
        }
    }

    fn reopen_state(&mut self, t: usize) {
        let na = self.spec.num_actions();
        for flag in &mut self.state.unlocked[t * na..(t + 1) * na] {
            if !*flag {
                *flag = true;
                self.open_pairs += 1;
                self.open_per_state[t] += 1;
            }
        }
        self.active[t / 64] |= 1 << (t % 64);
    }

    fn unlock_around(&mut self, s: usize, obs: &mut dyn PdqlObserver) {
        self.reopened.clear();
        match self.scope {
            UnlockScope::Global => self.reopened.extend(0..self.spec.num_states()),
            UnlockScope::Local => {
                self.scratch.ball_into(
                    &self.graph,
                    s,
                    self.params.unlock_radius - 1,
                    &mut self.ball,
                );
                self.reopened.extend(self.ball.iter().map(|&(t, _)| t));
            }
        }
        for i in 0..self.reopened.len() {
            self.reopen_state(self.reopened[i]);
        }
        obs.on_unlock(s, &self.reopened, self.state.timestep);
    }

    /// Greedy rollout value `Σ_{i<H} γ^i r_i` from `start`. Returns `None`
    /// when the budget runs out mid-rollout.
    fn rollout(&mut self, start: usize) -> Option<f64> {
        let gamma = self.spec.discount();
        let mut s = start;
        let mut total = 0.0;
        let mut weight = 1.0;
        for _ in 0..self.params.rollout_horizon {
            if self.state.timestep >= self.params.max_timesteps {
                return None;
            }
            let a = argmax(self.state.q_values.row(s));
            let (next, r) = sample_transition(self.spec, s, a, &mut self.state.rng);
            self.state.timestep += 1;
            total += weight * r;
            weight *= gamma;
            s = next;
        }
        Some(total)
    }

    pub fn step(&mut self, obs: &mut dyn PdqlObserver) -> StepOutcome {
        if self.open_pairs == 0 {
            return StepOutcome::AllLocked;
        }
        if self.state.timestep >= self.params.max_timesteps {
            return StepOutcome::BudgetExhausted;
        }
        let na = self.spec.num_actions();
        let gamma = self.spec.discount();
        let s = self.next_active_state();
        self.cursor = if s + 1 == self.spec.num_states() {
            0
        } else {
            s + 1
        };

        let row = self.state.q_values.row(s);
        let open = &self.state.unlocked[s * na..(s + 1) * na];
        let mut a = usize::MAX;
        for i in 0..na {
            if open[i] && (a == usize::MAX || row[i] > row[a]) {
                a = i;
            }
        }

        let (next, reward) = sample_transition(self.spec, s, a, &mut self.state.rng);
        self.state.timestep += 1;
        let target = if self.params.rollout_estimate {
            match self.rollout(next) {
                Some(v) => reward + gamma * v,
                None => return StepOutcome::BudgetExhausted,
            }
        } else {
            bootstrap_target(&self.state.q_values, gamma, reward, next)
        };

        let idx = s * na + a;
        self.state.accumulator[idx] += target;
        self.state.visits[idx] += 1;
        if self.state.visits[idx] as u64 == self.params.q {
            self.attempted += 1;
            let estimate = self.state.accumulator[idx] / self.params.q as f64;
            let old = self.state.q_values.get(s, a);
            if old - estimate >= 2.0 * self.params.epsilon {
                let new = estimate + self.params.epsilon;
                self.state.q_values.set(s, a, new);
                self.successful += 1;
                obs.on_update(s, a, old, new, self.state.timestep);
                self.unlock_around(s, obs);
            } else {
                self.lock(s, a);
                obs.on_lock(s, a, self.state.timestep);
            }
            self.state.accumulator[idx] = 0.0;
            self.state.visits[idx] = 0;
        }
        if self.state.timestep.is_multiple_of(self.params.trace_stride) {
            self.record();
        }
        StepOutcome::Sampled
    }

    /// Runs until all pairs are locked or the budget is spent.
    pub fn run(mut self, obs: &mut dyn PdqlObserver) -> Result<RunTrace, LearnError> {
        let outcome = loop {
            match self.step(obs) {
                StepOutcome::Sampled => {}
                done => break done,
            }
        };
        self.record();
        let locked = outcome == StepOutcome::AllLocked;
        let trace = RunTrace {
            converged_at: locked.then_some(self.state.timestep),
            termination: if locked {
                Termination::AllLocked
            } else {
                Termination::BudgetExhausted
            },
            total_timesteps: self.state.timestep,
            attempted_updates: self.attempted,
            successful_updates: self.successful,
            epoch_increment_variance: Vec::new(),
            config: serde_json::json!({
                "algorithm": match self.scope {
                    UnlockScope::Local => "pdql",
                    UnlockScope::Global => "dql",
                },
                "unlock_scope": self.scope,
                "params": self.params,
                "seed": self.seed,
            }),
            final_q: self.state.q_values,
            points: self.points,
        };
        if locked {
            Ok(trace)
        } else {
            Err(LearnError::BudgetExhausted(Box::new(trace)))
        }
    }
}

pub fn pdql_run(
    spec: &MdpSpec,
    params: &PdqlParams,
    oracle: &ValueTable,
    seed: u64,
) -> Result<RunTrace, LearnError> {
    pdql_run_observed(
        spec,
        params,
        UnlockScope::Local,
        oracle,
        seed,
        &mut NoopObserver,
    )
}

/// Same engine, but a successful update re-opens every pair.
pub fn dql_run(
    spec: &MdpSpec,
    params: &PdqlParams,
    oracle: &ValueTable,
    seed: u64,
) -> Result<RunTrace, LearnError> {
    pdql_run_observed(
        spec,
        params,
        UnlockScope::Global,
        oracle,
        seed,
        &mut NoopObserver,
    )
}

pub fn pdql_run_observed(
    spec: &MdpSpec,
    params: &PdqlParams,
    scope: UnlockScope,
    oracle: &ValueTable,
    seed: u64,
    obs: &mut dyn PdqlObserver,
) -> Result<RunTrace, LearnError> {
    PdqlRunner::new(spec, params, scope, oracle, seed)?.run(obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{value_iteration, Metric};

    fn single_state(reward: f64, gamma: f64) -> MdpSpec {
        MdpSpec::new(
            1,
            1,
            gamma,
            vec![vec![reward]],
            vec![vec![(1.0, 0)]],
            Metric::Hops,
        )
        .unwrap()
    }

    fn params(epsilon: f64, gamma: f64, q: u64) -> PdqlParams {
        default_params(epsilon, 0.1, gamma, 1, 1)
            .unwrap()
            .with_q(q)
            .with_max_timesteps(10_000_000)
            .with_trace_stride(1)
    }

    #[test]
    fn optimistic_initialisation() {
        let spec = single_state(0.0, 0.9);
        let oracle = ValueTable(vec![0.0]);
        let runner =
            PdqlRunner::new(&spec, &params(0.01, 0.9, 5), UnlockScope::Local, &oracle, 0).unwrap();
        assert!((runner.state().q_values.get(0, 0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_reward_chain_terminates_under_ceiling() {
        let spec = single_state(0.0, 0.9);
        let p = params(0.1, 0.9, 3);
        let oracle = ValueTable(vec![0.0]);
        let mut audit = PdqlAudit::new(&spec, &p, UnlockScope::Local);
        let trace =
            pdql_run_observed(&spec, &p, UnlockScope::Local, &oracle, 1, &mut audit).unwrap();
        assert_eq!(trace.termination, Termination::AllLocked);
        assert!(trace.successful_updates <= p.update_ceiling());
        assert_eq!(audit.violations(), 0);
        assert!(trace.final_q.get(0, 0) < 2.0 * 0.1 / (1.0 - 0.9) + 1e-9);
    }

    #[test]
    fn hand_traced_update_and_lock() {
        // Q = 10, q = 5, constant target 8: 10 - 8 >= 0.02 so Q becomes 8.01.
        let spec = single_state(8.0, 0.0001);
        let p = params(0.01, 0.0001, 5);
        let oracle = ValueTable(vec![8.0]);
        let mut runner = PdqlRunner::new(&spec, &p, UnlockScope::Local, &oracle, 0).unwrap();
        runner.state.q_values.set(0, 0, 10.0);
        for _ in 0..5 {
            runner.step(&mut NoopObserver);
        }
        let q = runner.state().q_values.get(0, 0);
        let target = 8.0 + 0.0001 * 10.0;
        assert!((q - (target + 0.01)).abs() < 1e-12, "{q}");
        // Next batch estimates ≈ 8.0008; the gap ≈ 0.0102 < 0.02 locks.
        for _ in 0..5 {
            runner.step(&mut NoopObserver);
        }
        assert!(!runner.state().unlocked[0]);
        assert_eq!(runner.step(&mut NoopObserver), StepOutcome::AllLocked);
    }

    #[test]
    fn budget_exhaustion_returns_partial_trace() {
        let spec = single_state(0.0, 0.9);
        let p = params(0.01, 0.9, 1000).with_max_timesteps(50);
        let err = pdql_run(&spec, &p, &ValueTable(vec![0.0]), 0).unwrap_err();
        let trace = err.partial_trace().unwrap();
        assert_eq!(trace.total_timesteps, 50);
        assert_eq!(trace.converged_at, None);
    }

    #[test]
    fn global_unlock_reopens_everything() {
        let cfg = crate::env::LatticeConfig::new(vec![10, 10]);
        let spec = crate::env::make_lattice(&cfg, 0.5).unwrap();
        let (oracle, _) = value_iteration(&spec, 1e-10).unwrap();
        let p = default_params(0.1, 0.1, 0.5, 100, 4)
            .unwrap()
            .with_q(20)
            .with_trace_stride(1);
        let mut runner = PdqlRunner::new(&spec, &p, UnlockScope::Global, &oracle, 3).unwrap();
        let mut saw_reopen = false;
        let mut prev_updates = 0;
        while runner.step(&mut NoopObserver) == StepOutcome::Sampled {
            if runner.successful > prev_updates {
                prev_updates = runner.successful;
                assert_eq!(runner.open_pairs(), 400);
                saw_reopen = true;
            }
        }
        assert!(saw_reopen);
    }

    #[test]
    fn footprint_counts_four_per_pair() {
        let cfg = crate::env::LatticeConfig::new(vec![10, 10]);
        let spec = crate::env::make_lattice(&cfg, 0.9).unwrap();
        let oracle = ValueTable(vec![0.0; 100]);
        let p = default_params(0.1, 0.1, 0.9, 100, 4).unwrap();
        let runner = PdqlRunner::new(&spec, &p, UnlockScope::Local, &oracle, 0).unwrap();
        assert_eq!(memory_footprint(runner.state()).entries, 1600);
    }

    #[test]
    fn dql_batch_size_is_larger_than_one() {
        assert!(dql_batch_size(0.1, 0.1, 0.9, 100, 4) > 1000);
    }
}
