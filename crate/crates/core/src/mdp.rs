//! Tabular MDP model, validation and exact oracles.

use std::collections::HashMap;
use std::fmt;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::UnitGraph;

/// Absolute tolerance on transition-row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Exhaustive metric checks are used up to this many states.
pub const EXHAUSTIVE_METRIC_LIMIT: usize = 256;

#[derive(Debug, Error)]
pub enum MdpError {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("validation failed: {}", .0.violations().join(", "))]
    ValidationFailure(ValidationReport),
    #[error(
        "value iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed MDP document: {0}")]
    Json(#[from] serde_json::Error),
}

/// Distance function attached to a state space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Metric {
    /// Manhattan distance on a lattice; axis 0 varies fastest in the state
    /// index. With `wrap` every axis is a ring.
    Lattice { dims: Vec<usize>, wrap: bool },
    /// Hop distance on the undirected graph of nonzero-probability
    /// transitions.
    Hops,
}

impl Metric {
    pub fn lattice_coords(dims: &[usize], mut state: usize) -> Vec<usize> {
        dims.iter()
            .map(|&d| {
                let c = state % d;
                state /= d;
                c
            })
            .collect()
    }

    pub fn lattice_index(dims: &[usize], coords: &[usize]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (&c, &d) in coords.iter().zip(dims) {
            idx += c * stride;
            stride *= d;
        }
        idx
    }

    fn lattice_distance(dims: &[usize], wrap: bool, mut a: usize, mut b: usize) -> f64 {
        let mut total = 0usize;
        for &d in dims {
            let (ca, cb) = (a % d, b % d);
            a /= d;
            b /= d;
            let diff = ca.abs_diff(cb);
            total += if wrap { diff.min(d - diff) } else { diff };
        }
        total as f64
    }
}

/// A full tabular MDP with an attached distance metric.
///
/// Transitions are stored as compressed successor lists: row `s * A + a`
/// holds the `(next_state, probability)` support of `T(. | s, a)`.
#[derive(Clone, Debug)]
pub struct MdpSpec {
    num_states: usize,
    num_actions: usize,
    discount: f64,
    rewards: Vec<f64>,
    row_offsets: Vec<usize>,
    successors: Vec<usize>,
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
    metric: Metric,
}

impl MdpSpec {
    /// Builds a spec from per-state reward rows and per-(state, action)
    /// successor lists. Only structure is checked here; distribution and
    /// metric invariants are the job of [`validate_mdp`].
    pub fn new(
        num_states: usize,
        num_actions: usize,
        discount: f64,
        rewards: Vec<Vec<f64>>,
        transitions: Vec<Vec<(f64, usize)>>,
        metric: Metric,
    ) -> Result<Self, MdpError> {
        if num_states == 0 || num_actions == 0 {
            return Err(MdpError::Structural(
                "num_states and num_actions must be positive".into(),
            ));
        }
        if !(discount > 0.0 && discount < 1.0) {
            return Err(MdpError::Structural(format!(
                "discount {discount} outside (0, 1)"
            )));
        }
        if rewards.len() != num_states {
            return Err(MdpError::Structural(format!(
                "rewards has {} rows, expected {num_states}",
                rewards.len()
            )));
        }
        if let Some((s, row)) = rewards
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != num_actions)
        {
            return Err(MdpError::Structural(format!(
                "reward row {s} has {} entries, expected {num_actions}",
                row.len()
            )));
        }
        let rows = num_states * num_actions;
        if transitions.len() != rows {
            return Err(MdpError::Structural(format!(
                "transitions has {} rows, expected {rows}",
                transitions.len()
            )));
        }
        if let Metric::Lattice { dims, .. } = &metric {
            let product: usize = dims.iter().product();
            if dims.is_empty() || product != num_states {
                return Err(MdpError::Structural(format!(
                    "lattice dims {dims:?} do not multiply to {num_states}"
                )));
            }
        }

        let mut row_offsets = Vec::with_capacity(rows + 1);
        let mut successors = Vec::new();
        let mut probabilities = Vec::new();
        let mut cumulative = Vec::new();
        row_offsets.push(0);
        for (row, entries) in transitions.iter().enumerate() {
            if entries.is_empty() {
                return Err(MdpError::Structural(format!(
                    "transition row {row} is empty"
                )));
            }
            let mut acc = 0.0;
            for &(p, next) in entries {
                if next >= num_states {
                    return Err(MdpError::Structural(format!(
                        "transition row {row} targets state {next} >= {num_states}"
                    )));
                }
                acc += p;
                successors.push(next);
                probabilities.push(p);
                cumulative.push(acc);
            }
            row_offsets.push(successors.len());
        }

        Ok(Self {
            num_states,
            num_actions,
            discount,
            rewards: rewards.into_iter().flatten().collect(),
            row_offsets,
            successors,
            probabilities,
            cumulative,
            metric,
        })
    }

    #[inline]
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    #[inline]
    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    #[inline]
    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.rewards[s * self.num_actions + a]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    /// Support of `T(. | s, a)` as parallel slices `(next_states, probabilities)`.
    #[inline]
    pub fn row(&self, s: usize, a: usize) -> (&[usize], &[f64]) {
        let r = s * self.num_actions + a;
        let (lo, hi) = (self.row_offsets[r], self.row_offsets[r + 1]);
        (&self.successors[lo..hi], &self.probabilities[lo..hi])
    }

    pub fn with_discount(&self, discount: f64) -> Result<Self, MdpError> {
        if !(discount > 0.0 && discount < 1.0) {
            return Err(MdpError::Structural(format!(
                "discount {discount} outside (0, 1)"
            )));
        }
        Ok(Self {
            discount,
            ..self.clone()
        })
    }

    pub(crate) fn with_rewards(&self, rewards: Vec<f64>) -> Self {
        debug_assert_eq!(rewards.len(), self.rewards.len());
        Self {
            rewards,
            ..self.clone()
        }
    }

    /// Distance between two states under the attached metric. `Hops` runs a
    /// BFS; use [`DistanceOracle`] for repeated queries.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        match &self.metric {
            Metric::Lattice { dims, wrap } => Metric::lattice_distance(dims, *wrap, a, b),
            Metric::Hops => {
                let d = UnitGraph::from_spec(self).distances_from(a)[b];
                if d == u32::MAX {
                    f64::INFINITY
                } else {
                    d as f64
                }
            }
        }
    }

    /// Per-(state, action) rewards as nested rows.
    pub fn reward_rows(&self) -> Vec<Vec<f64>> {
        self.rewards
            .chunks(self.num_actions)
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn transition_rows(&self) -> Vec<Vec<(f64, usize)>> {
        (0..self.num_states * self.num_actions)
            .map(|r| {
                let (lo, hi) = (self.row_offsets[r], self.row_offsets[r + 1]);
                (lo..hi)
                    .map(|i| (self.probabilities[i], self.successors[i]))
                    .collect()
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MdpDocument::from(self)).expect("MDP document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MdpError> {
        let doc: MdpDocument = serde_json::from_str(text)?;
        doc.into_spec()
    }
}

/// On-disk JSON form of an [`MdpSpec`]. Field order is fixed so documents
/// are byte-stable. Transition rows are ordered state-major: row
/// `s * num_actions + a`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MdpDocument {
    pub num_states: usize,
    pub num_actions: usize,
    pub discount: f64,
    pub rewards: Vec<Vec<f64>>,
    pub transitions: Vec<Vec<(f64, usize)>>,
    pub metric: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub lattice_wrap: bool,
}

impl From<&MdpSpec> for MdpDocument {
    fn from(spec: &MdpSpec) -> Self {
        let (metric, lattice_dims, lattice_wrap) = match &spec.metric {
            Metric::Lattice { dims, wrap } => ("lattice".to_string(), Some(dims.clone()), *wrap),
            Metric::Hops => ("hops".to_string(), None, false),
        };
        Self {
            num_states: spec.num_states,
            num_actions: spec.num_actions,
            discount: spec.discount,
            rewards: spec.reward_rows(),
            transitions: spec.transition_rows(),
            metric,
            lattice_dims,
            lattice_wrap,
        }
    }
}

impl MdpDocument {
    pub fn into_spec(self) -> Result<MdpSpec, MdpError> {
        let metric = match self.metric.as_str() {
            "lattice" => Metric::Lattice {
                dims: self.lattice_dims.ok_or_else(|| {
                    MdpError::Structural("metric \"lattice\" requires lattice_dims".into())
                })?,
                wrap: self.lattice_wrap,
            },
            "hops" => Metric::Hops,
            other => {
                return Err(MdpError::Structural(format!("unknown metric {other:?}")));
            }
        };
        MdpSpec::new(
            self.num_states,
            self.num_actions,
            self.discount,
            self.rewards,
            self.transitions,
            metric,
        )
    }
}

/// Dense `(state, action)` value storage.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    num_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(num_states: usize, num_actions: usize, init: f64) -> Self {
        Self {
            num_actions,
            values: vec![init; num_states * num_actions],
        }
    }

    pub fn from_values(num_actions: usize, values: Vec<f64>) -> Self {
        assert!(num_actions > 0 && values.len().is_multiple_of(num_actions));
        Self {
            num_actions,
            values,
        }
    }

    pub fn num_states(&self) -> usize {
        self.values.len() / self.num_actions
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.num_actions + a]
    }

    #[inline]
    pub fn set(&mut self, s: usize, a: usize, v: f64) {
        self.values[s * self.num_actions + a] = v;
    }

    #[inline]
    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn state_values(&self) -> ValueTable {
        ValueTable(self.values.chunks(self.num_actions).map(row_max).collect())
    }
}

/// Dense per-state values.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable(pub Vec<f64>);

impl ValueTable {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// One action index per state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Policy(pub Vec<usize>);

#[inline]
pub(crate) fn row_max(row: &[f64]) -> f64 {
    row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Index of the largest entry; ties go to the lowest index.
#[inline]
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MetricCoverage {
    Exhaustive,
    Sampled { triples: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub metric_coverage: MetricCoverage,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn violations(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.clone())
            .collect()
    }

    pub fn is_violated(&self, name: &str) -> bool {
        self.checks.iter().any(|c| c.name == name && !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            writeln!(f, "{mark} {:<14} {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Caches distances for repeated metric queries.
pub struct DistanceOracle<'a> {
    spec: &'a MdpSpec,
    graph: Option<UnitGraph>,
    cache: HashMap<usize, Vec<u32>>,
}

impl<'a> DistanceOracle<'a> {
    pub fn new(spec: &'a MdpSpec) -> Self {
        let graph = matches!(spec.metric, Metric::Hops).then(|| UnitGraph::from_spec(spec));
        Self {
            spec,
            graph,
            cache: HashMap::new(),
        }
    }

    pub fn distance(&mut self, a: usize, b: usize) -> f64 {
        match (&self.spec.metric, &self.graph) {
            (Metric::Lattice { dims, wrap }, _) => Metric::lattice_distance(dims, *wrap, a, b),
            (Metric::Hops, Some(g)) => {
                let row = self.cache.entry(a).or_insert_with(|| g.distances_from(a));
                match row[b] {
                    u32::MAX => f64::INFINITY,
                    d => d as f64,
                }
            }
            (Metric::Hops, None) => unreachable!("hop oracle always carries a graph"),
        }
    }
}

/// Checks distribution, reward, metric and locality invariants.
///
/// Metric axioms are checked on every triple when `S <= 256`, otherwise on
/// `sample_budget` random triples drawn from `seed`. Locality is always
/// exhaustive.
pub fn validate_mdp(
    spec: &MdpSpec,
    sample_budget: usize,
    seed: u64,
) -> Result<ValidationReport, MdpError> {
    let report = validation_report(spec, sample_budget, seed)?;
    if report.passed() {
        Ok(report)
    } else {
        Err(MdpError::ValidationFailure(report))
    }
}

/// Same checks as [`validate_mdp`] but always returns the report.
pub fn validation_report(
    spec: &MdpSpec,
    sample_budget: usize,
    seed: u64,
) -> Result<ValidationReport, MdpError> {
    if sample_budget == 0 {
        return Err(MdpError::InvalidArgument(
            "sample_budget must be positive".into(),
        ));
    }
    let (s_count, a_count) = (spec.num_states, spec.num_actions);
    let mut checks = Vec::new();

    // distribution
    let mut bad_rows = Vec::new();
    for s in 0..s_count {
        for a in 0..a_count {
            let (_, probs) = spec.row(s, a);
            let sum: f64 = probs.iter().sum();
            let valid = probs.iter().all(|p| p.is_finite() && *p >= 0.0);
            if !valid || (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                bad_rows.push((s, a, sum));
            }
        }
    }
    checks.push(CheckResult {
        name: "distribution".into(),
        passed: bad_rows.is_empty(),
        detail: match bad_rows.first() {
            None => format!("{} rows sum to 1", s_count * a_count),
            Some((s, a, sum)) => format!(
                "{} bad rows, first (s={s}, a={a}) sums to {sum}",
                bad_rows.len()
            ),
        },
    });

    // reward range
    let bad_reward = spec
        .rewards
        .iter()
        .position(|r| !(r.is_finite() && (0.0..=1.0).contains(r)));
    checks.push(CheckResult {
        name: "reward_range".into(),
        passed: bad_reward.is_none(),
        detail: match bad_reward {
            None => "all rewards in [0, 1]".into(),
            Some(i) => format!(
                "R(s={}, a={}) = {}",
                i / a_count,
                i % a_count,
                spec.rewards[i]
            ),
        },
    });

    // metric axioms
    let mut oracle = DistanceOracle::new(spec);
    let (metric_violation, coverage) = if s_count <= EXHAUSTIVE_METRIC_LIMIT {
        let mut dist = vec![0.0; s_count * s_count];
        for x in 0..s_count {
            for y in 0..s_count {
                dist[x * s_count + y] = oracle.distance(x, y);
            }
        }
        let d = |x: usize, y: usize| dist[x * s_count + y];
        let mut violation = None;
        'outer: for x in 0..s_count {
            for y in 0..s_count {
                if let Some(v) = pair_violation(x, y, d(x, y), d(y, x)) {
                    violation = Some(v);
                    break 'outer;
                }
                for z in 0..s_count {
                    if d(x, z) > d(x, y) + d(y, z) + 1e-12 {
                        violation = Some(format!("triangle fails on ({x}, {y}, {z})"));
                        break 'outer;
                    }
                }
            }
        }
        (violation, MetricCoverage::Exhaustive)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut violation = None;
        for _ in 0..sample_budget {
            let x = rng.random_range(0..s_count);
            let y = rng.random_range(0..s_count);
            let z = rng.random_range(0..s_count);
            let (dxy, dyx, dxz, dyz) = (
                oracle.distance(x, y),
                oracle.distance(y, x),
                oracle.distance(x, z),
                oracle.distance(y, z),
            );
            if let Some(v) = pair_violation(x, y, dxy, dyx) {
                violation = Some(v);
                break;
            }
            if oracle.distance(x, x) != 0.0 {
                violation = Some(format!("d({x}, {x}) != 0"));
                break;
            }
            if dxz > dxy + dyz + 1e-12 {
                violation = Some(format!("triangle fails on ({x}, {y}, {z})"));
                break;
            }
        }
        (
            violation,
            MetricCoverage::Sampled {
                triples: sample_budget,
            },
        )
    };
    checks.push(CheckResult {
        name: "metric".into(),
        passed: metric_violation.is_none(),
        detail: metric_violation.unwrap_or_else(|| match coverage {
            MetricCoverage::Exhaustive => "axioms hold on all triples".into(),
            MetricCoverage::Sampled { triples } => {
                format!("axioms hold on {triples} sampled triples")
            }
        }),
    });

    // locality
    let mut locality_violation = None;
    let mut support = Vec::with_capacity(a_count * 4);
    'states: for s in 0..s_count {
        support.clear();
        for a in 0..a_count {
            let (next, probs) = spec.row(s, a);
            for (&n, &p) in next.iter().zip(probs) {
                if p > 0.0 {
                    if oracle.distance(s, n) > 1.0 + 1e-12 {
                        locality_violation = Some(format!(
                            "(s={s}, a={a}) reaches state {n} at distance {}",
                            oracle.distance(s, n)
                        ));
                        break 'states;
                    }
                    support.push(n);
                }
            }
        }
        support.sort_unstable();
        support.dedup();
        if support.len() > a_count {
            locality_violation = Some(format!(
                "state {s} has {} one-step successors, more than A = {a_count}",
                support.len()
            ));
            break;
        }
    }
    checks.push(CheckResult {
        name: "locality".into(),
        passed: locality_violation.is_none(),
        detail: locality_violation.unwrap_or_else(|| "all successors within unit distance".into()),
    });

    Ok(ValidationReport {
        checks,
        metric_coverage: coverage,
    })
}

fn pair_violation(x: usize, y: usize, dxy: f64, dyx: f64) -> Option<String> {
    if dxy.is_nan() || dxy < 0.0 {
        return Some(format!("d({x}, {y}) = {dxy} is negative"));
    }
    if (x == y) != (dxy == 0.0) {
        return Some(format!("identity of indiscernibles fails on ({x}, {y})"));
    }
    if dxy != dyx {
        return Some(format!("d({x}, {y}) != d({y}, {x})"));
    }
    None
}

#[inline]
fn backup(spec: &MdpSpec, values: &[f64], s: usize, a: usize) -> f64 {
    let (next, probs) = spec.row(s, a);
    let expected: f64 = next.iter().zip(probs).map(|(&n, &p)| p * values[n]).sum();
    spec.reward(s, a) + spec.discount * expected
}

/// One synchronous Bellman optimality backup of a value table into Q.
pub fn bellman_q(spec: &MdpSpec, values: &[f64]) -> QTable {
    let a_count = spec.num_actions;
    let mut q = Vec::with_capacity(spec.num_states * a_count);
    for s in 0..spec.num_states {
        for a in 0..a_count {
            q.push(backup(spec, values, s, a));
        }
    }
    QTable::from_values(a_count, q)
}

/// `max_s |V(s) - max_a (R(s,a) + γ Σ T(s'|s,a) V(s'))|`.
pub fn bellman_residual(spec: &MdpSpec, values: &ValueTable) -> f64 {
    let q = bellman_q(spec, &values.0);
    (0..spec.num_states)
        .map(|s| (values.0[s] - row_max(q.row(s))).abs())
        .fold(0.0, f64::max)
}

/// Iteration cap for value iteration: the contraction bound plus a margin.
pub fn value_iteration_cap(discount: f64, tolerance: f64) -> usize {
    let needed = ((tolerance * (1.0 - discount)).ln() / discount.ln()).ceil();
    needed.max(0.0) as usize + 64
}

/// Infinite-horizon optimal values by synchronous value iteration from zero.
///
/// The returned value table satisfies a Bellman residual `<= tolerance` and
/// equals the row-wise maximum of the returned Q table.
pub fn value_iteration(spec: &MdpSpec, tolerance: f64) -> Result<(ValueTable, QTable), MdpError> {
    if !(tolerance > 0.0) || !tolerance.is_finite() {
        return Err(MdpError::InvalidArgument(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    value_iteration_with_cap(
        spec,
        tolerance,
        value_iteration_cap(spec.discount, tolerance),
    )
}

pub(crate) fn value_iteration_with_cap(
    spec: &MdpSpec,
    tolerance: f64,
    cap: usize,
) -> Result<(ValueTable, QTable), MdpError> {
    let mut values = vec![0.0; spec.num_states];
    let mut next = vec![0.0; spec.num_states];
    let mut delta = f64::INFINITY;
    for _ in 0..cap {
        delta = 0.0;
        for s in 0..spec.num_states {
            let best = (0..spec.num_actions)
                .map(|a| backup(spec, &values, s, a))
                .fold(f64::NEG_INFINITY, f64::max);
            delta = f64::max(delta, (best - values[s]).abs());
            next[s] = best;
        }
        std::mem::swap(&mut values, &mut next);
        if delta <= tolerance {
            let q = bellman_q(spec, &values);
            return Ok((q.state_values(), q));
        }
    }
    Err(MdpError::NonConvergence {
        iterations: cap,
        residual: delta,
    })
}

/// `horizon`-step optimal values by backward induction. Horizon 0 is a
/// single undiscounted reward, so horizon `T` sums `T + 1` reward terms.
pub fn finite_horizon_values(spec: &MdpSpec, horizon: usize) -> ValueTable {
    let mut values: Vec<f64> = (0..spec.num_states)
        .map(|s| {
            (0..spec.num_actions)
                .map(|a| spec.reward(s, a))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let mut next = vec![0.0; spec.num_states];
    for _ in 0..horizon {
        for (s, slot) in next.iter_mut().enumerate() {
            *slot = (0..spec.num_actions)
                .map(|a| backup(spec, &values, s, a))
                .fold(f64::NEG_INFINITY, f64::max);
        }
        std::mem::swap(&mut values, &mut next);
    }
    ValueTable(values)
}

pub fn greedy_policy(q: &QTable) -> Policy {
    Policy((0..q.num_states()).map(|s| argmax(q.row(s))).collect())
}

/// Signed mean gap `(1/S) Σ_s (v(s) - oracle(s))`.
pub fn mean_error(v: &ValueTable, oracle: &ValueTable) -> Result<f64, MdpError> {
    if v.len() != oracle.len() {
        return Err(MdpError::DimensionMismatch {
            expected: oracle.len(),
            found: v.len(),
        });
    }
    if v.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = v.0.iter().zip(&oracle.0).map(|(a, b)| a - b).sum();
    Ok(total / v.len() as f64)
}

/// Draws `s' ~ T(. | s, a)` by inverse CDF and returns it with the expected
/// reward `R(s, a)`.
#[inline]
pub fn sample_transition<R: Rng + ?Sized>(
    spec: &MdpSpec,
    s: usize,
    a: usize,
    rng: &mut R,
) -> (usize, f64) {
    let r = s * spec.num_actions + a;
    let (lo, hi) = (spec.row_offsets[r], spec.row_offsets[r + 1]);
    let reward = spec.rewards[r];
    if hi - lo == 1 {
        return (spec.successors[lo], reward);
    }
    let u: f64 = rng.random::<f64>() * spec.cumulative[hi - 1];
    for i in lo..hi - 1 {
        if u < spec.cumulative[i] {
            return (spec.successors[i], reward);
        }
    }
    (spec.successors[hi - 1], reward)
}

/// A random MDP with uniformly drawn rewards and sparse successor rows;
/// successors are arbitrary states, so it carries the `Hops` metric and is
/// not meant to satisfy locality. Used for oracle cross-checks.
pub fn random_mdp(
    num_states: usize,
    num_actions: usize,
    discount: f64,
    branching: usize,
    seed: u64,
) -> Result<MdpSpec, MdpError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<usize> = (0..num_states).collect();
    let rewards = (0..num_states)
        .map(|_| (0..num_actions).map(|_| rng.random::<f64>()).collect())
        .collect();
    let transitions = (0..num_states * num_actions)
        .map(|_| {
            let k = branching.clamp(1, num_states);
            let picks: Vec<usize> = states.choose_multiple(&mut rng, k).copied().collect();
            let weights: Vec<f64> = picks.iter().map(|_| rng.random::<f64>() + 0.05).collect();
            let total: f64 = weights.iter().sum();
            let mut row: Vec<(f64, usize)> = picks
                .into_iter()
                .zip(weights)
                .map(|(n, w)| (w / total, n))
                .collect();
            row.sort_by_key(|&(_, n)| n);
            row
        })
        .collect();
    MdpSpec::new(
        num_states,
        num_actions,
        discount,
        rewards,
        transitions,
        Metric::Hops,
    )
}
