//! Sweep execution and output writing.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::aggregate::{aggregate, summary_to_csv};
use super::config::{ExperimentConfig, ResolvedLearner};
use super::plot::{figure_a, figure_b, CurveSet};
use super::HarnessError;
use crate::algorithms::{
    pdql_run_observed, pql_run, qlearning_run, vrql_run, LearnError, NoopObserver, PdqlAudit,
    PdqlParams, RunTrace, Termination, TracePoint, UnlockScope,
};
use crate::env::make_lattice;
use crate::mdp::{value_iteration, MdpSpec, ValueTable};
use crate::util::derive_seed;

/// Value-iteration tolerance of the oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the rayon default.
    pub jobs: Option<usize>,
    /// Run the lock-based learners under [`PdqlAudit`] and report its counters.
    pub audit: bool,
}

/// Counters of one audited lock-based run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AuditSummary {
    pub updates: u64,
    pub locks: u64,
    pub unlock_events: u64,
    /// Successful updates allowed per pair.
    pub ceiling: u64,
    pub max_update_count: u64,
    pub ceiling_violations: u64,
    pub descent_violations: u64,
    pub unlock_violations: u64,
}

impl AuditSummary {
    pub fn violations(&self) -> u64 {
        self.ceiling_violations + self.descent_violations + self.unlock_violations
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub learner: String,
    pub states: usize,
    pub seed: u64,
}

/// Outcome of one (learner, S, seed) cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub learner: String,
    #[serde(rename = "S")]
    pub states: usize,
    #[serde(rename = "A")]
    pub actions: usize,
    pub seed: u64,
    /// First traced timestep from which `|mean_error| <= ε` holds at every
    /// later trace point; `None` when censored.
    pub samples_to_convergence: Option<u64>,
    pub censored: bool,
    pub final_mean_error: f64,
    pub total_timesteps: u64,
    pub termination: Option<Termination>,
    /// Timestep at which every pair was locked, for learners that lock.
    pub all_locked_at: Option<u64>,
    /// Failure message of a cell that produced no trace.
    pub error: Option<String>,
}

impl ConvergenceRecord {
    pub fn key(&self) -> CellKey {
        CellKey {
            learner: self.learner.clone(),
            states: self.states,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    /// Sorted by (learner, S, seed).
    pub records: Vec<ConvergenceRecord>,
    pub traces: BTreeMap<CellKey, RunTrace>,
    /// Value-iteration solves performed; one per lattice.
    pub oracle_solves: usize,
    /// Parameters each learner ran with, per lattice size.
    pub resolved: Vec<(String, usize, ResolvedLearner)>,
    /// Audit counters of lock-based cells, when auditing was requested.
    pub audits: BTreeMap<CellKey, AuditSummary>,
}

impl ExperimentOutput {
    pub fn all_censored(&self) -> bool {
        self.records.iter().all(|r| r.censored)
    }
}

/// Post-hoc sustained-convergence scan: the earliest trace point from which
/// every later point satisfies `|mean_error| <= epsilon`.
pub fn samples_to_convergence(points: &[TracePoint], epsilon: f64) -> Option<u64> {
    let mut first = None;
    for p in points.iter().rev() {
        if p.mean_error.abs() <= epsilon {
            first = Some(p.timestep);
        } else {
            break;
        }
    }
    first
}

type Outcome = (Result<RunTrace, LearnError>, Option<AuditSummary>);

fn run_locking(
    spec: &MdpSpec,
    params: &PdqlParams,
    scope: UnlockScope,
    oracle: &ValueTable,
    seed: u64,
    audit: bool,
) -> Outcome {
    if !audit {
        return (
            pdql_run_observed(spec, params, scope, oracle, seed, &mut NoopObserver),
            None,
        );
    }
    let mut obs = PdqlAudit::new(spec, params, scope);
    let result = pdql_run_observed(spec, params, scope, oracle, seed, &mut obs);
    let summary = AuditSummary {
        updates: obs.updates,
        locks: obs.locks,
        unlock_events: obs.unlock_events,
        ceiling: obs.ceiling(),
        max_update_count: obs.max_update_count(),
        ceiling_violations: obs.ceiling_violations,
        descent_violations: obs.descent_violations,
        unlock_violations: obs.unlock_violations,
    };
    (result, Some(summary))
}

fn execute(
    learner: &ResolvedLearner,
    spec: &MdpSpec,
    oracle: &ValueTable,
    seed: u64,
    audit: bool,
) -> Outcome {
    match learner {
        ResolvedLearner::Pdql(p) => run_locking(spec, p, UnlockScope::Local, oracle, seed, audit),
        ResolvedLearner::Dql { params, .. } => {
            run_locking(spec, params, UnlockScope::Global, oracle, seed, audit)
        }
        ResolvedLearner::Qlearning(p) => (qlearning_run(spec, p, oracle, seed), None),
        ResolvedLearner::Pql(p) => (pql_run(spec, p, oracle, seed), None),
        ResolvedLearner::Vrql(p) => (vrql_run(spec, p, oracle, seed), None),
    }
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        format!("panicked: {s}")
    } else if let Some(s) = payload.downcast_ref::<String>() {
        format!("panicked: {s}")
    } else {
        "panicked".to_string()
    }
}

struct Cell<'a> {
    key: CellKey,
    learner: &'a ResolvedLearner,
    lattice: usize,
}

/// Runs every (learner, S, seed) cell. The oracle is solved once per
/// lattice; each learner on lattice size S with seed k runs with seed
/// `derive_seed(k, S)`, so all learners share a cell's randomness stream.
///
/// A budget-exhausted run keeps its partial trace and may still count as
/// converged. Any other failure yields a censored record carrying the error.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<ExperimentOutput, HarnessError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let lattices = cfg.lattices()?;
    let gamma = cfg.experiment.gamma;
    let solved: Vec<(MdpSpec, ValueTable)> = pool.install(|| {
        lattices
            .par_iter()
            .map(|l| -> Result<_, HarnessError> {
                let spec =
                    make_lattice(l, gamma).map_err(|e| HarnessError::Config(e.to_string()))?;
                let (oracle, _) = value_iteration(&spec, ORACLE_TOLERANCE)?;
                Ok((spec, oracle))
            })
            .collect::<Result<_, _>>()
    })?;
    let oracle_solves = solved.len();

    let mut resolved = Vec::new();
    for l in &cfg.learners {
        for (spec, _) in &solved {
            let r = cfg.resolve(l, spec.num_states(), spec.num_actions())?;
            resolved.push((l.id(), spec.num_states(), r));
        }
    }
    let mut cells = Vec::new();
    for (li, (id, states, r)) in resolved.iter().enumerate() {
        let lattice = li % solved.len();
        debug_assert_eq!(solved[lattice].0.num_states(), *states);
        for &seed in &cfg.experiment.seeds {
            cells.push(Cell {
                key: CellKey {
                    learner: id.clone(),
                    states: *states,
                    seed,
                },
                learner: r,
                lattice,
            });
        }
    }

    let epsilon = cfg.experiment.epsilon;
    let audit = opts.audit;
    let outcomes: Vec<(ConvergenceRecord, Option<RunTrace>, Option<AuditSummary>)> =
        pool.install(|| {
            cells
                .par_iter()
                .map(|cell| {
                    let (spec, oracle) = &solved[cell.lattice];
                    let run_seed = derive_seed(cell.key.seed, cell.key.states as u64);
                    let (result, audit) = catch_unwind(AssertUnwindSafe(|| {
                        execute(cell.learner, spec, oracle, run_seed, audit)
                    }))
                    .unwrap_or_else(|p| (Err(LearnError::InvalidParams(panic_message(p))), None));
                    let (trace, error) = match result {
                        Ok(t) => (Some(t), None),
                        Err(LearnError::BudgetExhausted(t)) => (Some(*t), None),
                        Err(e) => (None, Some(e.to_string())),
                    };
                    let record = match &trace {
                        Some(t) => {
                            let converged = samples_to_convergence(&t.points, epsilon);
                            ConvergenceRecord {
                                learner: cell.key.learner.clone(),
                                states: cell.key.states,
                                actions: spec.num_actions(),
                                seed: cell.key.seed,
                                samples_to_convergence: converged,
                                censored: converged.is_none(),
                                final_mean_error: t.final_mean_error(),
                                total_timesteps: t.total_timesteps,
                                termination: Some(t.termination),
                                all_locked_at: (t.termination == Termination::AllLocked)
                                    .then_some(t.converged_at)
                                    .flatten(),
                                error: None,
                            }
                        }
                        None => ConvergenceRecord {
                            learner: cell.key.learner.clone(),
                            states: cell.key.states,
                            actions: spec.num_actions(),
                            seed: cell.key.seed,
                            samples_to_convergence: None,
                            censored: true,
                            final_mean_error: f64::NAN,
                            total_timesteps: 0,
                            termination: None,
                            all_locked_at: None,
                            error,
                        },
                    };
                    (record, trace, audit)
                })
                .collect()
        });

    let mut records = Vec::with_capacity(outcomes.len());
    let mut traces = BTreeMap::new();
    let mut audits = BTreeMap::new();
    for (record, trace, audit) in outcomes {
        if let Some(t) = trace {
            traces.insert(record.key(), t);
        }
        if let Some(a) = audit {
            audits.insert(record.key(), a);
        }
        records.push(record);
    }
    records.sort_by_key(ConvergenceRecord::key);
    Ok(ExperimentOutput {
        records,
        traces,
        oracle_solves,
        resolved,
        audits,
    })
}

pub(crate) fn trace_stem(key: &CellKey) -> String {
    format!("{}_{}_{}", key.learner, key.states, key.seed)
}

/// Mean-error curves of every learner at lattice size `states`.
pub(crate) fn curves_at(traces: &BTreeMap<CellKey, RunTrace>, states: usize) -> CurveSet {
    let mut curves: CurveSet = BTreeMap::new();
    for (key, trace) in traces.iter().filter(|(k, _)| k.states == states) {
        curves.entry(key.learner.clone()).or_default().push(
            trace
                .points
                .iter()
                .map(|p| (p.timestep, p.mean_error))
                .collect(),
        );
    }
    curves
}

/// The available size closest to `wanted`, ties to the smaller.
pub(crate) fn nearest_size(sizes: impl IntoIterator<Item = usize>, wanted: usize) -> Option<usize> {
    sizes
        .into_iter()
        .min_by_key(|&s| ((s as i64 - wanted as i64).abs(), s))
}

/// Writes records, summary, traces, config snapshot and both figures.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    out: &ExperimentOutput,
    dir: &Path,
) -> Result<(), HarnessError> {
    let traces_dir = dir.join("traces");
    let plots_dir = dir.join("plots");
    fs::create_dir_all(&traces_dir)?;
    fs::create_dir_all(&plots_dir)?;

    let mut writer = csv::Writer::from_path(dir.join("records.csv"))?;
    for r in &out.records {
        writer.serialize(r)?;
    }
    writer.flush()?;

    let summary = aggregate(&out.records);
    fs::write(dir.join("summary.csv"), summary_to_csv(&summary))?;

    for (key, trace) in &out.traces {
        let stem = trace_stem(key);
        fs::write(traces_dir.join(format!("{stem}.csv")), trace.to_csv())?;
        fs::write(
            traces_dir.join(format!("{stem}.json")),
            trace.snapshot_json(),
        )?;
    }

    let resolved: Vec<_> = out
        .resolved
        .iter()
        .map(|(id, s, r)| serde_json::json!({ "learner": id, "S": s, "params": r }))
        .collect();
    let snapshot = serde_json::json!({
        "config": cfg,
        "figure_b_size": cfg.figure_b_size()?,
        "oracle_solves": out.oracle_solves,
        "oracle_tolerance": ORACLE_TOLERANCE,
        "resolved": resolved,
    });
    fs::write(
        dir.join("config.json"),
        serde_json::to_string_pretty(&snapshot)?,
    )?;

    fs::write(plots_dir.join("figure_a.svg"), figure_a(&summary))?;
    let sizes: Vec<usize> = out.records.iter().map(|r| r.states).collect();
    let curves = match nearest_size(sizes, cfg.figure_b_size()?) {
        Some(s) => (s, curves_at(&out.traces, s)),
        None => (cfg.figure_b_size()?, CurveSet::new()),
    };
    fs::write(
        plots_dir.join("figure_b.svg"),
        figure_b(&curves.1, curves.0, cfg.experiment.epsilon),
    )?;
    Ok(())
}
