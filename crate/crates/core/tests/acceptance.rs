//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Thresholds are pinned below.

mod common;

use std::fs;
use std::time::{Duration, Instant};

use common::{horizon, random_lattice};
use pdql_core::algorithms::{
    default_params, memory_footprint, NoopObserver, PdqlRunner, StepOutcome, UnlockScope,
};
use pdql_core::bounds::{overlap_bound, q_lower_bound, BoundInputs};
use pdql_core::env::{make_lattice, most_square_dims};
use pdql_core::harness::{
    aggregate, fit_scaling, run_experiment, write_outputs, AuditSummary, ExperimentConfig,
    ExperimentOutput, ResolvedLearner, RunOptions, ScalingModel,
};
use pdql_core::mdp::{finite_horizon_values, value_iteration};
use pdql_core::submdp::{build_submdp, coverage_radius, truncation_radius};
use pdql_core::{LatticeConfig, Termination};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Value-iteration tolerance for the envelope checks.
const VI_TOL: f64 = 1e-8;
/// Slack on both envelopes: twice the solver tolerance.
const ENVELOPE_SLACK: f64 = 2.0 * VI_TOL;

const C1_LATTICES: u64 = 50;
const C1_MAX_STATES: usize = 200;
const C1_LIMIT: Duration = Duration::from_secs(60);

const C2_LATTICES: u64 = 30;
const C2_MAX_STATES: usize = 150;
const C2_LIMIT: Duration = Duration::from_secs(5 * 60);

/// Batch size for the correctness runs. The bound value (about 2.3e5 at
/// S = 100) does not fit the runtime limit; the ignored extended test runs
/// the same check with it.
const C3_Q: u64 = 2000;
const C3_MIN_PASS_RATE: f64 = 0.9;
const C3_LIMIT: Duration = Duration::from_secs(10 * 60);

const C5_MIN_WIN_RATE: f64 = 0.8;
const C5_LIMIT: Duration = Duration::from_secs(15 * 60);
const C6_LIMIT: Duration = Duration::from_secs(30 * 60);
const C7_LIMIT: Duration = Duration::from_secs(1);

const C8_STATES: usize = 1000;
const C8_ACTIONS: usize = 4;
const C8_STEPS: u64 = 1_000_000;

struct Verdict {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(id: &'static str, title: &'static str, pass: bool, detail: String) -> Verdict {
    Verdict {
        id,
        title,
        pass,
        detail,
    }
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

/// `ceil` that ignores representation noise just above an integer.
fn ceil_exact(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

fn c1_truncation_envelope() -> Verdict {
    let start = Instant::now();
    let gammas = [0.5, 0.9];
    let epsilons = [0.05, 0.1, 0.25];
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0;
    for i in 0..C1_LATTICES {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
        let cfg = random_lattice(&mut rng, C1_MAX_STATES);
        let gamma = gammas[i as usize % 2];
        let epsilon = epsilons[(i as usize / 2) % 3];
        let spec = make_lattice(&cfg, gamma).unwrap();
        let t = truncation_radius(epsilon, gamma).unwrap();
        // the horizon-h function collects h + 1 rewards
        let v_t = finite_horizon_values(&spec, t as usize - 1);
        let (v, _) = value_iteration(&spec, VI_TOL).unwrap();
        let gap =
            v.0.iter()
                .zip(&v_t.0)
                .map(|(a, b)| a - b)
                .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(gap - epsilon);
        if gap > epsilon + ENVELOPE_SLACK {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "C1",
        "truncation envelope",
        failures == 0 && elapsed < C1_LIMIT,
        format!(
            "{failures}/{C1_LATTICES} lattices over; max(gap - ε) = {worst:.3e} (slack {ENVELOPE_SLACK:e}); {} (limit {})",
            secs(elapsed),
            secs(C1_LIMIT)
        ),
    )
}

fn c2_submdp_envelope() -> Verdict {
    let start = Instant::now();
    let gammas = [0.5, 0.7, 0.9];
    let epsilons = [0.1, 0.25, 0.5];
    let (mut checked, mut over, mut nontrivial) = (0u64, 0u64, 0u64);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..C2_LATTICES {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + i);
        let cfg = random_lattice(&mut rng, C2_MAX_STATES);
        let gamma = gammas[i as usize % 3];
        let epsilon = epsilons[rng.random_range(0..3)];
        let spec = make_lattice(&cfg, gamma).unwrap();
        let (parent, _) = value_iteration(&spec, VI_TOL).unwrap();
        for center in 0..spec.num_states() {
            let sub = build_submdp(&spec, center, epsilon).unwrap();
            if sub.member_states().len() < spec.num_states() {
                nontrivial += 1;
            }
            let (local, _) = value_iteration(sub.local_spec(), VI_TOL).unwrap();
            for (l, &v) in local.0.iter().enumerate() {
                let d = sub.distance_to_center(l);
                let gap = (v - parent.0[sub.to_parent(l)]).abs();
                let envelope = epsilon / gamma.powi(d as i32);
                worst = worst.max(gap - envelope);
                checked += 1;
                if gap > envelope + ENVELOPE_SLACK {
                    over += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "C2",
        "sub-MDP distance envelope",
        over == 0 && elapsed < C2_LIMIT,
        format!(
            "{over}/{checked} (center, member) pairs over; {nontrivial} proper sub-MDPs; max(gap - envelope) = {worst:.3e}; {} (limit {})",
            secs(elapsed),
            secs(C2_LIMIT)
        ),
    )
}

const C3_CONFIG: &str = r#"
[experiment]
epsilon = 0.05
delta = 0.05
gamma = 0.9
seeds = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19]
budget = 2000000000
trace_stride = 100000

[env]
sizes = [50, 100]
slip_prob = 0.1
seed = 11

[[learner]]
name = "pdql"
q = 2000
"#;

fn c3_correctness() -> (Verdict, ExperimentOutput) {
    let start = Instant::now();
    let cfg = ExperimentConfig::from_toml_str(C3_CONFIG).unwrap();
    assert!(cfg.learners[0].q == Some(C3_Q));
    let epsilon = cfg.experiment.epsilon;
    let out = run_experiment(
        &cfg,
        &RunOptions {
            jobs: None,
            audit: true,
        },
    )
    .unwrap();
    let mut lines = Vec::new();
    let mut all_pass = true;
    for states in [50, 100] {
        let rows: Vec<_> = out.records.iter().filter(|r| r.states == states).collect();
        let good = rows
            .iter()
            .filter(|r| {
                r.termination == Some(Termination::AllLocked)
                    && r.final_mean_error.abs() <= 2.0 * epsilon
            })
            .count();
        let rate = good as f64 / rows.len() as f64;
        let mean_err = rows.iter().map(|r| r.final_mean_error).sum::<f64>() / rows.len() as f64;
        all_pass &= rate >= C3_MIN_PASS_RATE;
        lines.push(format!(
            "S={states}: {good}/{} within 2ε = {} (mean error {mean_err:.3})",
            rows.len(),
            2.0 * epsilon
        ));
    }
    let elapsed = start.elapsed();
    let v = verdict(
        "C3",
        "PDQL correctness",
        all_pass && elapsed < C3_LIMIT,
        format!(
            "q = {C3_Q}; {}; need >= {:.0}%; {} (limit {})",
            lines.join("; "),
            C3_MIN_PASS_RATE * 100.0,
            secs(elapsed),
            secs(C3_LIMIT)
        ),
    );
    (v, out)
}

/// The learner shared by the trend criteria: PDQL with the bound batch
/// size against DQL with its published batch size, both at ε = 0.05.
const TREND_CONFIG: &str = r#"
[experiment]
epsilon = 0.3
delta = 0.05
gamma = 0.5
seeds = SEEDS
budget_multiplier = 10
trace_stride = 1000

[env]
sizes = SIZES
slip_prob = 0.1
seed = 0

[env.reward]
random_goals = 0
pad = [0.5, 0.0]

[[learner]]
name = "pdql"
epsilon = 0.05

[[learner]]
name = "dql"
epsilon = 0.05
"#;

fn trend_config(seeds: &str, sizes: &str) -> ExperimentConfig {
    let text = TREND_CONFIG.replace("SEEDS", seeds).replace("SIZES", sizes);
    ExperimentConfig::from_toml_str(&text).unwrap()
}

fn c5_figure_b_trend() -> (Verdict, ExperimentOutput) {
    let start = Instant::now();
    let cfg = trend_config("[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]", "[200]");
    let out = run_experiment(
        &cfg,
        &RunOptions {
            jobs: None,
            audit: true,
        },
    )
    .unwrap();
    let crossing = |learner: &str, seed: u64| {
        out.records
            .iter()
            .find(|r| r.learner == learner && r.seed == seed)
            .and_then(|r| r.samples_to_convergence)
    };
    let seeds = &cfg.experiment.seeds;
    let mut wins = 0;
    let mut pairs = Vec::new();
    for &seed in seeds {
        let (p, d) = (crossing("pdql", seed), crossing("dql", seed));
        let win = match (p, d) {
            (Some(p), Some(d)) => p < d,
            (Some(_), None) => true,
            _ => false,
        };
        wins += usize::from(win);
        let show = |x: Option<u64>| {
            x.map_or("censored".to_string(), |v| {
                format!("{:.1}M", v as f64 / 1e6)
            })
        };
        pairs.push(format!("{}/{}", show(p), show(d)));
    }
    let rate = wins as f64 / seeds.len() as f64;
    let elapsed = start.elapsed();
    let v = verdict(
        "C5",
        "PDQL reaches ε before DQL at S=200",
        rate >= C5_MIN_WIN_RATE && elapsed < C5_LIMIT,
        format!(
            "{wins}/{} seeds (need >= {:.0}%); pdql/dql crossings [{}]; {} (limit {})",
            seeds.len(),
            C5_MIN_WIN_RATE * 100.0,
            pairs.join(", "),
            secs(elapsed),
            secs(C5_LIMIT)
        ),
    );
    (v, out)
}

fn c6_figure_a_trend() -> (Verdict, ExperimentOutput) {
    let start = Instant::now();
    let cfg = trend_config("[0, 1, 2, 3, 4]", "[50, 200, 500]");
    let out = run_experiment(
        &cfg,
        &RunOptions {
            jobs: None,
            audit: true,
        },
    )
    .unwrap();
    let summary = aggregate(&out.records);
    let elapsed = start.elapsed();
    let (pass, detail) = match fit_scaling(&summary, 4) {
        Ok(report) => {
            let better = |name: &str| {
                report
                    .learners
                    .iter()
                    .find(|l| l.learner == name)
                    .map(|l| l.better)
            };
            let describe = |name: &str| {
                report
                    .learners
                    .iter()
                    .find(|l| l.learner == name)
                    .map(|l| {
                        let norms: Vec<String> = l
                            .fits
                            .iter()
                            .map(|f| format!("{} {:.3e}", f.model.as_str(), f.residual_norm))
                            .collect();
                        format!(
                            "{name} prefers {} ({})",
                            l.better.as_str(),
                            norms.join(", ")
                        )
                    })
                    .unwrap_or_else(|| format!("{name} missing"))
            };
            (
                better("pdql") == Some(ScalingModel::SALogA)
                    && better("dql") == Some(ScalingModel::SALogSA),
                format!("{}; {}", describe("pdql"), describe("dql")),
            )
        }
        Err(e) => (false, format!("fit failed: {e}")),
    };
    let v = verdict(
        "C6",
        "scaling fit over S in {50, 200, 500}",
        pass && elapsed < C6_LIMIT,
        format!("{detail}; {} (limit {})", secs(elapsed), secs(C6_LIMIT)),
    );
    (v, out)
}

fn c4_update_ceiling(runs: &[&ExperimentOutput]) -> Verdict {
    let mut audits: Vec<AuditSummary> = Vec::new();
    let mut cells = 0;
    let mut param_mismatch = 0;
    for out in runs {
        cells += out
            .records
            .iter()
            .filter(|r| r.learner == "pdql" || r.learner == "dql")
            .count();
        audits.extend(out.audits.values().copied());
        for (_, _, resolved) in &out.resolved {
            let p = match resolved {
                ResolvedLearner::Pdql(p) => p,
                ResolvedLearner::Dql { params, .. } => params,
                _ => continue,
            };
            let ceiling = ceil_exact(1.0 / (p.epsilon * (1.0 - p.gamma)));
            if p.update_ceiling() != ceiling
                || p.unlock_radius as usize != horizon(p.epsilon, p.gamma)
            {
                param_mismatch += 1;
            }
        }
    }
    let sum = |f: fn(&AuditSummary) -> u64| audits.iter().map(f).sum::<u64>();
    let ceiling_v = sum(|a| a.ceiling_violations);
    let unlock_v = sum(|a| a.unlock_violations);
    let descent_v = sum(|a| a.descent_violations);
    let max_count = audits.iter().map(|a| a.max_update_count).max().unwrap_or(0);
    let pass = ceiling_v == 0
        && unlock_v == 0
        && descent_v == 0
        && param_mismatch == 0
        && audits.len() == cells
        && cells > 0;
    verdict(
        "C4",
        "update ceiling and unlock radius",
        pass,
        format!(
            "{} audited runs of {cells}; {} updates; ceiling violations {ceiling_v}, unlock violations {unlock_v}, descent violations {descent_v}; max per-pair updates {max_count}; parameter mismatches {param_mismatch}",
            audits.len(),
            sum(|a| a.updates)
        ),
    )
}

fn c7_goldens() -> Verdict {
    let start = Instant::now();
    let q = q_lower_bound(&BoundInputs::new(0.1, 0.1, 0.5, 10, 2).unwrap())
        .unwrap()
        .value;
    let k = overlap_bound(&BoundInputs::new(0.01, 0.001, 0.9, 1000, 4).unwrap())
        .unwrap()
        .value;
    let t = truncation_radius(0.01, 0.9).unwrap();
    let c = coverage_radius(0.9).unwrap();
    let got = [q, k, t as u64, c as u64];
    let want = [2156, 2902, 66, 7];
    let elapsed = start.elapsed();
    verdict(
        "C7",
        "bound golden values",
        got == want && elapsed < C7_LIMIT,
        format!(
            "got {got:?}, want {want:?}; {:.2}ms (limit {})",
            elapsed.as_secs_f64() * 1e3,
            secs(C7_LIMIT)
        ),
    )
}

fn c8_space() -> Verdict {
    let cfg = LatticeConfig {
        slip_prob: 0.1,
        ..LatticeConfig::new(most_square_dims(C8_STATES))
    };
    let spec = make_lattice(&cfg, 0.5).unwrap();
    assert_eq!(
        (spec.num_states(), spec.num_actions()),
        (C8_STATES, C8_ACTIONS)
    );
    let (oracle, _) = value_iteration(&spec, 1e-10).unwrap();
    let params = default_params(0.1, 0.1, 0.5, C8_STATES, C8_ACTIONS)
        .unwrap()
        .with_max_timesteps(C8_STEPS);
    let mut runner = PdqlRunner::new(&spec, &params, UnlockScope::Local, &oracle, 0).unwrap();
    let before = memory_footprint(runner.state());
    let mut steps = 0u64;
    while runner.step(&mut NoopObserver) == StepOutcome::Sampled {
        steps += 1;
    }
    let after = memory_footprint(runner.state());
    let expected = 4 * C8_STATES * C8_ACTIONS;
    let pass = steps == C8_STEPS
        && before.entries == expected
        && (before.per_pair, before.per_state) == (4, 0)
        && after == before;
    verdict(
        "C8",
        "space contract",
        pass,
        format!(
            "{} entries (want {expected} = 4·S·A + 0·S), capacity {} -> {} over {steps} timesteps",
            before.entries, before.capacity, after.capacity
        ),
    )
}

const C9_CONFIG: &str = r#"
[experiment]
epsilon = 0.3
delta = 0.1
gamma = 0.5
seeds = [0, 1, 2]
budget = 3000000
trace_stride = 1000

[env]
sizes = [16, 36]
slip_prob = 0.2
seed = 5

[[learner]]
name = "pdql"
epsilon = 0.1
q = 300

[[learner]]
name = "dql"
epsilon = 0.1
q = 300

[[learner]]
name = "qlearning"
budget = 200000

[[learner]]
name = "pql"
phase_length = 50

[[learner]]
name = "vrql"
"#;

fn c9_determinism() -> Verdict {
    let cfg = ExperimentConfig::from_toml_str(C9_CONFIG).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut bytes = Vec::new();
    for (dir, jobs) in dirs.iter().zip([1, 2]) {
        let out = run_experiment(
            &cfg,
            &RunOptions {
                jobs: Some(jobs),
                audit: false,
            },
        )
        .unwrap();
        write_outputs(&cfg, &out, dir.path()).unwrap();
        bytes.push(fs::read(dir.path().join("records.csv")).unwrap());
    }
    let rows = bytes[0]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        .saturating_sub(1);
    verdict(
        "C9",
        "byte-identical replay",
        bytes[0] == bytes[1] && rows == 30,
        format!(
            "records.csv {} bytes, {rows} rows; identical = {}",
            bytes[0].len(),
            bytes[0] == bytes[1]
        ),
    )
}

fn report(v: &Verdict) {
    let tag = if v.pass { "PASS" } else { "FAIL" };
    println!("{tag} {} {}: {}", v.id, v.title, v.detail);
}

fn main() {
    // cargo passes libtest flags to every test binary; a listing request
    // gets an empty list.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut verdicts = Vec::new();
    let mut run = |v: Verdict| {
        report(&v);
        verdicts.push(v.pass);
    };
    run(c7_goldens());
    run(c8_space());
    run(c9_determinism());
    run(c1_truncation_envelope());
    run(c2_submdp_envelope());
    let (v3, out3) = c3_correctness();
    run(v3);
    let (v5, out5) = c5_figure_b_trend();
    run(v5);
    let (v6, out6) = c6_figure_a_trend();
    run(v6);
    run(c4_update_ceiling(&[&out3, &out5, &out6]));

    let failed = verdicts.iter().filter(|&&p| !p).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        verdicts.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
