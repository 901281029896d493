//! Independent oracles and fixtures shared by the integration tests.
//!
//! Nothing here calls the crate's solvers: optimal values come from exact
//! policy iteration with dense linear solves, finite-horizon values from a
//! direct backward recursion and distances from a plain BFS.
#![allow(dead_code)]

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use pdql_core::env::make_lattice;
use pdql_core::{LatticeConfig, MdpSpec, RewardSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `r(s,a) + γ Σ T(s'|s,a) v(s')`.
pub fn backup(spec: &MdpSpec, v: &[f64], s: usize, a: usize) -> f64 {
    let (next, probs) = spec.row(s, a);
    let ev: f64 = next.iter().zip(probs).map(|(&t, &p)| p * v[t]).sum();
    spec.reward(s, a) + spec.discount() * ev
}

/// Exact optimal values by policy iteration; each evaluation solves
/// `(I - γ P_π) v = r_π` with an LU decomposition.
pub fn policy_iteration(spec: &MdpSpec) -> Vec<f64> {
    let n = spec.num_states();
    let na = spec.num_actions();
    let mut policy = vec![0usize; n];
    for _ in 0..10_000 {
        let mut m = DMatrix::<f64>::identity(n, n);
        let mut r = DVector::<f64>::zeros(n);
        for s in 0..n {
            let a = policy[s];
            r[s] = spec.reward(s, a);
            let (next, probs) = spec.row(s, a);
            for (&t, &p) in next.iter().zip(probs) {
                m[(s, t)] -= spec.discount() * p;
            }
        }
        let v = m.lu().solve(&r).expect("I - γP is nonsingular");
        let v: Vec<f64> = v.iter().copied().collect();
        let mut stable = true;
        for s in 0..n {
            let current = backup(spec, &v, s, policy[s]);
            let (best_a, best) = (0..na).map(|a| (a, backup(spec, &v, s, a))).fold(
                (policy[s], current),
                |acc, x| if x.1 > acc.1 + 1e-12 { x } else { acc },
            );
            if best > current + 1e-12 {
                policy[s] = best_a;
                stable = false;
            }
        }
        if stable {
            return v;
        }
    }
    panic!("policy iteration did not stabilise");
}

/// Optimal value of collecting exactly `terms` discounted rewards, by
/// backward recursion from zero.
pub fn backward_induction(spec: &MdpSpec, terms: usize) -> Vec<f64> {
    let n = spec.num_states();
    let mut v = vec![0.0; n];
    for _ in 0..terms {
        v = (0..n)
            .map(|s| {
                (0..spec.num_actions())
                    .map(|a| backup(spec, &v, s, a))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
    }
    v
}

/// Hop distances over the undirected support graph of the transitions.
pub fn bfs_hops(spec: &MdpSpec, src: usize) -> Vec<usize> {
    let n = spec.num_states();
    let mut adj = vec![Vec::new(); n];
    for s in 0..n {
        for a in 0..spec.num_actions() {
            let (next, probs) = spec.row(s, a);
            for (&t, &p) in next.iter().zip(probs) {
                if p > 0.0 && t != s {
                    adj[s].push(t);
                    adj[t].push(s);
                }
            }
        }
    }
    let mut dist = vec![usize::MAX; n];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(s) = queue.pop_front() {
        for &t in &adj[s] {
            if dist[t] == usize::MAX {
                dist[t] = dist[s] + 1;
                queue.push_back(t);
            }
        }
    }
    dist
}

/// `ceil(log_γ(ε(1-γ)))`, computed directly.
pub fn horizon(epsilon: f64, gamma: f64) -> usize {
    let raw = (epsilon * (1.0 - gamma)).ln() / gamma.ln();
    raw.ceil().max(1.0) as usize
}

/// A random 2-D lattice config with at most `max_states` states.
pub fn random_lattice(rng: &mut ChaCha8Rng, max_states: usize) -> LatticeConfig {
    loop {
        let w = rng.random_range(2..=20);
        let h = rng.random_range(1..=20);
        if w * h > max_states || w * h < 8 {
            continue;
        }
        return LatticeConfig {
            dims: vec![w, h],
            wrap: rng.random_bool(0.2),
            slip_prob: [0.0, 0.1, 0.3][rng.random_range(0..3)],
            reward: RewardSpec {
                random_goals: rng.random_range(1..=3),
                random_hazards: rng.random_range(0..=2),
                ..RewardSpec::default()
            },
            seed: rng.random(),
        };
    }
}

pub fn random_lattice_spec(seed: u64, max_states: usize, gamma: f64) -> MdpSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    make_lattice(&random_lattice(&mut rng, max_states), gamma).expect("valid lattice")
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
