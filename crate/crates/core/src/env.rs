//! Lattice gridworld generators.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mdp::{MdpError, MdpSpec, Metric};
use crate::util::derive_seed;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid lattice config: {0}")]
    Config(String),
    #[error(transparent)]
    Mdp(#[from] MdpError),
}

/// A reward-bearing lattice cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardCell {
    pub cell: Vec<usize>,
    pub reward: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardSpec {
    /// Explicitly placed goals.
    pub goals: Vec<RewardCell>,
    /// Additional goals placed uniformly at random from the config seed.
    pub random_goals: usize,
    pub goal_reward: f64,
    /// Explicit hazards; `reward` is the (positive) penalty magnitude.
    pub hazards: Vec<RewardCell>,
    pub random_hazards: usize,
    pub hazard_penalty: f64,
    /// Goal cells self-loop under every action.
    pub absorbing: bool,
    /// Dense shaping toward a pad at fractional coordinates in `[0, 1]^k`:
    /// each state gains `1 - |x - pad|₂ / sqrt(k)` with `x` its normalised
    /// position. The field is resolution-free, so a size sweep discretises
    /// one task at several resolutions.
    pub pad: Option<Vec<f64>>,
}

impl Default for RewardSpec {
    fn default() -> Self {
        Self {
            goals: Vec::new(),
            random_goals: 1,
            goal_reward: 1.0,
            hazards: Vec::new(),
            random_hazards: 0,
            hazard_penalty: 1.0,
            absorbing: false,
            pad: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub wrap: bool,
    #[serde(default)]
    pub slip_prob: f64,
    #[serde(default)]
    pub reward: RewardSpec,
    #[serde(default)]
    pub seed: u64,
}

impl LatticeConfig {
    pub fn new(dims: Vec<usize>) -> Self {
        Self {
            dims,
            wrap: false,
            slip_prob: 0.0,
            reward: RewardSpec::default(),
            seed: 0,
        }
    }

    pub fn num_states(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn num_actions(&self) -> usize {
        2 * self.dims.len()
    }

    fn check(&self) -> Result<(), EnvError> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(EnvError::Config(format!(
                "dims must be nonempty positive extents, got {:?}",
                self.dims
            )));
        }
        if self.num_states() < 2 {
            return Err(EnvError::Config("lattice needs at least 2 states".into()));
        }
        if !(0.0..1.0).contains(&self.slip_prob) {
            return Err(EnvError::Config(format!(
                "slip_prob {} outside [0, 1)",
                self.slip_prob
            )));
        }
        let r = &self.reward;
        if let Some(pad) = &r.pad {
            if pad.len() != self.dims.len() || pad.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(EnvError::Config(format!(
                    "pad {pad:?} must have one coordinate in [0, 1] per axis"
                )));
            }
        }
        for c in r.goals.iter().chain(&r.hazards) {
            if c.cell.len() != self.dims.len() || c.cell.iter().zip(&self.dims).any(|(x, d)| x >= d)
            {
                return Err(EnvError::Config(format!(
                    "reward cell {:?} outside lattice {:?}",
                    c.cell, self.dims
                )));
            }
            if !c.reward.is_finite() {
                return Err(EnvError::Config("reward magnitudes must be finite".into()));
            }
        }
        Ok(())
    }

    /// Per-state reward and goal mask after placing random cells.
    fn state_rewards(&self) -> Result<(Vec<f64>, Vec<bool>), EnvError> {
        let n = self.num_states();
        let r = &self.reward;
        let mut reward = vec![0.0; n];
        let mut goal = vec![false; n];
        let mut taken = vec![false; n];
        for c in &r.goals {
            let s = Metric::lattice_index(&self.dims, &c.cell);
            reward[s] += c.reward;
            goal[s] = true;
            taken[s] = true;
        }
        for c in &r.hazards {
            let s = Metric::lattice_index(&self.dims, &c.cell);
            reward[s] -= c.reward;
            taken[s] = true;
        }
        if let Some(pad) = &r.pad {
            let k = self.dims.len() as f64;
            for (s, slot) in reward.iter_mut().enumerate() {
                let coords = Metric::lattice_coords(&self.dims, s);
                let sq: f64 = coords
                    .iter()
                    .zip(&self.dims)
                    .zip(pad)
                    .map(|((&c, &d), &p)| {
                        let x = if d > 1 {
                            c as f64 / (d - 1) as f64
                        } else {
                            0.5
                        };
                        (x - p).powi(2)
                    })
                    .sum();
                *slot += 1.0 - sq.sqrt() / k.sqrt();
            }
        }
        let mut free: Vec<usize> = (0..n).filter(|&s| !taken[s]).collect();
        if r.random_goals + r.random_hazards > free.len() {
            return Err(EnvError::Config(format!(
                "cannot place {} random cells in {} free states",
                r.random_goals + r.random_hazards,
                free.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        free.shuffle(&mut rng);
        for &s in free.iter().take(r.random_goals) {
            reward[s] += r.goal_reward;
            goal[s] = true;
        }
        for &s in free.iter().skip(r.random_goals).take(r.random_hazards) {
            reward[s] -= r.hazard_penalty;
        }
        if reward.iter().all(|&x| x == 0.0) {
            return Err(EnvError::Config(
                "at least one nonzero reward cell is required".into(),
            ));
        }
        Ok((reward, goal))
    }
}

fn step(dims: &[usize], wrap: bool, s: usize, action: usize) -> usize {
    let axis = action / 2;
    let mut coords = Metric::lattice_coords(dims, s);
    let extent = dims[axis];
    let c = coords[axis];
    coords[axis] = if action.is_multiple_of(2) {
        match (c, wrap) {
            (0, true) => extent - 1,
            (0, false) => return s,
            _ => c - 1,
        }
    } else if c + 1 == extent {
        if wrap {
            0
        } else {
            return s;
        }
    } else {
        c + 1
    };
    Metric::lattice_index(dims, &coords)
}

/// Lattice gridworld: action `2k` steps down axis `k`, `2k + 1` steps up.
/// The intended move happens with probability `1 - slip`; otherwise a
/// uniformly random direction is taken. Off-edge moves on a bounded axis
/// self-loop. Rewards are state-wise and scaled to `[0, 1]`.
pub fn make_lattice(cfg: &LatticeConfig, gamma: f64) -> Result<MdpSpec, EnvError> {
    cfg.check()?;
    let (dims, wrap) = (&cfg.dims, cfg.wrap);
    let n = cfg.num_states();
    let actions = cfg.num_actions();
    let (state_reward, goal) = cfg.state_rewards()?;

    let slip_each = cfg.slip_prob / actions as f64;
    let mut transitions = Vec::with_capacity(n * actions);
    let mut moves = vec![0usize; actions];
    for s in 0..n {
        for (b, m) in moves.iter_mut().enumerate() {
            *m = step(dims, wrap, s, b);
        }
        for a in 0..actions {
            if cfg.reward.absorbing && goal[s] {
                transitions.push(vec![(1.0, s)]);
                continue;
            }
            let mut row: Vec<(f64, usize)> = Vec::with_capacity(actions + 1);
            let mut add = |p: f64, t: usize| {
                if p <= 0.0 {
                    return;
                }
                match row.iter_mut().find(|(_, x)| *x == t) {
                    Some(e) => e.0 += p,
                    None => row.push((p, t)),
                }
            };
            add(1.0 - cfg.slip_prob, moves[a]);
            for &m in &moves {
                add(slip_each, m);
            }
            row.sort_by_key(|&(_, t)| t);
            transitions.push(row);
        }
    }
    let rewards = state_reward.iter().map(|&r| vec![r; actions]).collect();
    let spec = MdpSpec::new(
        n,
        actions,
        gamma,
        rewards,
        transitions,
        Metric::Lattice {
            dims: dims.clone(),
            wrap,
        },
    )?;
    Ok(scale_rewards(&spec))
}

/// Affine map of all rewards onto `[0, 1]`; a constant reward table maps to 0.
pub fn scale_rewards(spec: &MdpSpec) -> MdpSpec {
    let (lo, hi) = spec
        .rewards()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
            (lo.min(r), hi.max(r))
        });
    let scaled = if hi > lo {
        spec.rewards()
            .iter()
            .map(|&r| (r - lo) / (hi - lo))
            .collect()
    } else {
        vec![0.0; spec.rewards().len()]
    };
    spec.with_rewards(scaled)
}

/// The most-square two-factor split `[S / d, d]` with `d <= sqrt(S)` maximal.
pub fn most_square_dims(states: usize) -> Vec<usize> {
    let mut d = (states as f64).sqrt() as usize;
    while d > 1 && !states.is_multiple_of(d) {
        d -= 1;
    }
    let d = d.max(1);
    vec![states / d, d]
}

/// One config per size: most-square 2-D dims, everything else from `base`,
/// seed derived from the base seed and the size.
pub fn size_sweep_configs(
    base: &LatticeConfig,
    sizes: &[usize],
) -> Result<Vec<LatticeConfig>, EnvError> {
    if sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(EnvError::Config("sizes must be sorted ascending".into()));
    }
    sizes
        .iter()
        .map(|&s| {
            if s < 2 {
                return Err(EnvError::Config(format!("size {s} < 2")));
            }
            Ok(LatticeConfig {
                dims: most_square_dims(s),
                seed: derive_seed(base.seed, s as u64),
                ..base.clone()
            })
        })
        .collect()
}

pub fn size_sweep(
    base: &LatticeConfig,
    sizes: &[usize],
    gamma: f64,
) -> Result<Vec<MdpSpec>, EnvError> {
    size_sweep_configs(base, sizes)?
        .iter()
        .map(|cfg| make_lattice(cfg, gamma))
        .collect()
}
