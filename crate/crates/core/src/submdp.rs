//! Local approximation: truncated sub-MDPs, error envelopes, overlapping
//! center plans and fusion of overlapping estimates.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{overlap_bound, BoundInputs};
use crate::graph::{BallScratch, UnitGraph};
use crate::mdp::{MdpError, MdpSpec, Metric};
use crate::util::{ceil_tol, in_open_unit, log_base};

#[derive(Debug, Error)]
pub enum SubMdpError {
    #[error("{name} = {value} is outside (0, 1)")]
    Domain { name: &'static str, value: f64 },
    #[error("center {center} out of range for {states} states")]
    InvalidCenter { center: usize, states: usize },
    #[error("no estimates to fuse")]
    EmptyInput,
    #[error("error bound {0} must be positive")]
    NonPositiveErrorBound(f64),
    #[error(transparent)]
    Mdp(#[from] MdpError),
}

fn check_unit(name: &'static str, value: f64) -> Result<(), SubMdpError> {
    if in_open_unit(value) {
        Ok(())
    } else {
        Err(SubMdpError::Domain { name, value })
    }
}

/// Smallest horizon `T >= log_γ(ε(1-γ))`, at least 1. A state further than
/// `T` transitions from `s` changes `V*(s)` by less than `ε`.
pub fn truncation_radius(epsilon: f64, gamma: f64) -> Result<u32, SubMdpError> {
    check_unit("epsilon", epsilon)?;
    check_unit("gamma", gamma)?;
    let t = ceil_tol(log_base(epsilon * (1.0 - gamma), gamma));
    Ok(t.max(1.0) as u32)
}

/// `ceil(log_γ 0.5)`: the distance within which a center's value estimate
/// is at most twice as loose as at the center itself.
pub fn coverage_radius(gamma: f64) -> Result<u32, SubMdpError> {
    check_unit("gamma", gamma)?;
    Ok(ceil_tol(log_base(0.5, gamma)).max(1.0) as u32)
}

/// Worst-case value error `ε / γ^d` at distance `d` from a sub-MDP center.
pub fn error_envelope(epsilon: f64, gamma: f64, distance: f64) -> f64 {
    epsilon / gamma.powf(distance)
}

/// Result of [`submdp_size_bound`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizeBound {
    Finite(u64),
    /// The bound does not fit in `u64`.
    Saturated,
}

impl SizeBound {
    /// True when no sub-MDP of this size is smaller than the parent.
    pub fn exceeds(&self, states: u64) -> bool {
        match self {
            SizeBound::Finite(b) => *b > states,
            SizeBound::Saturated => true,
        }
    }
}

/// `ceil(radius^A)` with the unrounded radius `log_γ(ε(1-γ))`, a lattice
/// ball-volume bound on the number of sub-MDP states.
pub fn submdp_size_bound(epsilon: f64, gamma: f64, actions: u32) -> Result<SizeBound, SubMdpError> {
    check_unit("epsilon", epsilon)?;
    check_unit("gamma", gamma)?;
    let radius = log_base(epsilon * (1.0 - gamma), gamma).max(1.0);
    let raw = radius.powf(actions as f64);
    if !raw.is_finite() || raw >= u64::MAX as f64 {
        return Ok(SizeBound::Saturated);
    }
    Ok(SizeBound::Finite(ceil_tol(raw).max(1.0) as u64))
}

/// A ball `{s : D(center, s) < radius}` of a parent MDP, closed off by
/// turning every transition that leaves the ball into a self-loop.
#[derive(Clone, Debug)]
pub struct SubMdp<'a> {
    parent: &'a MdpSpec,
    center: usize,
    radius: u32,
    /// Parent indices, sorted; local index `i` is `members[i]`.
    members: Vec<usize>,
    /// Parent hop distance from the center, per local index.
    distances: Vec<u32>,
    local: MdpSpec,
}

impl<'a> SubMdp<'a> {
    pub fn parent(&self) -> &'a MdpSpec {
        self.parent
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn member_states(&self) -> &[usize] {
        &self.members
    }

    pub fn local_spec(&self) -> &MdpSpec {
        &self.local
    }

    pub fn local_center(&self) -> usize {
        self.to_local(self.center).expect("center is a member")
    }

    pub fn to_parent(&self, local: usize) -> usize {
        self.members[local]
    }

    pub fn to_local(&self, parent: usize) -> Option<usize> {
        self.members.binary_search(&parent).ok()
    }

    /// Hop distance from the center to a member, by local index.
    pub fn distance_to_center(&self, local: usize) -> u32 {
        self.distances[local]
    }
}

/// Carves the sub-MDP of radius `truncation_radius(ε, γ)` around `center`.
pub fn build_submdp(
    parent: &MdpSpec,
    center: usize,
    epsilon: f64,
) -> Result<SubMdp<'_>, SubMdpError> {
    let radius = truncation_radius(epsilon, parent.discount())?;
    build_submdp_with_radius(parent, center, radius, &UnitGraph::from_spec(parent))
}

/// [`build_submdp`] with an explicit radius and a prebuilt graph.
pub fn build_submdp_with_radius<'a>(
    parent: &'a MdpSpec,
    center: usize,
    radius: u32,
    graph: &UnitGraph,
) -> Result<SubMdp<'a>, SubMdpError> {
    let n = parent.num_states();
    if center >= n {
        return Err(SubMdpError::InvalidCenter { center, states: n });
    }
    let radius = radius.max(1);
    let mut ball = graph.ball(center, radius - 1);
    ball.sort_unstable();
    let (members, distances): (Vec<usize>, Vec<u32>) = ball.into_iter().unzip();

    let na = parent.num_actions();
    let mut rewards = Vec::with_capacity(members.len());
    let mut transitions = Vec::with_capacity(members.len() * na);
    for (local, &s) in members.iter().enumerate() {
        rewards.push((0..na).map(|a| parent.reward(s, a)).collect());
        for a in 0..na {
            let (next, probs) = parent.row(s, a);
            let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
            for (&t, &p) in next.iter().zip(probs) {
                let target = members.binary_search(&t).unwrap_or(local);
                *merged.entry(target).or_insert(0.0) += p;
            }
            transitions.push(merged.into_iter().map(|(t, p)| (p, t)).collect());
        }
    }
    let local = MdpSpec::new(
        members.len(),
        na,
        parent.discount(),
        rewards,
        transitions,
        Metric::Hops,
    )?;
    Ok(SubMdp {
        parent,
        center,
        radius,
        members,
        distances,
        local,
    })
}

/// Overlapping sub-MDP centers so that every state sees enough independent
/// estimates within the coverage radius.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoveragePlan {
    pub centers: Vec<usize>,
    #[serde(skip)]
    pub per_state_cover_count: Vec<usize>,
    pub coverage_radius: u32,
    pub target_overlap: usize,
    /// States whose coverage ball holds fewer than `target_overlap` states;
    /// their requirement is the ball size instead.
    pub clamped_states: Vec<usize>,
}

impl CoveragePlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    /// Requirement for state `s` given its coverage-ball size.
    pub fn requirement(&self, ball_size: usize) -> usize {
        self.target_overlap.min(ball_size)
    }
}

/// Greedy covering: repeatedly add the center whose coverage ball holds the
/// most under-covered states, lowest index first on ties.
pub fn plan_centers(spec: &MdpSpec, epsilon: f64, delta: f64) -> Result<CoveragePlan, SubMdpError> {
    check_unit("epsilon", epsilon)?;
    check_unit("delta", delta)?;
    let n = spec.num_states();
    let inputs = BoundInputs {
        epsilon,
        delta,
        gamma: spec.discount(),
        states: n as u64,
        actions: spec.num_actions() as u64,
    };
    let target = overlap_bound(&inputs)
        .map_err(|_| SubMdpError::Domain {
            name: "gamma",
            value: spec.discount(),
        })?
        .value
        .min(usize::MAX as u64) as usize;
    let radius = coverage_radius(spec.discount())?;
    Ok(plan_with_target(spec, radius, target))
}

/// Greedy covering with an explicit radius and overlap target.
pub fn plan_with_target(spec: &MdpSpec, radius: u32, target: usize) -> CoveragePlan {
    let n = spec.num_states();
    let graph = UnitGraph::from_spec(spec);
    let mut scratch = BallScratch::new(n);
    let mut buf = Vec::new();
    let balls: Vec<Vec<u32>> = (0..n)
        .map(|s| {
            scratch.ball_into(&graph, s, radius, &mut buf);
            let mut b: Vec<u32> = buf.iter().map(|&(t, _)| t as u32).collect();
            b.sort_unstable();
            b
        })
        .collect();
    let required: Vec<usize> = balls.iter().map(|b| target.min(b.len())).collect();
    let clamped_states = (0..n).filter(|&s| balls[s].len() < target).collect();
    let mut deficit: Vec<usize> = required.clone();
    let mut chosen = vec![false; n];
    let mut centers = Vec::new();

    let gain = |c: usize, deficit: &[usize]| {
        balls[c]
            .iter()
            .filter(|&&s| deficit[s as usize] > 0)
            .count()
    };
    // Gains only shrink, so stale heap keys are upper bounds (lazy greedy).
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> =
        (0..n).map(|c| (gain(c, &deficit), Reverse(c))).collect();
    while let Some((_, Reverse(c))) = heap.pop() {
        if chosen[c] {
            continue;
        }
        let g = gain(c, &deficit);
        if g == 0 {
            continue;
        }
        if let Some(&top) = heap.peek() {
            if (g, Reverse(c)) < top {
                heap.push((g, Reverse(c)));
                continue;
            }
        }
        chosen[c] = true;
        centers.push(c);
        for &s in &balls[c] {
            let d = &mut deficit[s as usize];
            *d = d.saturating_sub(1);
        }
    }
    centers.sort_unstable();
    let mut per_state_cover_count = vec![0usize; n];
    for &c in &centers {
        for &s in &balls[c] {
            per_state_cover_count[s as usize] += 1;
        }
    }
    CoveragePlan {
        centers,
        per_state_cover_count,
        coverage_radius: radius,
        target_overlap: target,
        clamped_states,
    }
}

/// Mean of overlapping estimates with the concentration tail of the mean.
#[derive(Clone, Debug, PartialEq)]
pub struct FusedEstimate {
    pub value: f64,
    error_bounds: Vec<f64>,
}

impl FusedEstimate {
    pub fn count(&self) -> usize {
        self.error_bounds.len()
    }

    /// `P(|mean - V*| >= ε) <= 2 exp(-2 N² ε² / Σ (2 ε_i)²)`.
    pub fn tail_bound(&self, epsilon: f64) -> f64 {
        crate::bounds::fusion_tail_squared(self.count(), epsilon, &self.error_bounds)
    }

    /// The same tail with the range sum left unsquared.
    pub fn tail_bound_unsquared(&self, epsilon: f64) -> f64 {
        crate::bounds::fusion_tail_unsquared(self.count(), epsilon, &self.error_bounds)
    }
}

/// Fuses `(value, error_bound)` pairs by their arithmetic mean.
pub fn fuse_estimates(estimates: &[(f64, f64)]) -> Result<FusedEstimate, SubMdpError> {
    if estimates.is_empty() {
        return Err(SubMdpError::EmptyInput);
    }
    if let Some(&(_, e)) = estimates.iter().find(|(_, e)| !(*e > 0.0)) {
        return Err(SubMdpError::NonPositiveErrorBound(e));
    }
    let value = estimates.iter().map(|(v, _)| v).sum::<f64>() / estimates.len() as f64;
    Ok(FusedEstimate {
        value,
        error_bounds: estimates.iter().map(|&(_, e)| e).collect(),
    })
}
