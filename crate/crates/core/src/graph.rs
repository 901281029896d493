//! Undirected one-step reachability graph and breadth-first balls.

use std::collections::VecDeque;

use crate::mdp::MdpSpec;

/// Undirected graph whose edges join `s` and `s'` whenever some action moves
/// `s` to `s'` (or back) with nonzero probability. Under the locality
/// property every edge has unit metric length, so BFS depth is the
/// transition distance.
#[derive(Clone, Debug)]
pub struct UnitGraph {
    offsets: Vec<usize>,
    adjacency: Vec<u32>,
}

impl UnitGraph {
    pub fn from_spec(spec: &MdpSpec) -> Self {
        let n = spec.num_states();
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];
        for s in 0..n {
            for a in 0..spec.num_actions() {
                let (next, probs) = spec.row(s, a);
                for (&t, &p) in next.iter().zip(probs) {
                    if p > 0.0 && t != s {
                        lists[s].push(t as u32);
                        lists[t].push(s as u32);
                    }
                }
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut adjacency = Vec::new();
        offsets.push(0);
        for mut l in lists {
            l.sort_unstable();
            l.dedup();
            adjacency.extend_from_slice(&l);
            offsets.push(adjacency.len());
        }
        Self { offsets, adjacency }
    }

    pub fn num_states(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn neighbors(&self, s: usize) -> &[u32] {
        &self.adjacency[self.offsets[s]..self.offsets[s + 1]]
    }

    /// Hop distance from `src` to every state; unreachable states get `u32::MAX`.
    pub fn distances_from(&self, src: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.num_states()];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(s) = queue.pop_front() {
            for &t in self.neighbors(s) {
                let t = t as usize;
                if dist[t] == u32::MAX {
                    dist[t] = dist[s] + 1;
                    queue.push_back(t);
                }
            }
        }
        dist
    }

    /// States at hop distance `<= max_depth` from `center`, with their
    /// distances, in BFS order.
    pub fn ball(&self, center: usize, max_depth: u32) -> Vec<(usize, u32)> {
        let mut scratch = BallScratch::new(self.num_states());
        let mut out = Vec::new();
        scratch.ball_into(self, center, max_depth, &mut out);
        out
    }
}

/// Reusable BFS buffers; `ball_into` costs `O(|ball| * degree)` with no
/// allocation after warm-up.
#[derive(Clone, Debug)]
pub struct BallScratch {
    stamp: Vec<u32>,
    epoch: u32,
    queue: VecDeque<(usize, u32)>,
}

impl BallScratch {
    pub fn new(num_states: usize) -> Self {
        Self {
            stamp: vec![0; num_states],
            epoch: 0,
            queue: VecDeque::new(),
        }
    }

    pub fn ball_into(
        &mut self,
        graph: &UnitGraph,
        center: usize,
        max_depth: u32,
        out: &mut Vec<(usize, u32)>,
    ) {
        out.clear();
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        self.stamp[center] = epoch;
        self.queue.clear();
        self.queue.push_back((center, 0));
        while let Some((s, d)) = self.queue.pop_front() {
            out.push((s, d));
            if d == max_depth {
                continue;
            }
            for &t in graph.neighbors(s) {
                let t = t as usize;
                if self.stamp[t] != epoch {
                    self.stamp[t] = epoch;
                    self.queue.push_back((t, d + 1));
                }
            }
        }
    }
}
