//! The graph process coupled to the walk: every step `(i, j)` with `i != j`
//! adds the edge `{i, j}`, and a step `(i, i)` touches `i` without adding an edge.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measures::log_squared_floor;
use crate::simulator::{draw_pair, par_replicas, WalkState};

/// Union-find over `0..n` with path halving and union by rank.
#[derive(Debug, Clone)]
pub struct ComponentTracker {
    parent: Vec<u32>,
    rank: Vec<u8>,
    size: Vec<u32>,
    loop_touched: Vec<bool>,
    touched: Vec<bool>,
    untouched: usize,
    largest_root: u32,
    components: usize,
}

impl ComponentTracker {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            size: vec![1; n],
            loop_touched: vec![false; n],
            touched: vec![false; n],
            untouched: n,
            largest_root: 0,
            components: n,
        }
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] as usize != v {
            let grand = self.parent[self.parent[v] as usize];
            self.parent[v] = grand;
            v = grand as usize;
        }
        v
    }

    fn touch(&mut self, v: usize) {
        if !self.touched[v] {
            self.touched[v] = true;
            self.untouched -= 1;
        }
    }

    /// Records the step `(i, j)`.
    pub fn track_step(&mut self, i: usize, j: usize) {
        self.touch(i);
        self.touch(j);
        if i == j {
            self.loop_touched[i] = true;
            return;
        }
        let (a, b) = (self.find(i), self.find(j));
        if a == b {
            return;
        }
        let (root, child) = if self.rank[a] < self.rank[b] {
            (b, a)
        } else {
            (a, b)
        };
        self.parent[child] = root as u32;
        if self.rank[root] == self.rank[child] {
            self.rank[root] += 1;
        }
        self.size[root] += self.size[child];
        self.components -= 1;
        let largest = self.find(self.largest_root as usize);
        if self.size[root] > self.size[largest] || largest == child {
            self.largest_root = root as u32;
        } else {
            self.largest_root = largest as u32;
        }
    }

    pub fn component_count(&self) -> usize {
        self.components
    }

    pub fn component_size(&mut self, v: usize) -> usize {
        let r = self.find(v);
        self.size[r] as usize
    }

    pub fn largest_component_size(&mut self) -> usize {
        let r = self.find(self.largest_root as usize);
        self.size[r] as usize
    }

    /// Vertices of the largest component in increasing order. Among components of equal
    /// size, the one that first reached that size wins (vertex 0 when nothing is joined).
    pub fn largest_component(&mut self) -> Vec<usize> {
        let r = self.find(self.largest_root as usize);
        (0..self.n()).filter(|&v| self.find(v) == r).collect()
    }

    pub fn is_loop_touched(&self, v: usize) -> bool {
        self.loop_touched[v]
    }

    pub fn is_touched(&self, v: usize) -> bool {
        self.touched[v]
    }

    pub fn untouched_count(&self) -> usize {
        self.untouched
    }

    /// Whether the largest component is exactly the touched set and at most
    /// `floor(ln(n)^2)` vertices are untouched.
    pub fn giant_event(&mut self) -> bool {
        let n = self.n();
        self.untouched <= log_squared_floor(n)
            && self.largest_component_size() == n - self.untouched
    }
}

/// The permutation induced by `state` on the largest component of `tracker`, relabelled
/// so that the `k`-th smallest component vertex becomes `k`.
pub fn restricted_permutation(
    state: &WalkState,
    tracker: &mut ComponentTracker,
) -> Result<Vec<u32>> {
    if state.n() != tracker.n() {
        return invalid("walk and tracker sizes differ");
    }
    let members = tracker.largest_component();
    let mut dense = vec![u32::MAX; state.n()];
    for (k, &v) in members.iter().enumerate() {
        dense[v] = k as u32;
    }
    members
        .iter()
        .map(|&v| {
            let image = dense[state.perm()[v] as usize];
            if image == u32::MAX {
                Err(Error::Internal(format!(
                    "component of vertex {v} is not invariant"
                )))
            } else {
                Ok(image)
            }
        })
        .collect()
}

/// Walk and graph process run in lockstep.
#[derive(Debug, Clone)]
pub struct CoupledWalk {
    pub walk: WalkState,
    pub tracker: ComponentTracker,
}

impl CoupledWalk {
    pub fn new(n: usize) -> Self {
        Self {
            walk: WalkState::new(n),
            tracker: ComponentTracker::new(n),
        }
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> (usize, usize) {
        let (i, j) = draw_pair(self.walk.n(), rng);
        self.walk.apply_pair(i, j);
        self.tracker.track_step(i, j);
        (i, j)
    }

    pub fn run<R: Rng + ?Sized>(&mut self, steps: u64, rng: &mut R) {
        for _ in 0..steps {
            self.step(rng);
        }
    }

    pub fn restricted_permutation(&mut self) -> Result<Vec<u32>> {
        restricted_permutation(&self.walk, &mut self.tracker)
    }
}

/// Summary of one replica at a fixed time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GiantRecord {
    pub largest_component: usize,
    pub untouched: usize,
    pub event: bool,
    /// Fixed points of the walk restricted to the largest component.
    pub restricted_fixed_points: usize,
}

pub fn run_giant_replica<R: Rng + ?Sized>(n: usize, t: u64, rng: &mut R) -> Result<GiantRecord> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let mut cw = CoupledWalk::new(n);
    cw.run(t, rng);
    let restricted = cw.restricted_permutation()?;
    Ok(GiantRecord {
        largest_component: cw.tracker.largest_component_size(),
        untouched: cw.tracker.untouched_count(),
        event: cw.tracker.giant_event(),
        restricted_fixed_points: crate::perm::fixed_points(&restricted),
    })
}

pub fn run_giant_batch(n: usize, t: u64, replicas: u64, seed: u64) -> Result<Vec<GiantRecord>> {
    par_replicas(seed, replicas, |_, rng| run_giant_replica(n, t, rng))
        .into_iter()
        .collect()
}

/// Fraction of replicas in which the giant-component event fails at time `t`.
pub fn giant_event_frequency(n: usize, t: u64, replicas: u64, seed: u64) -> Result<f64> {
    if replicas == 0 {
        return invalid("replicas must be positive");
    }
    let records = run_giant_batch(n, t, replicas, seed)?;
    Ok(records.iter().filter(|r| !r.event).count() as f64 / replicas as f64)
}

/// CSV trace of one run with header `step,largest_component,untouched,event`.
pub fn write_trace_csv<R: Rng + ?Sized, W: Write>(
    n: usize,
    t: u64,
    rng: &mut R,
    mut out: W,
) -> Result<()> {
    let mut cw = CoupledWalk::new(n);
    let io = |e: std::io::Error| Error::Internal(e.to_string());
    writeln!(out, "step,largest_component,untouched,event").map_err(io)?;
    for step in 0..=t {
        if step > 0 {
            cw.step(rng);
        }
        let largest = cw.tracker.largest_component_size();
        let event = cw.tracker.giant_event();
        writeln!(
            out,
            "{step},{largest},{},{}",
            cw.tracker.untouched_count(),
            event as u8
        )
        .map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm;
    use crate::simulator::replica_rng;

    #[test]
    fn starts_isolated() {
        let mut t = ComponentTracker::new(5);
        assert_eq!(t.component_count(), 5);
        assert_eq!(t.largest_component_size(), 1);
        assert_eq!(t.largest_component(), vec![0]);
        assert!(!t.giant_event());
    }

    #[test]
    fn path_forms_one_component() {
        let mut t = ComponentTracker::new(5);
        t.track_step(0, 1);
        t.track_step(1, 2);
        assert_eq!(t.largest_component(), vec![0, 1, 2]);
        assert_eq!(t.component_count(), 3);
        t.track_step(4, 4);
        assert!(t.is_loop_touched(4));
        assert_eq!(t.untouched_count(), 1);
        // 4 is touched but outside the largest component
        assert!(!t.giant_event());
        t.track_step(4, 0);
        assert!(t.giant_event());
        assert_eq!(t.find(4), t.find(2));
    }

    #[test]
    fn largest_tracks_through_merges() {
        let mut t = ComponentTracker::new(8);
        t.track_step(5, 6);
        t.track_step(6, 7);
        t.track_step(0, 1);
        assert_eq!(t.largest_component(), vec![5, 6, 7]);
        t.track_step(1, 2);
        t.track_step(2, 3);
        assert_eq!(t.largest_component(), vec![0, 1, 2, 3]);
        t.track_step(3, 5);
        assert_eq!(t.largest_component_size(), 7);
    }

    #[test]
    fn touched_set_matches_walk_and_components_are_invariant() {
        let mut rng = replica_rng(13, 0);
        for _ in 0..200 {
            let mut cw = CoupledWalk::new(40);
            for _ in 0..rng.random_range(0..120) {
                cw.step(&mut rng);
                for v in 0..40 {
                    let nonsingleton = cw.tracker.component_size(v) > 1;
                    assert_eq!(
                        cw.walk.is_touched(v),
                        nonsingleton || cw.tracker.is_loop_touched(v)
                    );
                }
            }
            let r = cw.restricted_permutation().unwrap();
            assert!(perm::is_permutation(&r));
        }
    }

    #[test]
    fn restriction_by_hand() {
        let mut cw = CoupledWalk::new(6);
        for (i, j) in [(0, 2), (2, 4), (1, 1)] {
            cw.walk.apply_pair(i, j);
            cw.tracker.track_step(i, j);
        }
        // X = (0 2)(2 4) as image array
        assert_eq!(cw.walk.perm(), &[2, 1, 4, 3, 0, 5]);
        assert_eq!(cw.restricted_permutation().unwrap(), vec![1, 2, 0]);
        for v in [3, 5] {
            assert_eq!(cw.walk.perm()[v] as usize, v);
        }
    }

    #[test]
    fn zero_time_always_fails() {
        assert_eq!(giant_event_frequency(10, 0, 100, 1).unwrap(), 1.0);
    }

    #[test]
    fn trace_csv_rows() {
        let mut rng = replica_rng(1, 0);
        let mut buf = Vec::new();
        write_trace_csv(10, 5, &mut rng, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with("step,largest_component,untouched,event\n0,1,10,0\n"));
    }
}
