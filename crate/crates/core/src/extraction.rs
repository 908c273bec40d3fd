//! Initial ranks, k-records, k-corners, the k-th minimum step path and its
//! flats.
//!
//! All sweeps run over the time-ordered points of a [`PlanarPointSet`]. The
//! brute-force counterparts live in [`crate::oracle`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointset::{PlanarPoint, PlanarPointSet};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedPoint {
    pub point: PlanarPoint,
    pub initial_rank: usize,
}

/// Which defining clause a k-corner satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Clause {
    /// An atom with exactly `k - 1` atoms strictly south-west.
    I,
    /// A grid point with an atom strictly west, an atom strictly south and
    /// exactly `k - 2` atoms strictly south-west.
    II,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::I => "I",
            Clause::II => "II",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub point: PlanarPoint,
    pub clause: Clause,
}

impl Corner {
    /// Clause-I corners are exactly the k-records.
    pub fn is_record(&self) -> bool {
        self.clause == Clause::I
    }
}

/// The k-corners of a point set, time-ordered. Along the sequence `t`
/// strictly increases and `x` strictly decreases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerSet {
    pub k: usize,
    pub corners: Vec<Corner>,
}

impl CornerSet {
    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    pub fn records(&self) -> Vec<PlanarPoint> {
        self.corners
            .iter()
            .filter(|c| c.is_record())
            .map(|c| c.point)
            .collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.corners.iter().map(|c| c.point.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.corners.iter().map(|c| c.point.x).collect()
    }

    /// Swap coordinates of every corner; clauses are preserved.
    pub fn reflect(&self) -> CornerSet {
        CornerSet {
            k: self.k,
            corners: self
                .corners
                .iter()
                .rev()
                .map(|c| Corner {
                    point: c.point.reflect(),
                    clause: c.clause,
                })
                .collect(),
        }
    }
}

/// The right-continuous step function `t -> M_t`, stored as its jumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepPath {
    pub k: usize,
    /// `(time, value)` with time strictly increasing and value strictly
    /// decreasing.
    pub jumps: Vec<(f64, f64)>,
    pub horizon: f64,
}

impl StepPath {
    /// Value at time `t`, or `None` before the first jump or past the horizon.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        if t > self.horizon {
            return None;
        }
        let i = self.jumps.partition_point(|j| j.0 <= t);
        if i == 0 {
            None
        } else {
            Some(self.jumps[i - 1].1)
        }
    }
}

/// A completed flat of the step path: its duration and its value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkedLifetime {
    pub s: f64,
    pub x: f64,
}

/// Binary indexed tree over `0..n` counting inserted positions.
struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self {
            tree: vec![0; n + 1],
        }
    }

    fn insert(&mut self, pos: usize) {
        let mut i = pos + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of inserted positions strictly below `pos`.
    fn count_below(&self, pos: usize) -> usize {
        let mut i = pos;
        let mut total = 0usize;
        while i > 0 {
            total += self.tree[i] as usize;
            i &= i - 1;
        }
        total
    }
}

/// Position of every point in ascending value order.
fn value_ranks(points: &[PlanarPoint]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_unstable_by(|&a, &b| points[a].x.total_cmp(&points[b].x));
    let mut rank = vec![0; points.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    rank
}

/// Initial rank of every point, in time order. O(n log n).
pub fn initial_ranks(ps: &PlanarPointSet) -> Vec<RankedPoint> {
    let points = ps.points();
    let xr = value_ranks(points);
    let mut fen = Fenwick::new(points.len());
    points
        .iter()
        .zip(&xr)
        .map(|(p, &r)| {
            let below = fen.count_below(r);
            fen.insert(r);
            RankedPoint {
                point: *p,
                initial_rank: below + 1,
            }
        })
        .collect()
}

/// Points of initial rank exactly `k`, in time order.
///
/// Panics if `k == 0`.
pub fn k_records(ps: &PlanarPointSet, k: usize) -> Vec<PlanarPoint> {
    assert!(k >= 1, "k must be at least 1");
    initial_ranks(ps)
        .into_iter()
        .filter(|r| r.initial_rank == k)
        .map(|r| r.point)
        .collect()
}

#[derive(Clone, Copy, PartialEq)]
struct Val(f64);

impl Eq for Val {}

impl PartialOrd for Val {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Val {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// The k-corners: every time the k-th smallest value seen so far changes.
///
/// A size-k max-heap holds the k smallest values. O(n log k).
///
/// Panics if `k == 0`.
pub fn k_corners(ps: &PlanarPointSet, k: usize) -> CornerSet {
    assert!(k >= 1, "k must be at least 1");
    let mut heap: BinaryHeap<Val> = BinaryHeap::with_capacity(k + 1);
    let mut corners = Vec::new();
    for p in ps.points() {
        let changed = if heap.len() < k {
            heap.push(Val(p.x));
            heap.len() == k
        } else if p.x < heap.peek().map_or(f64::INFINITY, |v| v.0) {
            heap.pop();
            heap.push(Val(p.x));
            true
        } else {
            false
        };
        if changed {
            let v = heap.peek().map(|v| v.0).unwrap_or(p.x);
            corners.push(Corner {
                point: PlanarPoint { t: p.t, x: v },
                clause: if v == p.x { Clause::I } else { Clause::II },
            });
        }
    }
    CornerSet { k, corners }
}

/// The k-th minimum path up to `horizon`.
///
/// Computed by its own sweep, keeping the k smallest values in a sorted
/// vector, so it can be checked against [`k_corners`].
pub fn kth_min_path(ps: &PlanarPointSet, k: usize, horizon: f64) -> Result<StepPath> {
    assert!(k >= 1, "k must be at least 1");
    if !(horizon > 0.0 && horizon <= ps.window_t()) {
        return Err(Error::Precondition(format!(
            "horizon {horizon} must lie in (0, {}]",
            ps.window_t()
        )));
    }
    let mut smallest: Vec<f64> = Vec::with_capacity(k + 1);
    let mut jumps = Vec::new();
    for p in ps.points().iter().take_while(|p| p.t <= horizon) {
        let pos = smallest.partition_point(|&v| v < p.x);
        if pos >= k {
            continue;
        }
        smallest.insert(pos, p.x);
        smallest.truncate(k);
        if smallest.len() == k {
            jumps.push((p.t, smallest[k - 1]));
        }
    }
    Ok(StepPath { k, jumps, horizon })
}

/// Completed flats of the path. The final flat, cut by the horizon, is
/// dropped.
pub fn lifetimes(path: &StepPath) -> Vec<MarkedLifetime> {
    path.jumps
        .windows(2)
        .map(|w| MarkedLifetime {
            s: w[1].0 - w[0].0,
            x: w[0].1,
        })
        .collect()
}

/// Trial counts between consecutive k-records.
///
/// After a record of value `x` every later arrival below `x` is a trial;
/// the count for a gap is the number of such arrivals up to and including
/// the next record. `rec` must be the clause-I subset of `cs`. Gaps whose
/// trials could fall outside the window (window height at the closing
/// record below `x`) are skipped.
pub fn record_gap_counts(
    ps: &PlanarPointSet,
    cs: &CornerSet,
    rec: &[PlanarPoint],
) -> Result<Vec<u64>> {
    let clause_one: Vec<PlanarPoint> = cs.records();
    if clause_one.len() != rec.len() || clause_one.iter().zip(rec).any(|(a, b)| a != b) {
        return Err(Error::Consistency(
            "records are not the clause-I subset of the corner set".into(),
        ));
    }
    let points = ps.points();
    let mut out = Vec::with_capacity(rec.len().saturating_sub(1));
    for w in rec.windows(2) {
        let (a, b) = (w[0], w[1]);
        if ps.window().height_at(b.t) < a.x {
            continue;
        }
        let lo = points.partition_point(|p| p.t <= a.t);
        let hi = points.partition_point(|p| p.t <= b.t);
        let n = points[lo..hi].iter().filter(|p| p.x < a.x).count();
        out.push(n as u64);
    }
    Ok(out)
}

/// One plus the number of corners strictly between consecutive clause-I
/// corners.
pub fn corner_gap_counts(cs: &CornerSet) -> Vec<u64> {
    let idx: Vec<usize> = cs
        .corners
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_record())
        .map(|(i, _)| i)
        .collect();
    idx.windows(2).map(|w| (w[1] - w[0]) as u64).collect()
}

/// The `k` smallest values among points with arrival time `<= t`, ascending,
/// or `None` if fewer than `k` points have arrived.
pub fn order_statistics_at(ps: &PlanarPointSet, t: f64, k: usize) -> Option<Vec<f64>> {
    assert!(k >= 1, "k must be at least 1");
    let n = ps.points().partition_point(|p| p.t <= t);
    if n < k {
        return None;
    }
    let mut xs: Vec<f64> = ps.points()[..n].iter().map(|p| p.x).collect();
    if n > k {
        xs.select_nth_unstable_by(k - 1, f64::total_cmp);
        xs.truncate(k);
    }
    xs.sort_unstable_by(f64::total_cmp);
    Some(xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::Window;

    fn pts(v: &[(f64, f64)]) -> PlanarPointSet {
        let points = v.iter().map(|&(t, x)| PlanarPoint { t, x }).collect();
        PlanarPointSet::new(points, Window::rectangle(4.0, 4.0).unwrap()).unwrap()
    }

    fn example() -> PlanarPointSet {
        pts(&[(1.0, 3.0), (2.0, 1.0), (3.0, 2.0)])
    }

    #[test]
    fn ranks_of_small_sets() {
        let r: Vec<usize> = initial_ranks(&example()).iter().map(|r| r.initial_rank).collect();
        assert_eq!(r, vec![1, 1, 2]);
        let chain = pts(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]);
        let r: Vec<usize> = initial_ranks(&chain).iter().map(|r| r.initial_rank).collect();
        assert_eq!(r, vec![1, 2, 3]);
        assert!(initial_ranks(&pts(&[])).is_empty());
    }

    #[test]
    fn records_of_example() {
        let ps = example();
        assert_eq!(
            k_records(&ps, 1),
            vec![PlanarPoint { t: 1.0, x: 3.0 }, PlanarPoint { t: 2.0, x: 1.0 }]
        );
        assert_eq!(k_records(&ps, 2), vec![PlanarPoint { t: 3.0, x: 2.0 }]);
        assert!(k_records(&ps, 4).is_empty());
    }

    #[test]
    fn corners_of_example() {
        let cs = k_corners(&example(), 2);
        assert_eq!(
            cs.corners,
            vec![
                Corner {
                    point: PlanarPoint { t: 2.0, x: 3.0 },
                    clause: Clause::II
                },
                Corner {
                    point: PlanarPoint { t: 3.0, x: 2.0 },
                    clause: Clause::I
                },
            ]
        );
        assert!(k_corners(&example(), 4).is_empty());
        let one = k_corners(&example(), 1);
        assert!(one.corners.iter().all(|c| c.is_record()));
        assert_eq!(one.records(), k_records(&example(), 1));
    }

    #[test]
    fn path_and_lifetimes_of_example() {
        let path = kth_min_path(&example(), 2, 4.0).unwrap();
        assert_eq!(path.jumps, vec![(2.0, 3.0), (3.0, 2.0)]);
        assert_eq!(lifetimes(&path), vec![MarkedLifetime { s: 1.0, x: 3.0 }]);
        assert_eq!(path.value_at(1.5), None);
        assert_eq!(path.value_at(2.0), Some(3.0));
        assert_eq!(path.value_at(3.9), Some(2.0));
        let short = kth_min_path(&example(), 2, 2.5).unwrap();
        assert!(lifetimes(&short).is_empty());
        assert!(kth_min_path(&example(), 2, 5.0).is_err());
    }

    #[test]
    fn gap_counts() {
        // (3, 3.0) arrives above the running minimum and is not a trial
        let ps = pts(&[(1.0, 3.5), (2.0, 2.5), (3.0, 3.0), (4.0, 1.0)]);
        let cs = k_corners(&ps, 1);
        let rec = k_records(&ps, 1);
        assert_eq!(rec.len(), 3);
        assert_eq!(record_gap_counts(&ps, &cs, &rec).unwrap(), vec![1, 1]);
        assert_eq!(corner_gap_counts(&cs), vec![1, 1]);

        let ps = example();
        let cs = k_corners(&ps, 2);
        let rec = k_records(&ps, 2);
        assert!(record_gap_counts(&ps, &cs, &rec).unwrap().is_empty());
        let wrong = vec![PlanarPoint { t: 2.0, x: 3.0 }];
        assert!(matches!(
            record_gap_counts(&ps, &cs, &wrong),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn gap_counts_count_non_record_trials() {
        // ranks 1, 2, 1, 4, 2
        let v = [(1.0, 2.0), (2.0, 3.0), (3.0, 1.0), (3.5, 3.5), (5.0, 1.5)];
        let points = v.iter().map(|&(t, x)| PlanarPoint { t, x }).collect();
        let ps = PlanarPointSet::new(points, Window::rectangle(6.0, 4.0).unwrap()).unwrap();
        let cs = k_corners(&ps, 2);
        let rec = k_records(&ps, 2);
        assert_eq!(rec, vec![PlanarPoint { t: 2.0, x: 3.0 }, PlanarPoint { t: 5.0, x: 1.5 }]);
        // trials below 3 after t=2: (3,1) and (5,1.5)
        assert_eq!(record_gap_counts(&ps, &cs, &rec).unwrap(), vec![2]);
        // corners: (2,3) I, (3,2) II, (5,1.5) I
        assert_eq!(cs.len(), 3);
        assert_eq!(corner_gap_counts(&cs), vec![2]);
    }

    #[test]
    fn order_statistics() {
        let ps = example();
        assert_eq!(order_statistics_at(&ps, 2.5, 2), Some(vec![1.0, 3.0]));
        assert_eq!(order_statistics_at(&ps, 3.0, 2), Some(vec![1.0, 2.0]));
        assert_eq!(order_statistics_at(&ps, 0.5, 1), None);
    }
}
