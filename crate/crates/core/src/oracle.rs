//! Brute-force reference implementations that apply the definitions
//! literally. Quadratic or cubic; meant for small sets and tests.

use crate::extraction::{Clause, Corner, CornerSet, RankedPoint};
use crate::pointset::{PlanarPoint, PlanarPointSet};

fn strictly_sw_count(points: &[PlanarPoint], t: f64, x: f64) -> usize {
    points.iter().filter(|b| b.t < t && b.x < x).count()
}

/// Pairwise dominance count for every point. O(n^2).
pub fn initial_ranks(ps: &PlanarPointSet) -> Vec<RankedPoint> {
    let points = ps.points();
    points
        .iter()
        .map(|a| RankedPoint {
            point: *a,
            initial_rank: 1 + strictly_sw_count(points, a.t, a.x),
        })
        .collect()
}

pub fn k_records(ps: &PlanarPointSet, k: usize) -> Vec<PlanarPoint> {
    initial_ranks(ps)
        .into_iter()
        .filter(|r| r.initial_rank == k)
        .map(|r| r.point)
        .collect()
}

/// Tests both clauses on every atom and on every grid point built from
/// one atom's time and another atom's value. O(n^3).
pub fn k_corners(ps: &PlanarPointSet, k: usize) -> CornerSet {
    assert!(k >= 1, "k must be at least 1");
    let points = ps.points();
    let mut corners = Vec::new();
    for a in points {
        if strictly_sw_count(points, a.t, a.x) == k - 1 {
            corners.push(Corner {
                point: *a,
                clause: Clause::I,
            });
        }
    }
    if k >= 2 {
        // grid point (d.t, c.x): c lies strictly west, d strictly south
        for d in points {
            for c in points {
                if c.t < d.t && d.x < c.x && strictly_sw_count(points, d.t, c.x) == k - 2 {
                    corners.push(Corner {
                        point: PlanarPoint { t: d.t, x: c.x },
                        clause: Clause::II,
                    });
                }
            }
        }
    }
    corners.sort_by(|a, b| a.point.t.total_cmp(&b.point.t));
    CornerSet { k, corners }
}

/// The k-th smallest value among points with arrival time `<= t`.
pub fn kth_min_value(ps: &PlanarPointSet, k: usize, t: f64) -> Option<f64> {
    let mut xs: Vec<f64> = ps.points().iter().filter(|p| p.t <= t).map(|p| p.x).collect();
    xs.sort_by(f64::total_cmp);
    xs.get(k - 1).copied()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::Window;

    #[test]
    fn worked_example() {
        let points = vec![
            PlanarPoint { t: 1.0, x: 3.0 },
            PlanarPoint { t: 2.0, x: 1.0 },
            PlanarPoint { t: 3.0, x: 2.0 },
        ];
        let ps = PlanarPointSet::new(points, Window::rectangle(4.0, 4.0).unwrap()).unwrap();
        let cs = k_corners(&ps, 2);
        assert_eq!(cs.len(), 2);
        assert_eq!(cs.corners[0].point, PlanarPoint { t: 2.0, x: 3.0 });
        assert_eq!(cs.corners[0].clause, Clause::II);
        assert_eq!(cs.corners[1].clause, Clause::I);
        assert_eq!(kth_min_value(&ps, 2, 2.5), Some(3.0));
        assert_eq!(kth_min_value(&ps, 3, 2.5), None);
    }
}
