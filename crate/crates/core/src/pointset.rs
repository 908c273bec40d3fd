//! Planar and one-dimensional point configurations, the windowed unit
//! Poisson process, and the measure-preserving maps of the quadrant.

use serde::{Deserialize, Serialize};

use crate::error::{param, require_positive, Error, Result};
use crate::sampling::{poisson_count, RngStream};

/// An observation: value `x` seen at time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub t: f64,
    pub x: f64,
}

impl PlanarPoint {
    pub fn new(t: f64, x: f64) -> Result<Self> {
        require_positive("t", t)?;
        require_positive("x", x)?;
        Ok(Self { t, x })
    }

    /// Swap time and value.
    pub fn reflect(self) -> Self {
        Self { t: self.x, x: self.t }
    }

    /// `self` lies strictly south-west of `other`.
    #[inline]
    pub fn strictly_sw_of(&self, other: &PlanarPoint) -> bool {
        self.t < other.t && self.x < other.x
    }
}

/// A down-closed region of the quadrant: the union of origin-anchored
/// rectangles `(0, t_i] x (0, x_i]`.
///
/// Outer corners are stored with `t` strictly increasing and `x` strictly
/// decreasing. A single corner is the ordinary rectangle `(0, T] x (0, X]`.
/// Staircases under a hyperbola keep windowed extraction exact at a cost
/// logarithmic in the time range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    corners: Vec<(f64, f64)>,
}

impl Window {
    pub fn rectangle(t: f64, x: f64) -> Result<Self> {
        require_positive("window_t", t)?;
        require_positive("window_x", x)?;
        Ok(Self {
            corners: vec![(t, x)],
        })
    }

    pub fn staircase(corners: Vec<(f64, f64)>) -> Result<Self> {
        if corners.is_empty() {
            return param("a staircase window needs at least one corner");
        }
        for &(t, x) in &corners {
            require_positive("corner t", t)?;
            require_positive("corner x", x)?;
        }
        for pair in corners.windows(2) {
            if !(pair[0].0 < pair[1].0 && pair[0].1 > pair[1].1) {
                return param("staircase corners need t increasing and x decreasing");
            }
        }
        Ok(Self { corners })
    }

    /// Staircase under the hyperbola `t x = guard`.
    ///
    /// The block `(0, t_start]` has height `guard / t_start`; after that the
    /// time axis is cut at `t_start * ratio^i` and each step takes the height
    /// `guard / (left edge)`, up to `t_end`. Every `t >= t_start` then has
    /// `(0, t] x (0, guard / t]` inside the window, so the k-th smallest value
    /// seen by time `t` is exact unless fewer than `k` atoms fall in a region
    /// of area `guard`.
    pub fn hyperbolic(guard: f64, t_start: f64, t_end: f64, ratio: f64) -> Result<Self> {
        require_positive("guard", guard)?;
        require_positive("t_start", t_start)?;
        require_positive("t_end", t_end)?;
        if !(ratio > 1.0 && ratio.is_finite()) {
            return param(format!("step ratio must exceed 1, got {ratio}"));
        }
        if t_end <= t_start {
            return param("hyperbolic window needs t_start < t_end");
        }
        let mut corners = Vec::new();
        let mut left = t_start;
        loop {
            let right = (left * ratio).min(t_end);
            corners.push((right, guard / left));
            if right >= t_end {
                break;
            }
            left = right;
        }
        Self::staircase(corners)
    }

    pub fn corners(&self) -> &[(f64, f64)] {
        &self.corners
    }

    pub fn is_rectangle(&self) -> bool {
        self.corners.len() == 1
    }

    /// Largest time in the window.
    pub fn width(&self) -> f64 {
        self.corners.last().map(|c| c.0).unwrap_or(0.0)
    }

    /// Largest value in the window.
    pub fn height(&self) -> f64 {
        self.corners.first().map(|c| c.1).unwrap_or(0.0)
    }

    pub fn area(&self) -> f64 {
        self.strips().map(|(lo, hi, h)| (hi - lo) * h).sum()
    }

    /// Height of the window above time `t`, zero outside.
    pub fn height_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.corners
            .iter()
            .find(|c| t <= c.0)
            .map(|c| c.1)
            .unwrap_or(0.0)
    }

    pub fn contains(&self, p: &PlanarPoint) -> bool {
        p.t > 0.0 && p.x > 0.0 && p.x <= self.height_at(p.t)
    }

    pub fn reflect(&self) -> Self {
        Self {
            corners: self.corners.iter().rev().map(|&(t, x)| (x, t)).collect(),
        }
    }

    pub fn rescale(&self, c: f64) -> Self {
        Self {
            corners: self.corners.iter().map(|&(t, x)| (t / c, c * x)).collect(),
        }
    }

    /// Disjoint vertical strips `(t_lo, t_hi] x (0, height]`.
    pub fn strips(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.corners.iter().enumerate().map(move |(i, &(t, x))| {
            let lo = if i == 0 { 0.0 } else { self.corners[i - 1].0 };
            (lo, t, x)
        })
    }
}

/// A finite configuration of atoms inside a window, sorted by time, with
/// pairwise distinct times and pairwise distinct values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarPointSet {
    points: Vec<PlanarPoint>,
    window: Window,
}

impl PlanarPointSet {
    /// Validates window membership and coordinate distinctness. Points are
    /// sorted by time; a tie is reported against the 1-based input row of the
    /// later duplicate.
    pub fn new(points: Vec<PlanarPoint>, window: Window) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !(p.t.is_finite() && p.x.is_finite() && window.contains(p)) {
                return Err(Error::Validation {
                    row: i + 1,
                    message: format!("point ({}, {}) lies outside the window", p.t, p.x),
                });
            }
        }
        check_ties(&points)?;
        let mut points = points;
        points.sort_by(|a, b| a.t.total_cmp(&b.t));
        Ok(Self { points, window })
    }

    /// Points whose window is their bounding rectangle.
    pub fn bounding(points: Vec<PlanarPoint>) -> Result<Self> {
        let t = points.iter().map(|p| p.t).fold(0.0, f64::max);
        let x = points.iter().map(|p| p.x).fold(0.0, f64::max);
        let window = if points.is_empty() {
            Window::rectangle(1.0, 1.0)?
        } else {
            Window::rectangle(t, x)?
        };
        Self::new(points, window)
    }

    pub(crate) fn from_sorted_unchecked(points: Vec<PlanarPoint>, window: Window) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0].t < w[1].t));
        Self { points, window }
    }

    pub fn points(&self) -> &[PlanarPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn window_t(&self) -> f64 {
        self.window.width()
    }

    pub fn window_x(&self) -> f64 {
        self.window.height()
    }

    pub fn into_points(self) -> Vec<PlanarPoint> {
        self.points
    }
}

fn check_ties(points: &[PlanarPoint]) -> Result<()> {
    for (axis, key) in [("time", 0usize), ("value", 1)] {
        let coord = |p: &PlanarPoint| if key == 0 { p.t } else { p.x };
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| coord(&points[a]).total_cmp(&coord(&points[b])).then(a.cmp(&b)));
        for w in order.windows(2) {
            if coord(&points[w[0]]) == coord(&points[w[1]]) {
                return Err(Error::Validation {
                    row: w[0].max(w[1]) + 1,
                    message: format!("duplicate {axis} coordinate {}", coord(&points[w[1]])),
                });
            }
        }
    }
    Ok(())
}

/// Unit-intensity Poisson process on the rectangle `(0, T] x (0, X]`.
pub fn gen_unit_poisson(stream: &mut RngStream, window_t: f64, window_x: f64) -> Result<PlanarPointSet> {
    let window = Window::rectangle(window_t, window_x)?;
    Ok(gen_unit_poisson_in(stream, &window))
}

/// Unit-intensity Poisson process on any down-closed window.
///
/// Each strip draws a Poisson count and then uniform positions. Coordinate
/// ties are resolved by redrawing the offending coordinate inside its strip.
pub fn gen_unit_poisson_in(stream: &mut RngStream, window: &Window) -> PlanarPointSet {
    let strips: Vec<(f64, f64, f64)> = window.strips().collect();
    let mut points: Vec<PlanarPoint> = Vec::new();
    let mut strip_of: Vec<usize> = Vec::new();
    for (si, &(lo, hi, height)) in strips.iter().enumerate() {
        let n = poisson_count(stream, (hi - lo) * height).expect("strip area is finite") as usize;
        let start = points.len();
        for _ in 0..n {
            let t = stream.uniform_in(lo, hi);
            let x = stream.uniform() * height;
            points.push(PlanarPoint { t, x });
        }
        points[start..].sort_by(|a, b| a.t.total_cmp(&b.t));
        strip_of.resize(points.len(), si);
    }
    resolve_ties(stream, &mut points, &strip_of, &strips);
    PlanarPointSet::from_sorted_unchecked(points, window.clone())
}

fn resolve_ties(
    stream: &mut RngStream,
    points: &mut [PlanarPoint],
    strip_of: &[usize],
    strips: &[(f64, f64, f64)],
) {
    loop {
        let mut clean = true;
        for i in 1..points.len() {
            if points[i].t == points[i - 1].t {
                let (lo, hi, _) = strips[strip_of[i]];
                points[i].t = stream.uniform_in(lo, hi);
                clean = false;
            }
        }
        let mut by_x: Vec<usize> = (0..points.len()).collect();
        by_x.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x));
        for w in by_x.windows(2) {
            if points[w[0]].x == points[w[1]].x {
                let j = w[1];
                points[j].x = stream.uniform() * strips[strip_of[j]].2;
                clean = false;
            }
        }
        if clean {
            return;
        }
        // strips are disjoint in time, so sorting within each keeps global order
        let mut start = 0;
        while start < points.len() {
            let s = strip_of[start];
            let end = start + strip_of[start..].iter().take_while(|&&k| k == s).count();
            points[start..end].sort_by(|a, b| a.t.total_cmp(&b.t));
            start = end;
        }
    }
}

/// Reflection `(t, x) -> (x, t)` about the bisectrix.
pub fn reflect(ps: &PlanarPointSet) -> PlanarPointSet {
    let mut points: Vec<PlanarPoint> = ps.points.iter().map(|p| p.reflect()).collect();
    points.sort_by(|a, b| a.t.total_cmp(&b.t));
    PlanarPointSet::from_sorted_unchecked(points, ps.window.reflect())
}

/// Hyperbolic shift `(t, x) -> (t / c, c x)`.
pub fn hyperbolic_rescale(ps: &PlanarPointSet, c: f64) -> Result<PlanarPointSet> {
    require_positive("c", c)?;
    let points: Vec<PlanarPoint> = ps
        .points
        .iter()
        .map(|p| PlanarPoint {
            t: p.t / c,
            x: c * p.x,
        })
        .collect();
    if points.windows(2).any(|w| w[0].t >= w[1].t) {
        return Err(Error::Consistency(
            "rescaling collapsed two distinct times onto one float".into(),
        ));
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    xs.sort_by(f64::total_cmp);
    if xs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Consistency(
            "rescaling collapsed two distinct values onto one float".into(),
        ));
    }
    Ok(PlanarPointSet::from_sorted_unchecked(points, ps.window.rescale(c)))
}

/// A strictly increasing configuration of reals inside `[range_lo, range_hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundPointSet {
    points: Vec<f64>,
    range_lo: f64,
    range_hi: f64,
}

impl GroundPointSet {
    pub fn new(points: Vec<f64>, range_lo: f64, range_hi: f64) -> Result<Self> {
        if !(range_lo.is_finite() && range_hi.is_finite() && range_lo < range_hi) {
            return param(format!("invalid range [{range_lo}, {range_hi}]"));
        }
        for (i, &u) in points.iter().enumerate() {
            if !(u >= range_lo && u <= range_hi) {
                return Err(Error::Validation {
                    row: i + 1,
                    message: format!("point {u} outside [{range_lo}, {range_hi}]"),
                });
            }
            if i > 0 && points[i - 1] >= u {
                return Err(Error::Validation {
                    row: i + 1,
                    message: "points must be strictly increasing".into(),
                });
            }
        }
        Ok(Self {
            points,
            range_lo,
            range_hi,
        })
    }

    /// Sorted input, range checked by the caller; equal neighbours are kept.
    pub(crate) fn from_sorted_unchecked(points: Vec<f64>, range_lo: f64, range_hi: f64) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0] <= w[1]));
        Self {
            points,
            range_lo,
            range_hi,
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn range_lo(&self) -> f64 {
        self.range_lo
    }

    pub fn range_hi(&self) -> f64 {
        self.range_hi
    }

    /// Number of points in `[lo, hi)`.
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        let a = self.points.partition_point(|&u| u < lo);
        let b = self.points.partition_point(|&u| u < hi);
        b.saturating_sub(a)
    }
}

/// Natural logarithm of every point and of the range endpoints.
pub fn log_map(gs: &GroundPointSet) -> Result<GroundPointSet> {
    if gs.range_lo <= 0.0 {
        return param("log_map needs a positive range");
    }
    Ok(GroundPointSet::from_sorted_unchecked(
        gs.points.iter().map(|u| u.ln()).collect(),
        gs.range_lo.ln(),
        gs.range_hi.ln(),
    ))
}
