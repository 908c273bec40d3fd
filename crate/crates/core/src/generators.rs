//! Direct samplers of the derived processes: the self-similar Poisson
//! process with intensity `k/t`, its spacings, the k-th minimum as a Markov
//! chain, Bernoulli thinning of corners and the record-value lifetime.

use serde::{Deserialize, Serialize};

use crate::error::{param, require_positive, Result};
use crate::extraction::CornerSet;
use crate::pointset::GroundPointSet;
use crate::sampling::{beta_k1_sample, gamma_sample, harmonic_first_success, Capped, RngStream};

/// One flat of the simulated k-th minimum chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSegment {
    pub start_time: f64,
    pub value: f64,
    pub duration: f64,
    /// The flat was cut by the end of the simulation.
    pub censored: bool,
}

/// Poisson process on `[t_lo, t_hi]` with intensity `k/t`: the exponential
/// of a rate-`k` homogeneous process on `[ln t_lo, ln t_hi]`.
pub fn gen_selfsim_poisson(
    stream: &mut RngStream,
    k: f64,
    t_lo: f64,
    t_hi: f64,
) -> Result<GroundPointSet> {
    require_positive("k", k)?;
    require_positive("t_lo", t_lo)?;
    require_positive("t_hi", t_hi)?;
    if t_lo >= t_hi {
        return param(format!("need t_lo < t_hi, got [{t_lo}, {t_hi}]"));
    }
    let (lo, hi) = (t_lo.ln(), t_hi.ln());
    let mut points = Vec::new();
    let mut u = lo;
    loop {
        u += stream.unit_exp() / k;
        if u > hi {
            break;
        }
        let t = libm::exp(u).clamp(t_lo, t_hi);
        if points.last().is_some_and(|&last| last >= t) {
            continue;
        }
        points.push(t);
    }
    GroundPointSet::new(points, t_lo, t_hi)
}

/// Consecutive differences, sorted ascending, on the range `[0, hi - lo]`.
/// Fewer than two points give an empty set.
pub fn spacings(gs: &GroundPointSet) -> GroundPointSet {
    let mut gaps: Vec<f64> = gs.points().windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_unstable_by(f64::total_cmp);
    GroundPointSet::from_sorted_unchecked(gaps, 0.0, gs.range_hi() - gs.range_lo())
}

/// `(left endpoint, gap)` for every pair of consecutive points, in order.
pub fn spacing_pairs(gs: &GroundPointSet) -> Vec<(f64, f64)> {
    gs.points().windows(2).map(|w| (w[0], w[1] - w[0])).collect()
}

/// The k-th minimum as a pure-jump Markov chain on `[t0, t_end]`.
///
/// The value at `t0` is drawn from the gamma marginal with shape `k` and
/// rate `t0`. From value `x` the chain waits `E/x` and then jumps to `B x`
/// with `B ~ beta(k, 1)`. The final segment is cut at `t_end` and flagged.
pub fn simulate_m_chain(
    stream: &mut RngStream,
    k: f64,
    t0: f64,
    t_end: f64,
) -> Result<Vec<ChainSegment>> {
    require_positive("k", k)?;
    require_positive("t0", t0)?;
    require_positive("t_end", t_end)?;
    if t0 >= t_end {
        return param(format!("need t0 < t_end, got {t0} >= {t_end}"));
    }
    let mut value = gamma_sample(stream, k, t0)?;
    let mut t = t0;
    let mut segments = Vec::new();
    loop {
        let wait = stream.unit_exp() / value;
        if t + wait >= t_end {
            segments.push(ChainSegment {
                start_time: t,
                value,
                duration: t_end - t,
                censored: true,
            });
            return Ok(segments);
        }
        segments.push(ChainSegment {
            start_time: t,
            value,
            duration: wait,
            censored: false,
        });
        t += wait;
        value *= beta_k1_sample(stream, k)?;
    }
}

/// Value of a simulated chain at time `t`, if `t` is inside its span.
pub fn chain_value_at(segments: &[ChainSegment], t: f64) -> Option<f64> {
    let i = segments.partition_point(|s| s.start_time <= t);
    let seg = segments.get(i.checked_sub(1)?)?;
    (t <= seg.start_time + seg.duration).then_some(seg.value)
}

/// Retain every corner independently with probability `p`.
pub fn bernoulli_thin(stream: &mut RngStream, cs: &CornerSet, p: f64) -> Result<CornerSet> {
    if !(0.0..=1.0).contains(&p) {
        return param(format!("thinning probability must lie in [0, 1], got {p}"));
    }
    let corners = cs
        .corners
        .iter()
        .filter(|_| stream.uniform() < p)
        .copied()
        .collect();
    Ok(CornerSet { k: cs.k, corners })
}

/// `(E_1 + ... + E_N) / x` with `N` the harmonic first-success index.
pub fn record_value_lifetime(
    stream: &mut RngStream,
    k: u64,
    x: f64,
    cap: u64,
) -> Result<Capped<f64>> {
    require_positive("x", x)?;
    match harmonic_first_success(stream, k, cap)? {
        Capped::Value(n) => Ok(Capped::Value(gamma_sample(stream, n as f64, x)?)),
        Capped::Overflow => Ok(Capped::Overflow),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::{Clause, Corner};
    use crate::pointset::PlanarPoint;
    use crate::sampling::exp_sample;

    #[test]
    fn selfsim_mean_count() {
        let mut s = RngStream::new(21, 0);
        let e10 = 10f64.exp();
        let n = 10_000;
        let total: usize = (0..n)
            .map(|_| gen_selfsim_poisson(&mut s, 2.0, 1.0, e10).unwrap().len())
            .sum();
        let m = total as f64 / n as f64;
        assert!((m - 20.0).abs() < 0.5, "mean count {m}");
    }

    #[test]
    fn selfsim_rejects_bad_ranges() {
        let mut s = RngStream::new(0, 0);
        assert!(gen_selfsim_poisson(&mut s, 1.0, 2.0, 2.0).is_err());
        assert!(gen_selfsim_poisson(&mut s, 0.0, 1.0, 2.0).is_err());
        assert!(gen_selfsim_poisson(&mut s, 1.0, -1.0, 2.0).is_err());
    }

    #[test]
    fn spacings_of_small_set() {
        let gs = GroundPointSet::new(vec![1.0, 2.0, 4.0], 1.0, 4.0).unwrap();
        assert_eq!(spacings(&gs).points(), &[1.0, 2.0]);
        assert_eq!(spacing_pairs(&gs), vec![(1.0, 1.0), (2.0, 2.0)]);
        let single = GroundPointSet::new(vec![3.0], 1.0, 4.0).unwrap();
        assert!(spacings(&single).is_empty());
    }

    #[test]
    fn chain_values_decrease_and_tile_the_span() {
        let mut s = RngStream::new(5, 0);
        for k in [0.5, 1.0, 3.0] {
            let segs = simulate_m_chain(&mut s, k, 0.5, 40.0).unwrap();
            assert!(segs.windows(2).all(|w| w[1].value < w[0].value));
            for w in segs.windows(2) {
                assert_eq!(w[0].start_time + w[0].duration, w[1].start_time);
            }
            let last = segs.last().unwrap();
            assert!(last.censored);
            assert!((last.start_time + last.duration - 40.0).abs() < 1e-9);
            assert!(segs[..segs.len() - 1].iter().all(|s| !s.censored));
            assert_eq!(chain_value_at(&segs, 0.5), Some(segs[0].value));
            assert_eq!(chain_value_at(&segs, 0.25), None);
        }
    }

    #[test]
    fn thinning_extremes() {
        let corners = (1..=50)
            .map(|i| Corner {
                point: PlanarPoint {
                    t: i as f64,
                    x: 100.0 - i as f64,
                },
                clause: if i % 2 == 0 { Clause::I } else { Clause::II },
            })
            .collect();
        let cs = CornerSet { k: 2, corners };
        let mut s = RngStream::new(8, 0);
        assert_eq!(bernoulli_thin(&mut s, &cs, 1.0).unwrap(), cs);
        assert!(bernoulli_thin(&mut s, &cs, 0.0).unwrap().is_empty());
        assert!(bernoulli_thin(&mut s, &cs, 1.5).is_err());
    }

    #[test]
    fn lifetime_reduces_to_exponential_for_k1() {
        let mut a = RngStream::new(13, 1);
        let mut b = RngStream::new(13, 1);
        for _ in 0..100 {
            let lt = record_value_lifetime(&mut a, 1, 2.5, 10).unwrap().value().unwrap();
            // the harmonic draw consumes one uniform before the exponential
            b.uniform();
            assert_eq!(lt, exp_sample(&mut b, 2.5).unwrap());
        }
    }
}
