//! Record processes of ranks 1, 2, 3 in log time: Poisson counts of rate one
//! per unit, mutually uncorrelated, in both time and (after reflection)
//! value. Also fits the rate of the corner process.

use super::common::*;
use super::Outcome;
use crate::config::RunConfig;
use crate::error::Result;
use crate::extraction::{initial_ranks, k_corners};
use crate::io::{Field, Table};
use crate::pointset::{gen_unit_poisson_in, reflect};
use crate::stats::{Criterion, TestResult};

const SCENARIO: u64 = 1;
const RANKS: usize = 3;
const LOG_SPAN: f64 = 8.0;
const BINS: usize = 8;
const SLOPE_POINTS: usize = 80;

struct Replica {
    /// `[j][bin]` counts in log time, then in log value.
    forward: [Vec<u64>; RANKS],
    reflected: [Vec<u64>; RANKS],
    /// Corners with log time in `[0, 0.1 g]`, `g = 1..=80`.
    cumulative: Vec<u64>,
}

pub(crate) fn run(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.planar_k()?;
    let guard = value_guard(k.max(RANKS));
    let window = guarded_window(guard, 1.0, LOG_SPAN.exp())?;
    let replicas = cfg.replicas.unwrap_or(4000);
    let rate = if cfg.control { 1.25 } else { 1.0 };
    let value_lo = guard.ln() - LOG_SPAN;

    let reps = replicate(cfg, SCENARIO, 0, replicas, |stream| {
        let ps = gen_unit_poisson_in(stream, &window);
        let ranks = initial_ranks(&ps);
        let forward = std::array::from_fn(|j| {
            let times = ranks.iter().filter(|r| r.initial_rank == j + 1).map(|r| r.point.t.ln());
            bin_counts(times, 0.0, 1.0, BINS)
        });
        let rps = reflect(&ps);
        let rranks = initial_ranks(&rps);
        let reflected = std::array::from_fn(|j| {
            let times = rranks.iter().filter(|r| r.initial_rank == j + 1).map(|r| r.point.t.ln());
            bin_counts(times, value_lo, 1.0, BINS)
        });
        let cs = k_corners(&ps, k);
        let us: Vec<f64> = cs.corners.iter().map(|c| c.point.t.ln()).filter(|&u| u >= 0.0).collect();
        let cumulative = (1..=SLOPE_POINTS)
            .map(|g| us.iter().filter(|&&u| u <= 0.1 * g as f64).count() as u64)
            .collect();
        Ok(Replica {
            forward,
            reflected,
            cumulative,
        })
    })?;

    let mut tests = Vec::new();
    let names: Vec<String> = (1..=RANKS).map(|j| format!("j{j}")).collect();
    for (label, pick) in [("time", 0usize), ("value", 1)] {
        let pooled: Vec<Vec<u64>> = (0..RANKS)
            .map(|j| {
                reps.iter()
                    .flat_map(|r| if pick == 0 { &r.forward[j] } else { &r.reflected[j] })
                    .copied()
                    .collect()
            })
            .collect();
        for (j, counts) in pooled.iter().enumerate() {
            tests.extend(poisson_count_tests(&format!("{label}_rank{}", j + 1), counts, rate)?);
        }
        let cols: Vec<Vec<f64>> = pooled
            .iter()
            .map(|c| c.iter().map(|&v| v as f64).collect())
            .collect();
        tests.extend(pairwise_correlations(label, &cols, &names, 0.03)?);
    }

    let us: Vec<f64> = (1..=SLOPE_POINTS).map(|g| 0.1 * g as f64).collect();
    let mean_counts: Vec<f64> = (0..SLOPE_POINTS)
        .map(|g| reps.iter().map(|r| r.cumulative[g] as f64).sum::<f64>() / replicas as f64)
        .collect();
    let slope = ols_slope(&us, &mean_counts);
    let target = rate * k as f64;
    tests.push(TestResult::new(
        "corner_rate_slope",
        (slope / target - 1.0).abs(),
        0.02,
        replicas,
        Criterion::AtMost,
        format!("fitted slope {slope:.5}, reference rate {target}"),
    ));

    let mut raw = Table::new("record_counts", &["replica", "axis", "bin", "rank1", "rank2", "rank3"]);
    for (r, rep) in reps.iter().enumerate() {
        for (axis, set) in [("time", &rep.forward), ("value", &rep.reflected)] {
            for b in 0..BINS {
                raw.push(vec![
                    Field::Int(r as u64),
                    axis.into(),
                    Field::Int(b as u64),
                    set[0][b].into(),
                    set[1][b].into(),
                    set[2][b].into(),
                ]);
            }
        }
    }

    Ok(Outcome {
        replicas,
        tests,
        notes: vec![
            format!("log-time bins of width 1 over [0, {LOG_SPAN}], value guard {guard}"),
            "independence is checked through pairwise count correlations only; \
             joint independence of all record processes is not testable exhaustively"
                .into(),
        ],
        raw: vec![raw],
    })
}
