//! The corner process: rate `k` in log time, with exponential forward gaps,
//! and the planar intensity `p1`; records carry `p1 / k` and are a `1/k`
//! fraction of the corners.

use super::common::*;
use super::Outcome;
use crate::config::RunConfig;
use crate::error::Result;
use crate::extraction::k_corners;
use crate::io::{Field, Table};
use crate::pointset::gen_unit_poisson_in;

const SCENARIO: u64 = 2;
const LOG_SPAN: f64 = 8.0;
const BINS: usize = 8;

struct Replica {
    gaps: Vec<f64>,
    counts: Vec<u64>,
    corners: Vec<(f64, f64)>,
    records: Vec<(f64, f64)>,
}

pub(crate) fn run(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.planar_k()?;
    let kf = k as f64;
    let guard = value_guard(k);
    let window = guarded_window(guard, 1.0, (LOG_SPAN + 12.0 / kf).exp())?;
    let replicas = cfg.replicas.unwrap_or(4000);
    let k_ref = if cfg.control { kf + 1.0 } else { kf };

    let reps = replicate(cfg, SCENARIO, 0, replicas, |stream| {
        let ps = gen_unit_poisson_in(stream, &window);
        let cs = k_corners(&ps, k);
        let us: Vec<f64> = cs.corners.iter().map(|c| c.point.t.ln()).collect();
        let mut gaps = Vec::new();
        for (i, &u) in us.iter().enumerate() {
            if (0.0..LOG_SPAN).contains(&u) {
                gaps.push(us.get(i + 1).map_or(f64::INFINITY, |&v| v - u));
            }
        }
        let inside = |c: &&crate::extraction::Corner| (0.0..LOG_SPAN).contains(&c.point.t.ln());
        Ok(Replica {
            gaps,
            counts: bin_counts(us.iter().copied(), 0.0, 1.0, BINS),
            corners: cs.corners.iter().filter(inside).map(|c| (c.point.t, c.point.x)).collect(),
            records: cs
                .corners
                .iter()
                .filter(inside)
                .filter(|c| c.is_record())
                .map(|c| (c.point.t, c.point.x))
                .collect(),
        })
    })?;

    let mut tests = Vec::new();
    let gaps: Vec<f64> = reps.iter().flat_map(|r| r.gaps.iter().copied()).collect();
    tests.push(ks_alpha(
        "log_gap_exponential_ks",
        &gaps,
        |g| 1.0 - (-k_ref * g).exp(),
        crate::stats::ALPHA_ACCEPTANCE,
    )?);
    let counts: Vec<u64> = reps.iter().flat_map(|r| r.counts.iter().copied()).collect();
    tests.extend(poisson_count_tests("log_bin_count", &counts, k_ref)?);

    let t_edges = log_edges(0.0, 0.5, 16);
    let x_edges = log_edges(kf.ln() - 13.0, 0.5, 31);
    let corners: Vec<(f64, f64)> = reps.iter().flat_map(|r| r.corners.iter().copied()).collect();
    let records: Vec<(f64, f64)> = reps.iter().flat_map(|r| r.records.iter().copied()).collect();
    let mut raw = Vec::new();
    for (label, points, weight) in [("corner_intensity", &corners, k_ref), ("record_intensity", &records, 1.0)] {
        let mut expected = Vec::with_capacity(16 * 31);
        for i in 0..16 {
            for j in 0..31 {
                let m = gamma_kernel_mass(
                    k_ref,
                    weight,
                    (t_edges[i], t_edges[i + 1]),
                    (x_edges[j], x_edges[j + 1]),
                )?;
                expected.push(m * replicas as f64);
            }
        }
        let counts = grid_counts(points, &t_edges, &x_edges);
        let (fit, cells, table) = grid_chi_square(label, &t_edges, &x_edges, counts, expected, 48, ("t", "x"))?;
        tests.push(fit);
        tests.push(cells);
        raw.push(table);
    }
    tests.push(fraction_test(
        "record_fraction",
        records.len() as u64,
        corners.len() as u64,
        1.0 / k_ref,
    )?);

    let mut table = Table::new("corners", &["replica", "t", "x", "is_record"]);
    for (r, rep) in reps.iter().enumerate() {
        for &(t, x) in &rep.corners {
            let is_record = rep.records.binary_search_by(|p| p.0.total_cmp(&t)).is_ok();
            table.push(vec![Field::Int(r as u64), t.into(), x.into(), is_record.into()]);
        }
    }
    raw.push(table);

    Ok(Outcome {
        replicas,
        tests,
        notes: vec![format!(
            "corners with log time in [0, {LOG_SPAN}); window extends to log time {} so the next corner is observed",
            LOG_SPAN + 12.0 / kf
        )],
        raw,
    })
}
