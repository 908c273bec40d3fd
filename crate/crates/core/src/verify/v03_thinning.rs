//! Records against an independent Bernoulli thinning of the corners: same
//! log-gap law, same retained fraction.

use super::common::*;
use super::Outcome;
use crate::config::RunConfig;
use crate::error::Result;
use crate::extraction::{k_corners, CornerSet};
use crate::generators::bernoulli_thin;
use crate::pointset::gen_unit_poisson_in;
use crate::stats::{ks_two_sample_alpha, ALPHA_ACCEPTANCE};

const SCENARIO: u64 = 3;
const LOG_SPAN: f64 = 8.0;
const LOG_TAIL: f64 = 16.0;
const MIN_GAPS: f64 = 5000.0;

struct Replica {
    gaps: Vec<f64>,
    kept: u64,
    total: u64,
}

/// Log-gaps from every retained corner with log time in `[0, 8)` to the
/// next retained one.
fn log_gaps(cs: &CornerSet, keep: impl Fn(usize) -> bool) -> Replica {
    let mut kept_us = Vec::new();
    let mut kept = 0;
    let mut total = 0;
    for (i, c) in cs.corners.iter().enumerate() {
        let u = c.point.t.ln();
        let inside = (0.0..LOG_SPAN).contains(&u);
        total += inside as u64;
        if keep(i) {
            kept += inside as u64;
            kept_us.push(u);
        }
    }
    let gaps = kept_us
        .iter()
        .enumerate()
        .filter(|(_, &u)| (0.0..LOG_SPAN).contains(&u))
        .map(|(i, &u)| kept_us.get(i + 1).map_or(f64::INFINITY, |&v| v - u))
        .collect();
    Replica { gaps, kept, total }
}

pub(crate) fn run(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.planar_k()?;
    let kf = k as f64;
    let p = cfg.thin_p.unwrap_or(if cfg.control { 0.5 / kf } else { 1.0 / kf });
    let window = guarded_window(value_guard(k), 1.0, (LOG_SPAN + LOG_TAIL).exp())?;
    let replicas = cfg.replicas.unwrap_or(1500);

    let records = replicate(cfg, SCENARIO, 0, replicas, |stream| {
        let cs = k_corners(&gen_unit_poisson_in(stream, &window), k);
        Ok(log_gaps(&cs, |i| cs.corners[i].is_record()))
    })?;
    let thinned = replicate(cfg, SCENARIO, 1, replicas, |stream| {
        let cs = k_corners(&gen_unit_poisson_in(stream, &window), k);
        let kept = bernoulli_thin(stream, &cs, p)?;
        let mut flags = vec![false; cs.len()];
        let mut j = 0;
        for (i, c) in cs.corners.iter().enumerate() {
            if j < kept.len() && kept.corners[j] == *c {
                flags[i] = true;
                j += 1;
            }
        }
        Ok(log_gaps(&cs, |i| flags[i]))
    })?;

    let pool = |reps: &[Replica]| -> (Vec<f64>, u64, u64) {
        (
            reps.iter().flat_map(|r| r.gaps.iter().copied()).collect(),
            reps.iter().map(|r| r.kept).sum(),
            reps.iter().map(|r| r.total).sum(),
        )
    };
    let (rec_gaps, rec_kept, rec_total) = pool(&records);
    let (thin_gaps, thin_kept, thin_total) = pool(&thinned);

    let tests = vec![
        fraction_test("record_fraction", rec_kept, rec_total, 1.0 / kf)?,
        fraction_test("thinned_fraction", thin_kept, thin_total, 1.0 / kf)?,
        ks_two_sample_alpha(&rec_gaps, &thin_gaps, ALPHA_ACCEPTANCE)?.named("log_gap_two_sample_ks"),
        at_least("record_gap_count", rec_gaps.len() as f64, MIN_GAPS, "record log-gaps"),
        at_least("thinned_gap_count", thin_gaps.len() as f64, MIN_GAPS, "thinned log-gaps"),
    ];

    Ok(Outcome {
        replicas,
        tests,
        notes: vec![format!(
            "thinning probability {p}; gaps from points with log time in [0, {LOG_SPAN}), \
             window to log time {}",
            LOG_SPAN + LOG_TAIL
        )],
        raw: vec![
            column_table("record_log_gaps", "gap", &rec_gaps),
            column_table("thinned_log_gaps", "gap", &thin_gaps),
        ],
    })
}
