//! Self-similarity: the image of the process under `(t, x) -> (t/c, c x)`
//! is again a unit Poisson process, so path and corner statistics of the
//! rescaled sample match a fresh sample in the image window.

use super::common::*;
use super::Outcome;
use crate::config::RunConfig;
use crate::error::Result;
use crate::extraction::{k_corners, order_statistics_at};
use crate::pointset::{gen_unit_poisson, hyperbolic_rescale, PlanarPoint, PlanarPointSet, Window};
use crate::stats::{ks_two_sample_alpha, ALPHA_ACCEPTANCE};

const SCENARIO: u64 = 7;
const T: f64 = 20.0;
const T_REF: f64 = 5.0;
const SHIFTS: [f64; 2] = [0.5, 3.0];

#[derive(Default)]
struct Stats {
    m_ref: Vec<f64>,
    counts: Vec<f64>,
    log_tx: Vec<f64>,
}

impl Stats {
    fn absorb(reps: Vec<(Option<f64>, f64, Vec<f64>)>) -> Self {
        let mut s = Stats::default();
        for (m, n, l) in reps {
            s.m_ref.extend(m);
            s.counts.push(n);
            s.log_tx.extend(l);
        }
        s
    }
}

fn measure(ps: &PlanarPointSet, k: usize, c: f64) -> (Option<f64>, f64, Vec<f64>) {
    let m = order_statistics_at(ps, T_REF / c, k).map(|v| v[k - 1]);
    let cs = k_corners(ps, k);
    let inside: Vec<f64> = cs
        .corners
        .iter()
        .filter(|a| a.point.t >= T_REF / c && a.point.t <= T / c)
        .map(|a| (a.point.t * a.point.x).ln())
        .collect();
    (m, inside.len() as f64, inside)
}

pub(crate) fn run(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.planar_k()?;
    let x_max = (10.0 * k as f64).max(20.0);
    let replicas = cfg.replicas.unwrap_or(2000);
    let mut tests = Vec::new();
    let mut raw = Vec::new();

    for (b, &c) in SHIFTS.iter().enumerate() {
        let mapped = replicate(cfg, SCENARIO, 2 * b as u64, replicas, |stream| {
            let ps = gen_unit_poisson(stream, T, x_max)?;
            let image = if cfg.control {
                let pts = ps.points().iter().map(|p| PlanarPoint { t: p.t / c, x: p.x }).collect();
                PlanarPointSet::new(pts, Window::rectangle(T / c, x_max)?)?
            } else {
                hyperbolic_rescale(&ps, c)?
            };
            Ok(measure(&image, k, c))
        })?;
        let fresh = replicate(cfg, SCENARIO, 2 * b as u64 + 1, replicas, |stream| {
            let ps = gen_unit_poisson(stream, T / c, c * x_max)?;
            Ok(measure(&ps, k, c))
        })?;
        let (a, f) = (Stats::absorb(mapped), Stats::absorb(fresh));
        for (name, x, y) in [
            ("kth_min_at_reference", &a.m_ref, &f.m_ref),
            ("corner_count", &a.counts, &f.counts),
            ("corner_log_tx", &a.log_tx, &f.log_tx),
        ] {
            tests.push(ks_two_sample_alpha(x, y, ALPHA_ACCEPTANCE)?.named(format!("c{c}_{name}_ks")));
        }
        raw.push(column_table(&format!("c{c}_mapped_kth_min"), "x", &a.m_ref));
        raw.push(column_table(&format!("c{c}_fresh_kth_min"), "x", &f.m_ref));
    }

    Ok(Outcome {
        replicas,
        tests,
        notes: vec![format!(
            "source window (0, {T}] x (0, {x_max}], reference time {T_REF}/c, shifts c in {SHIFTS:?}"
        )],
        raw,
    })
}
