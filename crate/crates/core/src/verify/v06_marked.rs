//! Flats of the k-th minimum path marked by their value: intensity
//! `k e^(-sx)`, symmetric in lifetime and value, with value marginal equal
//! to the corner values.

use super::common::*;
use super::Outcome;
use crate::config::RunConfig;
use crate::densities::gamma_fn;
use crate::error::{Error, Result};
use crate::extraction::{k_corners, kth_min_path, lifetimes};
use crate::pointset::gen_unit_poisson_in;
use crate::quadrature::{integrate_2d, Tolerance};
use crate::stats::{ks_two_sample_alpha, ALPHA_ACCEPTANCE};

const SCENARIO: u64 = 6;
const GRID_LO: f64 = 0.125;
const GRID_CELLS: usize = 12;
const BOX: (f64, f64) = (0.5, 2.0);

fn in_box(v: f64) -> bool {
    (BOX.0..=BOX.1).contains(&v)
}

pub(crate) fn run(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.planar_k()?;
    let kf = k as f64;
    let replicas = cfg.replicas.unwrap_or(4000);
    let t_start = (1e-4 * gamma_fn(kf + 1.0)).powf(1.0 / kf) / 8.0;
    let t_end = (8.0 + (30.0 + 3.0 * kf) / GRID_LO).max(2000.0 * kf);
    let window = guarded_window(value_guard(k), t_start, t_end)?;
    let decay = if cfg.control { 1.25 } else { 1.0 };

    let marks = replicate(cfg, SCENARIO, 0, replicas, |stream| {
        let ps = gen_unit_poisson_in(stream, &window);
        let path = kth_min_path(&ps, k, t_end)?;
        Ok(lifetimes(&path).into_iter().map(|l| (l.s, l.x)).collect::<Vec<_>>())
    })?;
    let other = replicate(cfg, SCENARIO, 1, replicas, |stream| {
        let ps = gen_unit_poisson_in(stream, &window);
        let path = kth_min_path(&ps, k, t_end)?;
        let flats: Vec<(f64, f64)> = lifetimes(&path).into_iter().map(|l| (l.s, l.x)).collect();
        let corner_values: Vec<f64> = k_corners(&ps, k).values().into_iter().filter(|&x| in_box(x)).collect();
        Ok((flats, corner_values))
    })?;

    let marks: Vec<(f64, f64)> = marks.into_iter().flatten().collect();
    let edges = log_edges(GRID_LO.ln(), 0.5 * 2f64.ln(), GRID_CELLS);
    let mut expected = Vec::with_capacity(GRID_CELLS * GRID_CELLS);
    for i in 0..GRID_CELLS {
        for j in 0..GRID_CELLS {
            let m = integrate_2d(
                &|s, x| kf * (-decay * s * x).exp(),
                (edges[i], edges[i + 1]),
                (edges[j], edges[j + 1]),
                Tolerance::default(),
            )
            .map_err(|message| Error::Numeric {
                cell: format!("s [{}, {}) x [{}, {})", edges[i], edges[i + 1], edges[j], edges[j + 1]),
                message,
            })?;
            expected.push(m * replicas as f64);
        }
    }
    let counts = grid_counts(&marks, &edges, &edges);
    let (fit, cells, table) = grid_chi_square("marked_intensity", &edges, &edges, counts, expected, 48, ("s", "x"))?;

    let s_box_a: Vec<f64> = marks.iter().filter(|m| in_box(m.0) && in_box(m.1)).map(|m| m.0).collect();
    let x_all_a: Vec<f64> = marks.iter().filter(|m| in_box(m.1)).map(|m| m.1).collect();
    let x_box_b: Vec<f64> = other
        .iter()
        .flat_map(|(f, _)| f.iter().filter(|m| in_box(m.0) && in_box(m.1)).map(|m| m.1))
        .collect();
    let corner_b: Vec<f64> = other.iter().flat_map(|(_, c)| c.iter().copied()).collect();

    let tests = vec![
        fit,
        cells,
        ks_two_sample_alpha(&s_box_a, &x_box_b, ALPHA_ACCEPTANCE)?.named("lifetime_vs_value_marginal_ks"),
        ks_two_sample_alpha(&x_all_a, &corner_b, ALPHA_ACCEPTANCE)?.named("flat_value_vs_corner_value_ks"),
    ];

    Ok(Outcome {
        replicas,
        tests,
        notes: vec![
            format!("12 x 12 log grid over [{GRID_LO}, 8]^2, reference intensity {kf} exp(-{decay} s x)"),
            format!("window from t = {t_start:.6e} to {t_end}; marginal box [{}, {}]", BOX.0, BOX.1),
        ],
        raw: vec![
            table,
            column_table("lifetimes_in_box", "s", &s_box_a),
            column_table("values_in_box", "x", &x_box_b),
        ],
    })
}
