//! Given the k-th minimum at time one, the k-1 smaller values are iid
//! uniform below it: ratios `M_i / M_k` have the uniform order statistic
//! laws and are uncorrelated with `M_k`.

use super::common::*;
use super::Outcome;
use crate::config::RunConfig;
use crate::error::{param, Result};
use crate::extraction::order_statistics_at;
use crate::io::{Field, Table};
use crate::pointset::gen_unit_poisson;

const SCENARIO: u64 = 4;
const KS_DISTANCE: f64 = 0.02;
const MAX_CORR: f64 = 0.03;

pub(crate) fn run(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.planar_k()?;
    if k < 2 {
        return param("order statistic ratios need k >= 2");
    }
    let replicas = cfg.replicas.unwrap_or(20_000);
    let height = value_guard(k);
    let rows = replicate(cfg, SCENARIO, 0, replicas, |stream| {
        let ps = gen_unit_poisson(stream, 1.0, height)?;
        Ok(order_statistics_at(&ps, 1.0, k))
    })?;
    let rows: Vec<Vec<f64>> = rows.into_iter().flatten().collect();

    let mk: Vec<f64> = rows.iter().map(|r| r[k - 1]).collect();
    let ratios: Vec<Vec<f64>> = (0..k - 1)
        .map(|i| rows.iter().map(|r| r[i] / r[k - 1]).collect())
        .collect();
    let exponent = if cfg.control { k as f64 } else { (k - 1) as f64 };

    let mut tests = vec![ks_fixed(
        "min_ratio_ks",
        &ratios[0],
        |u| 1.0 - (1.0 - u.clamp(0.0, 1.0)).powf(exponent),
        KS_DISTANCE,
    )?
    .with_detail(format!("reference 1 - (1 - u)^{exponent}"))];
    for j in 1..k {
        let w: Vec<f64> = if j < k - 1 {
            ratios[j - 1]
                .iter()
                .zip(&ratios[j])
                .map(|(a, b)| (a / b).powi(j as i32))
                .collect()
        } else {
            ratios[k - 2].iter().map(|r| r.powi(j as i32)).collect()
        };
        tests.push(ks_fixed(&format!("renyi_w{j}_uniform_ks"), &w, |u| u.clamp(0.0, 1.0), KS_DISTANCE)?);
    }
    for (i, r) in ratios.iter().enumerate() {
        tests.push(
            crate::stats::correlation_test(&mk, r, MAX_CORR)?.named(format!("corr_mk_ratio{}", i + 1)),
        );
    }
    tests.push(at_least(
        "complete_replicas",
        rows.len() as f64,
        replicas as f64,
        "replicas with at least k arrivals by time one",
    ));

    let header: Vec<String> = (1..=k).map(|i| format!("m{i}")).collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new("order_statistics", &header_refs);
    for r in &rows {
        table.push(r.iter().map(|&v| Field::Float(v)).collect());
    }

    Ok(Outcome {
        replicas,
        tests,
        notes: vec![format!("rectangle (0, 1] x (0, {height}], statistics at t = 1")],
        raw: vec![table],
    })
}
