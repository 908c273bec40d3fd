//! The k-th minimum at time `t` is gamma with shape `k` and rate `t`, both
//! from planar extraction and from the Markov chain sampler.

use super::common::*;
use super::Outcome;
use crate::config::RunConfig;
use crate::densities::gamma_marginal_cdf;
use crate::error::{Error, Result};
use crate::extraction::kth_min_path;
use crate::generators::{chain_value_at, simulate_m_chain};
use crate::pointset::gen_unit_poisson;

const SCENARIO: u64 = 8;
const KS_DISTANCE: f64 = 0.02;
const CHAIN_START: f64 = 0.25;

pub(crate) fn run(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.planar_k()?;
    let kf = k as f64;
    let replicas = cfg.replicas.unwrap_or(10_000);
    let height = value_guard(k);
    let shape = if cfg.control { kf + 1.0 } else { kf };

    let planar = replicate(cfg, SCENARIO, 0, replicas, |stream| {
        let ps = gen_unit_poisson(stream, 1.0, height)?;
        Ok(kth_min_path(&ps, k, 1.0)?.value_at(1.0))
    })?;
    let planar: Vec<f64> = planar.into_iter().flatten().collect();
    let chain = replicate(cfg, SCENARIO, 1, replicas, |stream| {
        let segments = simulate_m_chain(stream, kf, CHAIN_START, 1.0)?;
        chain_value_at(&segments, 1.0)
            .ok_or_else(|| Error::Consistency("chain does not cover t = 1".into()))
    })?;

    let cdf = |x: f64| gamma_marginal_cdf(shape, 1.0, x).unwrap_or(f64::NAN);
    let tests = vec![
        ks_fixed("planar_kth_min_gamma_ks", &planar, cdf, KS_DISTANCE)?,
        ks_fixed("chain_kth_min_gamma_ks", &chain, cdf, KS_DISTANCE)?,
        at_least(
            "planar_complete_replicas",
            planar.len() as f64,
            replicas as f64,
            "replicas with at least k arrivals by t = 1",
        ),
    ];

    Ok(Outcome {
        replicas,
        tests,
        notes: vec![format!(
            "reference gamma shape {shape}, rate 1; planar rectangle (0, 1] x (0, {height}], chain from t = {CHAIN_START}"
        )],
        raw: vec![
            column_table("planar_kth_min", "x", &planar),
            column_table("chain_kth_min", "x", &chain),
        ],
    })
}
