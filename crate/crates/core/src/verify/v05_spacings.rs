//! Spacings of the `k/t` process are again a `k/t` process. Checked on the
//! directly sampled process and on the flat lifetimes of the planar k-th
//! minimum path, through counts in five geometric bins.

use super::common::*;
use super::Outcome;
use crate::config::RunConfig;
use crate::error::Result;
use crate::extraction::k_corners;
use crate::generators::{gen_selfsim_poisson, spacing_pairs};
use crate::io::{Field, Table};
use crate::pointset::gen_unit_poisson_in;
use crate::stats::{Criterion, TestResult};

const SCENARIO: u64 = 5;
const RATIO: f64 = 1.5;
const NBINS: usize = 5;
const LEFT_LO: f64 = 1e-4;
const LEFT_HI: f64 = 7.6e5;
const PLANAR_START: f64 = 1e-3;
const MAX_REL_ERR: f64 = 0.02;
const MAX_CORR: f64 = 0.03;

fn geometric_bins(values: impl IntoIterator<Item = f64>) -> Vec<u64> {
    bin_counts(values.into_iter().filter(|&v| v > 0.0).map(f64::ln), 0.0, RATIO.ln(), NBINS)
}

fn source_tests(label: &str, reps: &[Vec<u64>], lambda: f64) -> Result<Vec<TestResult>> {
    let n = reps.len() as f64;
    let columns: Vec<Vec<f64>> = (0..NBINS)
        .map(|b| reps.iter().map(|r| r[b] as f64).collect())
        .collect();
    let mut tests = Vec::new();
    for (b, col) in columns.iter().enumerate() {
        let m = col.iter().sum::<f64>() / n;
        tests.push(TestResult::new(
            format!("{label}_bin{b}_mean_rel_err"),
            (m / lambda - 1.0).abs(),
            MAX_REL_ERR,
            reps.len() as u64,
            Criterion::AtMost,
            format!("mean {m:.6}, reference {lambda:.6}"),
        ));
        let counts: Vec<u64> = reps.iter().map(|r| r[b]).collect();
        tests.push(crate::stats::poisson_dispersion(&counts)?.named(format!("{label}_bin{b}_dispersion")));
    }
    let pooled: Vec<u64> = reps.iter().flat_map(|r| r.iter().copied()).collect();
    tests.push(
        crate::stats::poisson_histogram_test(&pooled, lambda)?
            .named(format!("{label}_pooled_poisson_chi_square"))
            .with_detail(format!("reference mean {lambda:.6}")),
    );
    let names: Vec<String> = (0..NBINS).map(|b| format!("bin{b}")).collect();
    tests.extend(pairwise_correlations(label, &columns, &names, MAX_CORR)?);
    Ok(tests)
}

fn counts_table(name: &str, reps: &[Vec<u64>]) -> Table {
    let mut t = Table::new(name, &["replica", "bin0", "bin1", "bin2", "bin3", "bin4"]);
    for (r, rep) in reps.iter().enumerate() {
        let mut row = vec![Field::Int(r as u64)];
        row.extend(rep.iter().map(|&c| Field::Int(c)));
        t.push(row);
    }
    t
}

pub(crate) fn run(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.planar_k()?;
    let kf = k as f64;
    let lambda = if cfg.control { kf + 1.0 } else { kf } * RATIO.ln();
    let top = RATIO.powi(NBINS as i32);
    let margin = 2f64.exp();
    let direct_reps = cfg.replicas.unwrap_or(200_000);
    let planar_reps = cfg.replicas.unwrap_or((80_000f64 / kf).ceil() as u64);

    let direct = replicate(cfg, SCENARIO, 0, direct_reps, |stream| {
        let gs = gen_selfsim_poisson(stream, kf, LEFT_LO / margin, LEFT_HI * margin)?;
        let gaps = spacing_pairs(&gs)
            .into_iter()
            .filter(|&(left, _)| (LEFT_LO..=LEFT_HI).contains(&left))
            .map(|(_, g)| g);
        Ok(geometric_bins(gaps))
    })?;

    let t_end = 2000.0 * kf * top;
    let window = guarded_window(value_guard(k), PLANAR_START, t_end)?;
    let planar = replicate(cfg, SCENARIO, 1, planar_reps, |stream| {
        let cs = k_corners(&gen_unit_poisson_in(stream, &window), k);
        let times = cs.times();
        let gaps = times
            .windows(2)
            .filter(|w| w[0] >= PLANAR_START)
            .map(|w| w[1] - w[0]);
        Ok(geometric_bins(gaps))
    })?;

    let mut tests = source_tests("direct", &direct, lambda)?;
    tests.extend(source_tests("planar", &planar, lambda)?);

    Ok(Outcome {
        replicas: direct_reps.max(planar_reps),
        tests,
        notes: vec![
            format!("bins [1.5^i, 1.5^(i+1)), i = 0..4, reference mean per bin {lambda:.6}"),
            format!(
                "direct: {direct_reps} replicas on [{:.4e}, {:.4e}], gaps with left end in [{LEFT_LO}, {LEFT_HI}]",
                LEFT_LO / margin,
                LEFT_HI * margin
            ),
            format!("planar: {planar_reps} replicas, flats of corners from t = {PLANAR_START} to {t_end}"),
        ],
        raw: vec![counts_table("direct_counts", &direct), counts_table("planar_counts", &planar)],
    })
}
