use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io::{Field, Table};
use crate::pointset::Window;
use crate::quadrature::{integrate_1d, Tolerance};
use crate::sampling::RngStream;
use crate::stats::{
    chi_square_gof, correlation_test, ks_critical, ks_one_sample, BinnedCounts, poisson_dispersion, poisson_histogram_test, proportion_test, Criterion,
    TestResult,
};

/// Step ratio of the staircase windows used by the planar scenarios.
pub const STEP_RATIO: f64 = 1.25;

pub fn stream_id(scenario: u64, batch: u64, replica: u64) -> u64 {
    (scenario << 40) | (batch << 32) | replica
}

/// Runs `f` for every replica on its own substream, in parallel, and
/// returns the results in replica order.
pub fn replicate<T, F>(cfg: &RunConfig, scenario: u64, batch: u64, n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RngStream) -> Result<T> + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .map(|r| {
            let mut stream = RngStream::new(cfg.seed, stream_id(scenario, batch, r));
            f(&mut stream)
        })
        .collect()
}

/// Staircase under `t x = guard` from `t_start` to `t_end`.
pub fn guarded_window(guard: f64, t_start: f64, t_end: f64) -> Result<Window> {
    Window::hyperbolic(guard, t_start, t_end, STEP_RATIO)
}

/// Value guard `50 k`: the k-th minimum at time `t` exceeds `50 k / t` with
/// negligible probability.
pub fn value_guard(k: usize) -> f64 {
    50.0 * k as f64
}

/// Counts of `values` in `nbins` consecutive bins of `width` from `lo`.
pub fn bin_counts(values: impl IntoIterator<Item = f64>, lo: f64, width: f64, nbins: usize) -> Vec<u64> {
    let mut counts = vec![0u64; nbins];
    for v in values {
        let b = ((v - lo) / width).floor();
        if b >= 0.0 && (b as usize) < nbins {
            counts[b as usize] += 1;
        }
    }
    counts
}

pub fn log_edges(lo: f64, step: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| (lo + step * i as f64).exp()).collect()
}

/// Dispersion plus chi-square of the count histogram against Poisson(mean).
pub fn poisson_count_tests(label: &str, counts: &[u64], mean: f64) -> Result<Vec<TestResult>> {
    let disp = poisson_dispersion(counts)?.named(format!("{label}_dispersion"));
    let hist = poisson_histogram_test(counts, mean)?
        .named(format!("{label}_poisson_chi_square"))
        .with_detail(format!("reference mean {mean}"));
    Ok(vec![disp, hist])
}

/// Correlation tests between every pair of count columns.
pub fn pairwise_correlations(label: &str, columns: &[Vec<f64>], names: &[String], max_abs: f64) -> Result<Vec<TestResult>> {
    let mut out = Vec::new();
    for i in 0..columns.len() {
        for j in i + 1..columns.len() {
            out.push(
                correlation_test(&columns[i], &columns[j], max_abs)?
                    .named(format!("{label}_corr_{}_{}", names[i], names[j])),
            );
        }
    }
    Ok(out)
}

/// Binomial proportion check; `p0 = 1` degenerates to requiring every
/// trial to succeed.
pub fn fraction_test(name: &str, successes: u64, trials: u64, p0: f64) -> Result<TestResult> {
    if p0 >= 1.0 {
        let miss = trials.saturating_sub(successes) as f64;
        return Ok(TestResult::new(
            name,
            miss,
            0.0,
            trials,
            Criterion::AtMost,
            format!("observed {successes}/{trials}, p0 = 1 requires all"),
        ));
    }
    Ok(proportion_test(successes, trials, p0)?.named(name))
}

pub fn at_least(name: &str, value: f64, bound: f64, detail: impl Into<String>) -> TestResult {
    TestResult::new(name, value, bound, value as u64, Criterion::AtLeast, detail)
}

/// `P(N > n) = (k-1)/(k-1+n)` for the harmonic first-success index.
pub fn survival_first_success(k: u64, n: u64) -> f64 {
    let a = (k - 1) as f64;
    if a == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    a / (a + n as f64)
}

/// `P(N = n)`; equals `1/(n(n+1))` at `k = 2`.
pub fn pmf_first_success(k: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    survival_first_success(k, n - 1) - survival_first_success(k, n)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Ordinary least squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Mass of `weight (tx)^(k-1) e^(-tx) / Γ(k)` over `[a, b] x [c, d]`:
/// the inner integral in `x` is an incomplete gamma difference, the outer
/// one runs in `ln t`.
pub fn gamma_kernel_mass(k: f64, weight: f64, (a, b): (f64, f64), (c, d): (f64, f64)) -> Result<f64> {
    let f = |v: f64| {
        let t = v.exp();
        weight * (gamma_lr(k, t * d) - gamma_lr(k, t * c))
    };
    integrate_1d(&f, a.ln(), b.ln(), Tolerance::default()).map_err(|message| Error::Numeric {
        cell: format!("[{a}, {b}) x [{c}, {d})"),
        message,
    })
}

fn gamma_lr(k: f64, y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        statrs::function::gamma::gamma_lr(k, y)
    }
}

fn bin_of(edges: &[f64], v: f64) -> Option<usize> {
    if !(v >= edges[0] && v < edges[edges.len() - 1]) {
        return None;
    }
    Some(edges.partition_point(|&e| e <= v) - 1)
}

/// Counts of points over the product grid, row-major in the first axis.
pub fn grid_counts(points: &[(f64, f64)], ea: &[f64], eb: &[f64]) -> Vec<u64> {
    let nb = eb.len() - 1;
    let mut counts = vec![0u64; (ea.len() - 1) * nb];
    for &(a, b) in points {
        if let (Some(i), Some(j)) = (bin_of(ea, a), bin_of(eb, b)) {
            counts[i * nb + j] += 1;
        }
    }
    counts
}

/// Chi-square on a 2D grid, requiring at least `min_cells` cells after
/// merging. Returns the fit test, the cell-count test and the cell table.
pub fn grid_chi_square(
    label: &str,
    ea: &[f64],
    eb: &[f64],
    counts: Vec<u64>,
    expected: Vec<f64>,
    min_cells: usize,
    axes: (&str, &str),
) -> Result<(TestResult, TestResult, Table)> {
    let b = BinnedCounts::new(vec![ea.to_vec(), eb.to_vec()], counts, expected)?;
    let fit = chi_square_gof(&b)?.named(format!("{label}_chi_square"));
    let cells = fit.cells.unwrap_or(0);
    let cell_test = at_least(&format!("{label}_effective_cells"), cells as f64, min_cells as f64, "cells after merging");
    let (a_lo, a_hi) = (format!("{}_lo", axes.0), format!("{}_hi", axes.0));
    let (b_lo, b_hi) = (format!("{}_lo", axes.1), format!("{}_hi", axes.1));
    let mut table = Table::new(
        format!("{label}_cells"),
        &[&a_lo, &a_hi, &b_lo, &b_hi, "observed", "expected"],
    );
    let nb = eb.len() - 1;
    for i in 0..ea.len() - 1 {
        for j in 0..nb {
            table.push(vec![
                ea[i].into(),
                ea[i + 1].into(),
                eb[j].into(),
                eb[j + 1].into(),
                b.counts[i * nb + j].into(),
                b.expected[i * nb + j].into(),
            ]);
        }
    }
    Ok((fit, cell_test, table))
}

/// One-sample KS at significance `alpha`.
pub fn ks_alpha(name: &str, samples: &[f64], cdf: impl Fn(f64) -> f64, alpha: f64) -> Result<TestResult> {
    let r = ks_one_sample(samples, cdf)?;
    let thr = ks_critical(alpha) / (samples.len() as f64).sqrt();
    Ok(r.named(name).with_threshold(thr).with_detail(format!("alpha={alpha}")))
}

/// One-sample KS with a fixed distance threshold.
pub fn ks_fixed(name: &str, samples: &[f64], cdf: impl Fn(f64) -> f64, threshold: f64) -> Result<TestResult> {
    Ok(ks_one_sample(samples, cdf)?.named(name).with_threshold(threshold))
}

/// A one-column table of floats.
pub fn column_table(name: &str, column: &str, values: &[f64]) -> Table {
    let mut t = Table::new(name, &[column]);
    for &v in values {
        t.push(vec![Field::Float(v)]);
    }
    t
}
