//! Goodness-of-fit machinery: Kolmogorov-Smirnov, chi-square with cell
//! merging, Poisson dispersion, proportions, correlations and binned
//! intensity comparison.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::densities::ln_gamma;
use crate::error::{param, Error, Result};
use crate::quadrature::{integrate_1d, integrate_2d, Tolerance};

/// Default significance for exploratory runs.
pub const ALPHA_EXPLORATORY: f64 = 0.05;
/// Significance used by the pinned-seed acceptance runs.
pub const ALPHA_ACCEPTANCE: f64 = 0.001;
/// Smallest expected count a chi-square cell may carry after merging.
pub const MIN_EXPECTED: f64 = 5.0;

/// How a statistic is compared with its threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Criterion {
    /// statistic <= threshold
    AtMost,
    /// statistic >= threshold
    AtLeast,
    /// statistic > threshold
    Above,
    /// lo <= statistic <= hi; `threshold` holds the half-width
    Within { lo: f64, hi: f64 },
}

impl Criterion {
    pub fn holds(&self, statistic: f64, threshold: f64) -> bool {
        match *self {
            Criterion::AtMost => statistic <= threshold,
            Criterion::AtLeast => statistic >= threshold,
            Criterion::Above => statistic > threshold,
            Criterion::Within { lo, hi } => lo <= statistic && statistic <= hi,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::AtMost => f.write_str("<="),
            Criterion::AtLeast => f.write_str(">="),
            Criterion::Above => f.write_str(">"),
            Criterion::Within { lo, hi } => write!(f, "in [{lo}, {hi}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub n: u64,
    pub passed: bool,
    pub criterion: Criterion,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_value: Option<f64>,
    /// Chi-square cells left after merging.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cells: Option<usize>,
    pub detail: String,
}

impl TestResult {
    pub fn new(
        name: impl Into<String>,
        statistic: f64,
        threshold: f64,
        n: u64,
        criterion: Criterion,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold,
            n,
            passed: statistic.is_finite() && criterion.holds(statistic, threshold),
            criterion,
            p_value: None,
            cells: None,
            detail: detail.into(),
        }
    }

    /// A test that could not be evaluated; always fails.
    pub fn failed(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            statistic: f64::NAN,
            threshold: f64::NAN,
            n: 0,
            passed: false,
            criterion: Criterion::AtMost,
            p_value: None,
            cells: None,
            detail: detail.into(),
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self.passed = self.statistic.is_finite() && self.criterion.holds(self.statistic, threshold);
        self
    }

    pub fn with_detail(mut self, extra: impl AsRef<str>) -> Self {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(extra.as_ref());
        self
    }
}

/// Asymptotic Kolmogorov critical coefficient `c(α) = sqrt(-ln(α/2) / 2)`.
pub fn ks_critical(alpha: f64) -> f64 {
    (-0.5 * (0.5 * alpha).ln()).sqrt()
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// Sup-distance between the empirical distribution of `samples` and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let xs = sorted(samples);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// One-sample KS test with the asymptotic threshold at `α = 0.05`.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestResult> {
    if samples.is_empty() {
        return param("KS test needs at least one sample");
    }
    let n = samples.len();
    let d = ks_statistic(samples, cdf);
    let thr = ks_critical(ALPHA_EXPLORATORY) / (n as f64).sqrt();
    Ok(TestResult::new("ks_one_sample", d, thr, n as u64, Criterion::AtMost, ""))
}

/// Sup-distance between two empirical distribution functions.
pub fn ks_two_sample_statistic(a: &[f64], b: &[f64]) -> f64 {
    let (xa, xb) = (sorted(a), sorted(b));
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let v = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= v {
            i += 1;
        }
        while j < xb.len() && xb[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Two-sample KS test with threshold `c(α) sqrt((n_a + n_b) / (n_a n_b))`.
pub fn ks_two_sample_alpha(a: &[f64], b: &[f64], alpha: f64) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return param("two-sample KS needs two nonempty samples");
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let d = ks_two_sample_statistic(a, b);
    let thr = ks_critical(alpha) * ((na + nb) / (na * nb)).sqrt();
    Ok(TestResult::new(
        "ks_two_sample",
        d,
        thr,
        (a.len() + b.len()) as u64,
        Criterion::AtMost,
        format!("n_a={} n_b={} alpha={alpha}", a.len(), b.len()),
    ))
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    ks_two_sample_alpha(a, b, ALPHA_EXPLORATORY)
}

/// Observed and expected counts over a grid of half-open cells (up to three axes).
/// Cells are stored row-major, first axis outermost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinnedCounts {
    pub edges: Vec<Vec<f64>>,
    pub counts: Vec<u64>,
    pub expected: Vec<f64>,
}

impl BinnedCounts {
    pub fn new(edges: Vec<Vec<f64>>, counts: Vec<u64>, expected: Vec<f64>) -> Result<Self> {
        if edges.is_empty() || edges.len() > 3 {
            return param("binned counts need one to three axes");
        }
        for e in &edges {
            if e.len() < 2 || e.windows(2).any(|w| !(w[0] < w[1])) {
                return param("bin edges must be strictly increasing with at least two entries");
            }
        }
        let cells: usize = edges.iter().map(|e| e.len() - 1).product();
        if counts.len() != cells || expected.len() != cells {
            return param(format!(
                "{cells} cells but {} counts and {} expected values",
                counts.len(),
                expected.len()
            ));
        }
        if expected.iter().any(|&e| !(e >= 0.0 && e.is_finite())) {
            return param("expected cell values must be finite and nonnegative");
        }
        Ok(Self {
            edges,
            counts,
            expected,
        })
    }

    pub fn total_observed(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn total_expected(&self) -> f64 {
        self.expected.iter().sum()
    }
}

/// Greedy merge of adjacent cells until each group expects at least
/// [`MIN_EXPECTED`]; a short remainder joins the last group.
fn merge_cells(counts: &[u64], expected: &[f64]) -> Vec<(f64, f64)> {
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&c, &x) in counts.iter().zip(expected) {
        o += c as f64;
        e += x;
        if e >= MIN_EXPECTED {
            groups.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if o > 0.0 || e > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => groups.push((o, e)),
        }
    }
    groups
}

fn chi_square_core(counts: &[u64], expected: &[f64]) -> Result<(f64, usize)> {
    let groups = merge_cells(counts, expected);
    if groups.is_empty() || groups.iter().all(|g| g.1 < MIN_EXPECTED) {
        return param("every chi-square cell merged away: total expected count below 5");
    }
    let stat = groups.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    Ok((stat, groups.len()))
}

fn chi_square_dist(df: usize) -> ChiSquared {
    ChiSquared::new(df as f64).expect("positive degrees of freedom")
}

/// Pearson chi-square with `df = cells - 1` after merging. Passes when the
/// p-value exceeds `alpha`; the threshold is the matching critical value.
pub fn chi_square_gof_alpha(binned: &BinnedCounts, alpha: f64) -> Result<TestResult> {
    let (stat, cells) = chi_square_core(&binned.counts, &binned.expected)?;
    let df = cells.saturating_sub(1).max(1);
    let dist = chi_square_dist(df);
    let p = dist.sf(stat);
    let mut r = TestResult::new(
        "chi_square_gof",
        stat,
        dist.inverse_cdf(1.0 - alpha),
        binned.total_observed(),
        Criterion::AtMost,
        format!("df={df} alpha={alpha} p={p:.6e}"),
    );
    r.passed = p > alpha;
    r.p_value = Some(p);
    r.cells = Some(cells);
    Ok(r)
}

pub fn chi_square_gof(binned: &BinnedCounts) -> Result<TestResult> {
    chi_square_gof_alpha(binned, ALPHA_ACCEPTANCE)
}

/// The mirror image of [`chi_square_gof_alpha`]: passes when the fit is
/// rejected, i.e. the p-value falls below `alpha`.
pub fn chi_square_reject(binned: &BinnedCounts, alpha: f64) -> Result<TestResult> {
    let fit = chi_square_gof_alpha(binned, alpha)?;
    let p = fit.p_value.unwrap_or(1.0);
    let mut r = TestResult {
        name: "chi_square_reject".into(),
        criterion: Criterion::Above,
        ..fit
    };
    r.passed = p < alpha;
    Ok(r)
}

fn poisson_pmf(mean: f64, n: u64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (-mean + n as f64 * mean.ln() - ln_gamma(n as f64 + 1.0)).exp()
}

/// Chi-square of the count histogram against the Poisson law with the
/// sample mean; the top class collects the upper tail.
pub fn poisson_histogram_test(counts: &[u64], mean: f64) -> Result<TestResult> {
    let max = counts.iter().copied().max().unwrap_or(0);
    let top = max.max((mean + 6.0 * mean.sqrt() + 6.0) as u64);
    let mut obs = vec![0u64; top as usize + 1];
    for &c in counts {
        obs[c.min(top) as usize] += 1;
    }
    let n = counts.len() as f64;
    let mut exp: Vec<f64> = (0..top).map(|i| n * poisson_pmf(mean, i)).collect();
    let head: f64 = exp.iter().sum();
    exp.push((n - head).max(0.0));
    let edges = vec![(0..=top + 1).map(|i| i as f64).collect()];
    let b = BinnedCounts::new(edges, obs, exp)?;
    Ok(chi_square_gof(&b)?.named("poisson_histogram"))
}

/// Variance-to-mean ratio of counts, passing inside `[lo, hi]`. The detail
/// carries a companion chi-square of the count histogram against the
/// fitted Poisson law, which flags multimodal patterns the ratio misses.
pub fn poisson_dispersion_band(counts: &[u64], lo: f64, hi: f64) -> Result<TestResult> {
    if counts.len() < 2 {
        return param("dispersion needs at least two counts");
    }
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let band = Criterion::Within { lo, hi };
    let half = 0.5 * (hi - lo);
    if mean == 0.0 {
        return Ok(TestResult {
            name: "poisson_dispersion".into(),
            statistic: f64::NAN,
            threshold: half,
            n: counts.len() as u64,
            passed: false,
            criterion: band,
            p_value: None,
            cells: None,
            detail: "all counts zero: dispersion undefined".into(),
        });
    }
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let ratio = var / mean;
    let companion = match poisson_histogram_test(counts, mean) {
        Ok(r) => format!("companion chi-square {:.4} p={:.4e}", r.statistic, r.p_value.unwrap_or(f64::NAN)),
        Err(e) => format!("companion chi-square unavailable: {e}"),
    };
    Ok(TestResult::new(
        "poisson_dispersion",
        ratio,
        half,
        counts.len() as u64,
        band,
        format!("mean={mean:.6} var={var:.6}; {companion}"),
    ))
}

pub fn poisson_dispersion(counts: &[u64]) -> Result<TestResult> {
    poisson_dispersion_band(counts, 0.9, 1.1)
}

/// `|p̂ - p0| / sqrt(p0 (1 - p0) / n)`, passing at most 3.
pub fn proportion_test(successes: u64, trials: u64, p0: f64) -> Result<TestResult> {
    if trials == 0 {
        return param("proportion test needs at least one trial");
    }
    if successes > trials {
        return param("successes exceed trials");
    }
    if !(p0 > 0.0 && p0 < 1.0) {
        return param(format!("p0 must lie in (0, 1), got {p0}"));
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z = (phat - p0).abs() / (p0 * (1.0 - p0) / n).sqrt();
    Ok(TestResult::new(
        "proportion",
        z,
        3.0,
        trials,
        Criterion::AtMost,
        format!("observed {successes}/{trials} = {phat:.6}, p0 = {p0:.6}"),
    ))
}

/// Pearson sample correlation; `NaN` when either side is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// `|corr(a, b)| <= max_abs`.
pub fn correlation_test(a: &[f64], b: &[f64], max_abs: f64) -> Result<TestResult> {
    if a.len() != b.len() || a.len() < 3 {
        return param("correlation needs two equal-length samples of size >= 3");
    }
    let r = pearson(a, b);
    Ok(TestResult::new(
        "correlation",
        r.abs(),
        max_abs,
        a.len() as u64,
        Criterion::AtMost,
        format!("rho={r:.6}"),
    ))
}

/// Total variation between observed category counts and category
/// probabilities. Probabilities summing below one leave their deficit as
/// an unobserved category.
pub fn total_variation(observed: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = observed.iter().sum();
    let n = n.max(1) as f64;
    let deficit = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    let diff: f64 = observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| (o as f64 / n - p).abs())
        .sum();
    0.5 * (diff + deficit)
}

fn bin_of(edges: &[f64], v: f64) -> Option<usize> {
    if !(v >= edges[0] && v < edges[edges.len() - 1]) {
        return None;
    }
    Some(edges.partition_point(|&e| e <= v) - 1)
}

/// Counts of 1D samples in `[edges_i, edges_{i+1})` against `replicas`
/// times the integrated intensity.
pub fn binned_intensity_compare_1d(
    samples: &[f64],
    intensity: &dyn Fn(f64) -> f64,
    edges: &[f64],
    replicas: u64,
) -> Result<(BinnedCounts, TestResult)> {
    let cells = edges.len().saturating_sub(1);
    let mut counts = vec![0u64; cells];
    for &v in samples {
        if let Some(i) = bin_of(edges, v) {
            counts[i] += 1;
        }
    }
    let mut expected = Vec::with_capacity(cells);
    for i in 0..cells {
        let m = integrate_1d(intensity, edges[i], edges[i + 1], Tolerance::default()).map_err(
            |message| Error::Numeric {
                cell: format!("[{}, {})", edges[i], edges[i + 1]),
                message,
            },
        )?;
        expected.push(m * replicas as f64);
    }
    let b = BinnedCounts::new(vec![edges.to_vec()], counts, expected)?;
    let r = chi_square_gof(&b)?.named("binned_intensity");
    Ok((b, r))
}

/// 2D version of [`binned_intensity_compare_1d`] over the product grid.
pub fn binned_intensity_compare_2d(
    points: &[(f64, f64)],
    intensity: &dyn Fn(f64, f64) -> f64,
    edges_a: &[f64],
    edges_b: &[f64],
    replicas: u64,
) -> Result<(BinnedCounts, TestResult)> {
    let (na, nb) = (edges_a.len().saturating_sub(1), edges_b.len().saturating_sub(1));
    let mut counts = vec![0u64; na * nb];
    for &(a, b) in points {
        if let (Some(i), Some(j)) = (bin_of(edges_a, a), bin_of(edges_b, b)) {
            counts[i * nb + j] += 1;
        }
    }
    let mut expected = Vec::with_capacity(na * nb);
    for i in 0..na {
        for j in 0..nb {
            let m = integrate_2d(
                intensity,
                (edges_a[i], edges_a[i + 1]),
                (edges_b[j], edges_b[j + 1]),
                Tolerance::default(),
            )
            .map_err(|message| Error::Numeric {
                cell: format!(
                    "[{}, {}) x [{}, {})",
                    edges_a[i],
                    edges_a[i + 1],
                    edges_b[j],
                    edges_b[j + 1]
                ),
                message,
            })?;
            expected.push(m * replicas as f64);
        }
    }
    let b = BinnedCounts::new(vec![edges_a.to_vec(), edges_b.to_vec()], counts, expected)?;
    let r = chi_square_gof(&b)?.named("binned_intensity");
    Ok((b, r))
}
