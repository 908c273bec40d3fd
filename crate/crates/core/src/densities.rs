//! Closed-form densities and intensities of the k-th minimum, the corner and
//! record processes and the lifetime-marked process. Everything is evaluated
//! in log space and exponentiated once.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::pointset::PlanarPoint;

/// `ln Γ(k)`; exact log-factorial for integer arguments up to 170.
pub fn ln_gamma(k: f64) -> f64 {
    if k.fract() == 0.0 && (1.0..=171.0).contains(&k) {
        gamma_fn(k).ln()
    } else {
        statrs::function::gamma::ln_gamma(k)
    }
}

/// `Γ(k)`; for integers this is the exact product `(k-1)!`, which is exactly
/// representable up to `k = 23`.
pub fn gamma_fn(k: f64) -> f64 {
    if k.fract() == 0.0 && (1.0..=171.0).contains(&k) {
        (2..k as u32).fold(1.0, |acc, i| acc * i as f64)
    } else {
        statrs::function::gamma::gamma(k)
    }
}

fn check(k: f64, t: f64, x: f64) -> Result<()> {
    require_positive("k", k)?;
    require_positive("t", t)?;
    require_positive("x", x)
}

fn ln_record_kernel(k: f64, t: f64, x: f64) -> f64 {
    let tx = t * x;
    (k - 1.0) * tx.ln() - tx - ln_gamma(k)
}

/// Density in `x` of the k-th smallest value seen by time `t`:
/// `t (tx)^(k-1) e^(-tx) / Γ(k)`.
pub fn gamma_marginal_pdf(k: f64, t: f64, x: f64) -> Result<f64> {
    check(k, t, x)?;
    Ok((t.ln() + ln_record_kernel(k, t, x)).exp())
}

/// Distribution function companion of [`gamma_marginal_pdf`], the
/// regularized lower incomplete gamma `P(k, tx)`. Zero for `x <= 0`.
pub fn gamma_marginal_cdf(k: f64, t: f64, x: f64) -> Result<f64> {
    require_positive("k", k)?;
    require_positive("t", t)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(statrs::function::gamma::gamma_lr(k, t * x))
}

/// Intensity of the k-corner process: `k (tx)^(k-1) e^(-tx) / Γ(k)`.
pub fn corner_intensity_p1(k: f64, t: f64, x: f64) -> Result<f64> {
    check(k, t, x)?;
    Ok((k.ln() + ln_record_kernel(k, t, x)).exp())
}

/// Intensity of the k-record process: `(tx)^(k-1) e^(-tx) / Γ(k)`.
pub fn record_intensity(k: f64, t: f64, x: f64) -> Result<f64> {
    check(k, t, x)?;
    Ok(ln_record_kernel(k, t, x).exp())
}

/// Intensity of the (lifetime, value) marked process: `k e^(-sx)`.
pub fn j_intensity(k: f64, s: f64, x: f64) -> Result<f64> {
    check(k, s, x)?;
    Ok(k * (-s * x).exp())
}

/// Value charged against each interval between consecutive corners in the
/// exponent of the joint corner density.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExponentConvention {
    /// `t_1 x_1 + Σ (t_i - t_{i-1}) x_{i-1}`: the path holds the previous
    /// corner's value until the next corner.
    HeldValue,
    /// `t_1 x_1 + Σ (t_i - t_{i-1}) x_i`.
    TrailingValue,
}

impl ExponentConvention {
    pub fn other(self) -> Self {
        match self {
            Self::HeldValue => Self::TrailingValue,
            Self::TrailingValue => Self::HeldValue,
        }
    }
}

/// Consecutive k-corners `a_1, ..., a_m` with `t` strictly increasing and
/// `x` strictly decreasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerChain {
    k: f64,
    points: Vec<PlanarPoint>,
}

impl CornerChain {
    pub fn new(k: f64, points: Vec<PlanarPoint>) -> Result<Self> {
        require_positive("k", k)?;
        if points.is_empty() {
            return Err(Error::Precondition("a corner chain needs m >= 1 points".into()));
        }
        for p in &points {
            require_positive("t", p.t)?;
            require_positive("x", p.x)?;
        }
        if points.windows(2).any(|w| !(w[0].t < w[1].t && w[0].x > w[1].x)) {
            return Err(Error::Precondition(
                "corner chain needs t strictly increasing and x strictly decreasing".into(),
            ));
        }
        Ok(Self { k, points })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn points(&self) -> &[PlanarPoint] {
        &self.points
    }

    /// The chain reflected about the bisectrix: `t_i <-> x_{m+1-i}`.
    pub fn reflect(&self) -> Self {
        Self {
            k: self.k,
            points: self.points.iter().rev().map(|p| p.reflect()).collect(),
        }
    }
}

/// `ln p_m` for the chain under the given exponent convention.
pub fn ln_joint_corner_density(chain: &CornerChain, convention: ExponentConvention) -> f64 {
    let k = chain.k;
    let p = &chain.points;
    let m = p.len() as f64;
    let first = p[0];
    let last = p[p.len() - 1];
    let mut exponent = first.t * first.x;
    for w in p.windows(2) {
        let held = match convention {
            ExponentConvention::HeldValue => w[0].x,
            ExponentConvention::TrailingValue => w[1].x,
        };
        exponent += (w[1].t - w[0].t) * held;
    }
    m * k.ln() - ln_gamma(k) + (k - 1.0) * (first.t.ln() + last.x.ln()) - exponent
}

/// Joint density of `m` consecutive k-corners,
/// `k^m / Γ(k) (t_1 x_m)^(k-1) e^(-exponent)`, under the held-value
/// exponent.
pub fn joint_corner_density_pm(chain: &CornerChain) -> f64 {
    joint_corner_density_pm_with(chain, ExponentConvention::HeldValue)
}

pub fn joint_corner_density_pm_with(chain: &CornerChain, convention: ExponentConvention) -> f64 {
    ln_joint_corner_density(chain, convention).exp()
}
