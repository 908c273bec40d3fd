//! Deterministic random streams and exact samplers for the elementary laws
//! the quadrant model needs: uniform, exponential, Poisson counts, gamma,
//! the `beta(k, 1)` stick-breaking factor and the harmonic first-success
//! index.
//!
//! Every stream is a ChaCha8 keystream addressed by `(seed, stream_id)`.
//! Transcendental functions go through `libm`, so a given
//! `(seed, stream_id, ALGORITHM_VERSION)` triple yields the same bits on
//! every platform.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{param, require_positive, Result};

/// Identifies the generator, the uniform mapping and the sampler set.
/// Bump whenever any sampler changes the bits it produces.
pub const ALGORITHM_VERSION: &str = "chacha8-seed_from_u64/u53-open/libm-samplers/v1";

/// Default trial cap for [`harmonic_first_success`].
pub const DEFAULT_HARMONIC_CAP: u64 = 1_000_000;

const TWO_POW_MINUS_53: f64 = 1.0 / 9_007_199_254_740_992.0;

/// A reproducible random substream.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn algorithm_version(&self) -> &'static str {
        ALGORITHM_VERSION
    }

    /// A fresh stream with the same seed and a different substream selector.
    pub fn substream(&self, stream_id: u64) -> Self {
        Self::new(self.seed, stream_id)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval (0, 1), on the 2^-53 grid shifted by half a step.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * TWO_POW_MINUS_53
    }

    /// Uniform on (lo, hi).
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    #[inline]
    pub(crate) fn unit_exp(&mut self) -> f64 {
        -libm::log(self.uniform())
    }

    /// Standard normal by Box-Muller; the sine branch is discarded.
    pub(crate) fn standard_normal(&mut self) -> f64 {
        let radius = libm::sqrt(-2.0 * libm::log(self.uniform()));
        radius * libm::cos(std::f64::consts::TAU * self.uniform())
    }
}

/// Either a value or a marker that a trial cap was exhausted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Capped<T> {
    Value(T),
    Overflow,
}

impl<T> Capped<T> {
    pub fn value(self) -> Option<T> {
        match self {
            Capped::Value(v) => Some(v),
            Capped::Overflow => None,
        }
    }

    pub fn is_overflow(&self) -> bool {
        matches!(self, Capped::Overflow)
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Capped<U> {
        match self {
            Capped::Value(v) => Capped::Value(f(v)),
            Capped::Overflow => Capped::Overflow,
        }
    }
}

/// Exponential with the given rate, as `-ln(U) / rate`.
pub fn exp_sample(stream: &mut RngStream, rate: f64) -> Result<f64> {
    require_positive("rate", rate)?;
    Ok(stream.unit_exp() / rate)
}

/// `B` with `P(B <= z) = z^k` on [0, 1], drawn as `U^(1/k)`.
///
/// Draws that round up to exactly 1.0 are redrawn so the value always
/// shrinks whatever it multiplies.
pub fn beta_k1_sample(stream: &mut RngStream, k: f64) -> Result<f64> {
    require_positive("k", k)?;
    if k == 1.0 {
        return Ok(stream.uniform());
    }
    let inv = 1.0 / k;
    loop {
        let b = libm::pow(stream.uniform(), inv);
        if b < 1.0 {
            return Ok(b);
        }
    }
}

/// Gamma law with density `rate^k x^(k-1) e^(-rate x) / Gamma(k)`.
///
/// Integer shapes are the exact sum of `shape` exponential(rate) draws,
/// taken in order from the stream, so the result is bit-identical to
/// summing successive [`exp_sample`] calls. Other shapes use the
/// Marsaglia-Tsang squeeze/rejection sampler, boosted by `U^(1/shape)` when
/// the shape is below one.
pub fn gamma_sample(stream: &mut RngStream, shape_k: f64, rate_t: f64) -> Result<f64> {
    require_positive("shape", shape_k)?;
    require_positive("rate", rate_t)?;
    if shape_k.fract() == 0.0 && shape_k <= u32::MAX as f64 {
        let mut sum = 0.0;
        for _ in 0..shape_k as u64 {
            sum += stream.unit_exp() / rate_t;
        }
        return Ok(sum);
    }
    let g = if shape_k < 1.0 {
        let boosted = marsaglia_tsang(stream, shape_k + 1.0);
        boosted * libm::pow(stream.uniform(), 1.0 / shape_k)
    } else {
        marsaglia_tsang(stream, shape_k)
    };
    Ok(g / rate_t)
}

fn marsaglia_tsang(stream: &mut RngStream, shape: f64) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / libm::sqrt(9.0 * d);
    loop {
        let z = stream.standard_normal();
        let v = 1.0 + c * z;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = stream.uniform();
        let z2 = z * z;
        if u < 1.0 - 0.0331 * z2 * z2 {
            return d * v;
        }
        if libm::log(u) < 0.5 * z2 + d * (1.0 - v + libm::log(v)) {
            return d * v;
        }
    }
}

/// Poisson count with the given mean.
///
/// Means below 10 use sequential inversion; larger means use Hörmann's
/// transformed rejection with squeeze (PTRS), which is exact.
pub fn poisson_count(stream: &mut RngStream, mean: f64) -> Result<u64> {
    if !(mean.is_finite() && mean >= 0.0) {
        return param(format!("Poisson mean must be finite and >= 0, got {mean}"));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    if mean < 10.0 {
        Ok(poisson_inversion(stream, mean))
    } else {
        Ok(poisson_ptrs(stream, mean))
    }
}

fn poisson_inversion(stream: &mut RngStream, mean: f64) -> u64 {
    let u = stream.uniform();
    let mut n = 0u64;
    let mut p = libm::exp(-mean);
    let mut cdf = p;
    while u > cdf {
        n += 1;
        p *= mean / n as f64;
        if p == 0.0 {
            break;
        }
        cdf += p;
    }
    n
}

fn poisson_ptrs(stream: &mut RngStream, mean: f64) -> u64 {
    let log_mean = libm::log(mean);
    let b = 0.931 + 2.53 * libm::sqrt(mean);
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = stream.uniform() - 0.5;
        let v = stream.uniform();
        let us = 0.5 - u.abs();
        let k = libm::floor((2.0 * a / us + b) * u + mean + 0.43);
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = libm::log(v) + libm::log(inv_alpha) - libm::log(a / (us * us) + b);
        let rhs = -mean + k * log_mean - libm::lgamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// Index of the first success in independent trials whose success
/// probabilities are `1/k, 1/(k+1), 1/(k+2), ...`.
///
/// The survival function telescopes to `P(N > n) = (k-1)/(k-1+n)`, so the
/// index is drawn by inversion from a single uniform. The law has infinite
/// mean for `k >= 2`; indices beyond `cap` come back as [`Capped::Overflow`].
pub fn harmonic_first_success(stream: &mut RngStream, k: u64, cap: u64) -> Result<Capped<u64>> {
    if k == 0 {
        return param("harmonic_first_success needs k >= 1");
    }
    if cap == 0 {
        return param("harmonic_first_success needs cap >= 1");
    }
    let v = stream.uniform();
    let failures = libm::floor((k - 1) as f64 * (1.0 - v) / v);
    if failures + 1.0 > cap as f64 {
        Ok(Capped::Overflow)
    } else {
        Ok(Capped::Value(failures as u64 + 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(xs: &[f64]) -> f64 {
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        let mut c = RngStream::new(7, 4);
        let xa: Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..16).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..16).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn uniform_stays_open() {
        let mut s = RngStream::new(1, 0);
        for _ in 0..100_000 {
            let u = s.uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn exp_mean_and_inverse_cdf_construction() {
        let mut s = RngStream::new(11, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| exp_sample(&mut s, 1.0).unwrap()).collect();
        assert!((mean(&xs) - 1.0).abs() < 0.02);

        let mut s1 = RngStream::new(5, 9);
        let mut s2 = RngStream::new(5, 9);
        for _ in 0..100 {
            let u = s1.uniform();
            assert_eq!(exp_sample(&mut s2, 1.0).unwrap(), -libm::log(u));
        }
    }

    #[test]
    fn exp_rate_scaling_is_exact() {
        let mut s1 = RngStream::new(5, 2);
        let mut s2 = RngStream::new(5, 2);
        for _ in 0..1000 {
            let one = exp_sample(&mut s1, 1.0).unwrap();
            let two = exp_sample(&mut s2, 2.0).unwrap();
            assert_eq!(two, one / 2.0);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut s = RngStream::new(0, 0);
        assert!(exp_sample(&mut s, 0.0).is_err());
        assert!(exp_sample(&mut s, -1.0).is_err());
        assert!(beta_k1_sample(&mut s, 0.0).is_err());
        assert!(gamma_sample(&mut s, 0.0, 1.0).is_err());
        assert!(gamma_sample(&mut s, 1.0, f64::NAN).is_err());
        assert!(poisson_count(&mut s, -0.1).is_err());
        assert!(harmonic_first_success(&mut s, 0, 10).is_err());
        assert!(harmonic_first_success(&mut s, 2, 0).is_err());
    }

    #[test]
    fn beta_k1_with_unit_k_passes_uniforms_through() {
        let mut s1 = RngStream::new(3, 1);
        let mut s2 = RngStream::new(3, 1);
        for _ in 0..1000 {
            assert_eq!(beta_k1_sample(&mut s1, 1.0).unwrap(), s2.uniform());
        }
    }

    #[test]
    fn beta_k1_cdf_is_power_law() {
        let n = 100_000;
        let mut s = RngStream::new(12, 0);
        let mut xs: Vec<f64> = (0..n).map(|_| beta_k1_sample(&mut s, 3.0).unwrap()).collect();
        xs.sort_by(f64::total_cmp);
        let mut sup: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let f = x.powi(3);
            sup = sup.max((f - i as f64 / n as f64).abs());
            sup = sup.max(((i + 1) as f64 / n as f64 - f).abs());
        }
        assert!(sup < 0.01, "sup error {sup}");
        assert!(sup < 2.0 * 1.36 / (n as f64).sqrt());
    }

    #[test]
    fn beta_k1_median_for_k2() {
        let mut s = RngStream::new(13, 0);
        let mut xs: Vec<f64> = (0..100_001).map(|_| beta_k1_sample(&mut s, 2.0).unwrap()).collect();
        xs.sort_by(f64::total_cmp);
        assert!((xs[50_000] - 0.5f64.sqrt()).abs() < 0.01);
    }

    #[test]
    fn gamma_unit_shape_is_exponential() {
        let mut s1 = RngStream::new(4, 4);
        let mut s2 = RngStream::new(4, 4);
        for _ in 0..1000 {
            assert_eq!(
                gamma_sample(&mut s1, 1.0, 2.5).unwrap(),
                exp_sample(&mut s2, 2.5).unwrap()
            );
        }
    }

    #[test]
    fn gamma_integer_shape_is_exponential_partial_sum() {
        let mut s1 = RngStream::new(8, 1);
        let mut s2 = RngStream::new(8, 1);
        for _ in 0..200 {
            let g = gamma_sample(&mut s1, 4.0, 1.5).unwrap();
            let mut sum = 0.0;
            for _ in 0..4 {
                sum += exp_sample(&mut s2, 1.5).unwrap();
            }
            assert_eq!(g, sum);
        }
    }

    #[test]
    fn gamma_means() {
        for &(k, t) in &[(3.0, 2.0), (2.5, 1.0), (0.4, 3.0), (7.25, 0.5)] {
            let mut s = RngStream::new(21, 0);
            let xs: Vec<f64> = (0..100_000).map(|_| gamma_sample(&mut s, k, t).unwrap()).collect();
            let m = mean(&xs);
            assert!((m / (k / t) - 1.0).abs() < 0.02, "k={k} t={t} mean={m}");
        }
    }

    #[test]
    fn poisson_zero_mean_is_degenerate() {
        let mut s = RngStream::new(0, 0);
        for _ in 0..100 {
            assert_eq!(poisson_count(&mut s, 0.0).unwrap(), 0);
        }
    }

    #[test]
    fn poisson_equidispersion() {
        for &lam in &[0.5, 4.0, 10.0, 37.5, 1000.0] {
            let mut s = RngStream::new(31, 0);
            let xs: Vec<f64> = (0..100_000)
                .map(|_| poisson_count(&mut s, lam).unwrap() as f64)
                .collect();
            let m = mean(&xs);
            let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
            assert!((m - lam).abs() < 0.01 * lam.max(10.0), "lam={lam} mean={m}");
            let d = var / m;
            assert!((0.97..=1.03).contains(&d), "lam={lam} dispersion={d}");
        }
    }

    #[test]
    fn poisson_zero_probability_at_half() {
        let mut s = RngStream::new(32, 0);
        let n = 100_000;
        let zeros = (0..n).filter(|_| poisson_count(&mut s, 0.5).unwrap() == 0).count();
        assert!((zeros as f64 / n as f64 - (-0.5f64).exp()).abs() < 0.01);
    }

    #[test]
    fn harmonic_unit_k_always_one() {
        let mut s = RngStream::new(40, 0);
        for _ in 0..1000 {
            assert_eq!(harmonic_first_success(&mut s, 1, 10).unwrap(), Capped::Value(1));
        }
    }

    #[test]
    fn harmonic_first_trial_probability() {
        let mut s = RngStream::new(41, 0);
        let n = 100_000;
        let ones = (0..n)
            .filter(|_| harmonic_first_success(&mut s, 2, DEFAULT_HARMONIC_CAP).unwrap() == Capped::Value(1))
            .count();
        assert!((ones as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    /// Independent route: literally run the Bernoulli trials.
    fn harmonic_by_trials(stream: &mut RngStream, k: u64, cap: u64) -> Capped<u64> {
        for i in 0..cap {
            if stream.uniform() < 1.0 / (k + i) as f64 {
                return Capped::Value(i + 1);
            }
        }
        Capped::Overflow
    }

    #[test]
    fn harmonic_inversion_matches_trial_simulation() {
        for k in [2u64, 3, 5] {
            let n = 50_000;
            let mut s1 = RngStream::new(42, k);
            let mut s2 = RngStream::new(43, k);
            let cap = 10_000;
            let mut by_inv = vec![0usize; 12];
            let mut by_trials = vec![0usize; 12];
            for _ in 0..n {
                let a = harmonic_first_success(&mut s1, k, cap).unwrap().value().unwrap_or(cap + 1);
                let b = harmonic_by_trials(&mut s2, k, cap).value().unwrap_or(cap + 1);
                by_inv[(a as usize).min(11)] += 1;
                by_trials[(b as usize).min(11)] += 1;
            }
            for j in 1..12 {
                let pa = by_inv[j] as f64 / n as f64;
                let pb = by_trials[j] as f64 / n as f64;
                assert!((pa - pb).abs() < 0.012, "k={k} n={j}: {pa} vs {pb}");
            }
        }
    }

    #[test]
    fn harmonic_tail_is_heavy_and_monotone() {
        let n = 200_000u64;
        let cap = 100_000;
        let mut s = RngStream::new(44, 0);
        let draws: Vec<u64> = (0..n)
            .map(|_| harmonic_first_success(&mut s, 2, cap).unwrap().value().unwrap_or(cap + 1))
            .collect();
        let mut prev = 1.0;
        for m in [1u64, 2, 5, 10, 100, 1000] {
            let tail = draws.iter().filter(|&&d| d > m).count() as f64 / n as f64;
            assert!(tail <= prev);
            // P(N > m) = 1/(m+1) for k = 2; stays above c/m with c = 1/2
            assert!(tail > 0.5 / m as f64, "m={m} tail={tail}");
            prev = tail;
        }
    }

    #[test]
    fn harmonic_overflow_marker() {
        let mut s = RngStream::new(45, 0);
        let overflow = (0..100_000)
            .filter(|_| harmonic_first_success(&mut s, 2, 1).unwrap().is_overflow())
            .count();
        // P(N > 1) = 1/2
        assert!((overflow as f64 / 100_000.0 - 0.5).abs() < 0.01);
    }
}
