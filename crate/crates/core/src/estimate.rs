//! Empirical distribution and quantile functions, the group-based variance
//! estimator and the resulting confidence intervals.

use serde::{Deserialize, Serialize};

use crate::error::{check_open_unit, Error, Result};
use crate::numerics::normal_quantile;
use crate::sample::GroupedSample;

/// Default `n·V̂` below which an interval carries a low-information warning.
pub const DEFAULT_LOW_INFORMATION_THRESHOLD: f64 = 10.0;

/// Sorted copy of a sample supporting `F̂` and its left-continuous inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        Self { sorted }
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// `F̂(x) = #{i : X_i <= x} / n`.
    pub fn cdf(&self, x: f64) -> f64 {
        let count = self.sorted.partition_point(|&v| v <= x);
        count as f64 / self.n() as f64
    }

    /// `Q̂(τ) = X_(k)` with `k` the smallest index such that `k/n >= τ`.
    pub fn quantile(&self, tau: f64) -> Result<f64> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::Domain(format!(
                "quantile level must lie in (0, 1], got {tau}"
            )));
        }
        Ok(self.sorted[order_index(self.n(), tau) - 1])
    }
}

/// One-based rank `k = ⌈nτ⌉`, computed so that `k/n >= τ > (k-1)/n` holds
/// in floating point; this keeps `Q̂` an exact inverse of `F̂`.
pub(crate) fn order_index(n: usize, tau: f64) -> usize {
    let nf = n as f64;
    let mut k = ((nf * tau).ceil() as usize).clamp(1, n);
    while k > 1 && (k - 1) as f64 / nf >= tau {
        k -= 1;
    }
    while k < n && (k as f64 / nf) < tau {
        k += 1;
    }
    k
}

/// Fraction of observations at or below `x`.
pub fn empirical_cdf(sample: &GroupedSample, x: f64) -> f64 {
    let count = sample.values().iter().filter(|&&v| v <= x).count();
    count as f64 / sample.n() as f64
}

/// Left-continuous empirical quantile `X_(⌈nτ⌉)`, no interpolation.
pub fn empirical_quantile(sample: &GroupedSample, tau: f64) -> Result<f64> {
    Ecdf::new(sample.values()).quantile(tau)
}

/// The group-based variance estimate at one quantile level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    /// `V̂(τ)`.
    pub v_hat: f64,
    /// `n·V̂(τ)`, the scale that must be large for the normal approximation.
    pub n_v_hat: f64,
    pub tau: f64,
    /// `Q̂(τ)`, the cut point used for the counts.
    pub quantile: f64,
    /// Per group, the number of observations `<= Q̂(τ)`.
    pub group_counts: Vec<usize>,
}

/// `n⁻¹ Σ_j A_j (m_j − A_j) / (m_j − 1)`.
pub(crate) fn grouped_variance(group_sizes: &[usize], counts: &[usize]) -> f64 {
    let n: usize = group_sizes.iter().sum();
    let total: f64 = group_sizes
        .iter()
        .zip(counts)
        .map(|(&m, &a)| (a * (m - a)) as f64 / (m - 1) as f64)
        .sum();
    total / n as f64
}

/// Upper bound `n⁻¹ Σ_j m_j² / (4(m_j − 1))` on `V̂` for the given group sizes.
pub fn variance_upper_bound(group_sizes: &[usize]) -> f64 {
    let n: usize = group_sizes.iter().sum();
    let total: f64 = group_sizes
        .iter()
        .map(|&m| (m * m) as f64 / (4 * (m - 1)) as f64)
        .sum();
    total / n as f64
}

/// Estimates `V_n(τ)` from within-group pairs split by `Q̂(τ)`.
///
/// Every pair `(ℓ₁, ℓ₂)` in a group with `X_ℓ₁ <= Q̂(τ) < X_ℓ₂` adds
/// `1/(m_j − 1)`; the pair count in group `j` is `A_j (m_j − A_j)`.
pub fn variance_estimator(sample: &GroupedSample, tau: f64) -> Result<VarianceEstimate> {
    check_open_unit("tau", tau)?;
    let ecdf = Ecdf::new(sample.values());
    variance_from_ecdf(sample, &ecdf, tau)
}

fn variance_from_ecdf(sample: &GroupedSample, ecdf: &Ecdf, tau: f64) -> Result<VarianceEstimate> {
    let quantile = ecdf.quantile(tau)?;
    let group_counts = sample.counts_at_or_below(quantile);
    let v_hat = grouped_variance(sample.group_sizes(), &group_counts);
    Ok(VarianceEstimate {
        v_hat,
        n_v_hat: v_hat * sample.n() as f64,
        tau,
        quantile,
        group_counts,
    })
}

/// `τ(1 − τ)`, the variance under i.i.d. sampling and the upper bound for any
/// heterogeneous design.
pub fn iid_variance(tau: f64) -> Result<f64> {
    check_open_unit("tau", tau)?;
    Ok(tau * (1.0 - tau))
}

/// Half-width on the probability scale, `√(v/n)·Φ⁻¹(1 − α/2)`.
pub fn half_width(v: f64, n: usize, alpha: f64) -> Result<f64> {
    check_open_unit("alpha", alpha)?;
    if v.is_nan() || v < 0.0 || v.is_infinite() {
        return Err(Error::Domain(format!(
            "variance must be finite and nonnegative, got {v}"
        )));
    }
    if n == 0 {
        return Err(Error::Domain("sample size must be positive".into()));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    Ok((v / n as f64).sqrt() * normal_quantile(1.0 - alpha / 2.0)?)
}

/// Confidence interval for the quantile of the average distribution.
///
/// Endpoints are `Q̂(τ − ĉ)` and `Q̂(τ + ĉ)`. A side whose level leaves
/// `(0, 1]` becomes infinite and sets its clip flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileCI {
    pub tau: f64,
    pub alpha: f64,
    pub n: usize,
    /// Variance plugged into the half-width (`V̂(τ)` or `τ(1−τ)`).
    pub variance: f64,
    /// `Q̂(τ)`.
    pub point: f64,
    /// `ĉ(α)`.
    pub half_width_level: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_clipped: bool,
    pub upper_clipped: bool,
    /// `n` times the variance used.
    pub lindeberg_scale: f64,
    pub low_information_warning: bool,
}

impl QuantileCI {
    /// `upper − lower`; infinite when a side is clipped.
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Open-interval containment `lower < x < upper`.
    pub fn covers(&self, x: f64) -> bool {
        self.lower < x && x < self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiOptions {
    /// Warn when `n·V̂` falls below this.
    pub low_information_threshold: f64,
}

impl Default for CiOptions {
    fn default() -> Self {
        Self {
            low_information_threshold: DEFAULT_LOW_INFORMATION_THRESHOLD,
        }
    }
}

/// Heterogeneity-aware interval using `V̂(τ)`.
pub fn confidence_interval(sample: &GroupedSample, tau: f64, alpha: f64) -> Result<QuantileCI> {
    confidence_interval_with(sample, tau, alpha, CiOptions::default())
}

pub fn confidence_interval_with(
    sample: &GroupedSample,
    tau: f64,
    alpha: f64,
    options: CiOptions,
) -> Result<QuantileCI> {
    check_open_unit("tau", tau)?;
    check_open_unit("alpha", alpha)?;
    let ecdf = Ecdf::new(sample.values());
    let estimate = variance_from_ecdf(sample, &ecdf, tau)?;
    interval_from_variance(&ecdf, tau, alpha, estimate.v_hat, options)
}

/// Baseline interval that ignores the grouping and uses `τ(1 − τ)`.
pub fn iid_confidence_interval(sample: &GroupedSample, tau: f64, alpha: f64) -> Result<QuantileCI> {
    iid_confidence_interval_with(sample, tau, alpha, CiOptions::default())
}

pub fn iid_confidence_interval_with(
    sample: &GroupedSample,
    tau: f64,
    alpha: f64,
    options: CiOptions,
) -> Result<QuantileCI> {
    let v = iid_variance(tau)?;
    check_open_unit("alpha", alpha)?;
    let ecdf = Ecdf::new(sample.values());
    interval_from_variance(&ecdf, tau, alpha, v, options)
}

/// Both intervals from one sort, as the simulation harness needs them.
pub(crate) fn both_intervals(
    sample: &GroupedSample,
    ecdf: &Ecdf,
    tau: f64,
    alpha: f64,
) -> Result<(VarianceEstimate, QuantileCI, QuantileCI)> {
    let estimate = variance_from_ecdf(sample, ecdf, tau)?;
    let options = CiOptions::default();
    let het = interval_from_variance(ecdf, tau, alpha, estimate.v_hat, options)?;
    let iid = interval_from_variance(ecdf, tau, alpha, tau * (1.0 - tau), options)?;
    Ok((estimate, het, iid))
}

fn interval_from_variance(
    ecdf: &Ecdf,
    tau: f64,
    alpha: f64,
    variance: f64,
    options: CiOptions,
) -> Result<QuantileCI> {
    let n = ecdf.n();
    let c = half_width(variance, n, alpha)?;
    let point = ecdf.quantile(tau)?;
    let (lower, lower_clipped) = if tau - c > 0.0 {
        (ecdf.quantile(tau - c)?, false)
    } else {
        (f64::NEG_INFINITY, true)
    };
    let (upper, upper_clipped) = if tau + c <= 1.0 {
        (ecdf.quantile(tau + c)?, false)
    } else {
        (f64::INFINITY, true)
    };
    let lindeberg_scale = n as f64 * variance;
    Ok(QuantileCI {
        tau,
        alpha,
        n,
        variance,
        point,
        half_width_level: c,
        lower,
        upper,
        lower_clipped,
        upper_clipped,
        lindeberg_scale,
        low_information_warning: lindeberg_scale < options.low_information_threshold,
    })
}
