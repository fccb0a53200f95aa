//! Simulation-only quantities: the estimator evaluated at the true quantile,
//! and the variance of the within-group pair count `M(m − M)` for
//! `M ~ Binomial(m, p)`.

use crate::error::{Error, Result};
use crate::estimate::grouped_variance;
use crate::sample::GroupedSample;

/// `Ṽ = n⁻¹ Σ_j A*_j (m_j − A*_j)/(m_j − 1)` with `A*_j` counted at the true
/// quantile `q_bar` instead of `Q̂(τ)`. Unbiased for `V_n(τ)`.
pub fn oracle_variance_estimator(sample: &GroupedSample, q_bar: f64) -> Result<f64> {
    if q_bar.is_nan() {
        return Err(Error::Domain("true quantile is NaN".into()));
    }
    Ok(grouped_variance(
        sample.group_sizes(),
        &sample.counts_at_or_below(q_bar),
    ))
}

fn check_binomial(m: usize, p: f64) -> Result<()> {
    if m < 2 {
        return Err(Error::Domain(format!("group size must be at least 2, got {m}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// `var(M(m − M)) = m(m−1)p(1−p)·(m − 1 − 2(2m − 3)p(1−p))`.
pub fn binomial_product_variance_closed_form(m: usize, p: f64) -> Result<f64> {
    check_binomial(m, p)?;
    let m = m as f64;
    let pq = p * (1.0 - p);
    Ok(m * (m - 1.0) * pq * (m - 1.0 - 2.0 * (2.0 * m - 3.0) * pq))
}

/// Same variance by summing over the binomial pmf.
pub fn binomial_product_variance_bruteforce(m: usize, p: f64) -> Result<f64> {
    check_binomial(m, p)?;
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    let pmf = binomial_pmf(m, p);
    let f = |k: usize| (k * (m - k)) as f64;
    let mean: f64 = pmf.iter().enumerate().map(|(k, w)| w * f(k)).sum();
    Ok(pmf
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let d = f(k) - mean;
            w * d * d
        })
        .sum())
}

fn binomial_pmf(m: usize, p: f64) -> Vec<f64> {
    if m <= 60 {
        let mut coef = 1.0f64;
        (0..=m)
            .map(|k| {
                if k > 0 {
                    coef = coef * (m - k + 1) as f64 / k as f64;
                }
                coef * p.powi(k as i32) * (1.0 - p).powi((m - k) as i32)
            })
            .collect()
    } else {
        // log space keeps C(m, k) from overflowing
        let ln_m = libm::lgamma(m as f64 + 1.0);
        let (lp, lq) = (p.ln(), (-p).ln_1p());
        (0..=m)
            .map(|k| {
                let ln_c = ln_m - libm::lgamma(k as f64 + 1.0) - libm::lgamma((m - k) as f64 + 1.0);
                (ln_c + k as f64 * lp + (m - k) as f64 * lq).exp()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_on_four_points() {
        let s = GroupedSample::from_groups(&[vec![1.0, 4.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(oracle_variance_estimator(&s, 2.5).unwrap(), 0.5);
        assert_eq!(oracle_variance_estimator(&s, 10.0).unwrap(), 0.0);
        assert_eq!(oracle_variance_estimator(&s, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn twin_half() {
        // M ∈ {0,1,2} w.p. 1/4, 1/2, 1/4; M(2−M) ∈ {0,1,0}: variance 1/4
        assert_eq!(binomial_product_variance_bruteforce(2, 0.5).unwrap(), 0.25);
        assert_eq!(binomial_product_variance_closed_form(2, 0.5).unwrap(), 0.25);
    }

    #[test]
    fn twin_specialization() {
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            let pq = p * (1.0 - p);
            let v = binomial_product_variance_closed_form(2, p).unwrap();
            assert!((v - 2.0 * pq * (1.0 - 2.0 * pq)).abs() < 1e-15);
        }
    }

    #[test]
    fn five_point_three() {
        // enumeration by hand over k = 0..5
        let p: f64 = 0.3;
        let q = 1.0 - p;
        let w = [q.powi(5), 5.0 * p * q.powi(4), 10.0 * p * p * q.powi(3), 10.0 * p.powi(3) * q * q, 5.0 * p.powi(4) * q, p.powi(5)];
        let f = [0.0, 4.0, 6.0, 6.0, 4.0, 0.0];
        let mean: f64 = w.iter().zip(&f).map(|(a, b)| a * b).sum();
        let second: f64 = w.iter().zip(&f).map(|(a, b)| a * b * b).sum();
        let expected = second - mean * mean;
        let closed = binomial_product_variance_closed_form(5, p).unwrap();
        let brute = binomial_product_variance_bruteforce(5, p).unwrap();
        assert!((closed - expected).abs() < 1e-12);
        assert!((brute - expected).abs() < 1e-12);
    }

    #[test]
    fn degenerate_p() {
        for m in [2, 7, 30, 100] {
            assert_eq!(binomial_product_variance_closed_form(m, 0.0).unwrap(), 0.0);
            assert_eq!(binomial_product_variance_closed_form(m, 1.0).unwrap(), 0.0);
            assert_eq!(binomial_product_variance_bruteforce(m, 0.0).unwrap(), 0.0);
            assert_eq!(binomial_product_variance_bruteforce(m, 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn large_m_uses_log_space() {
        for &m in &[61usize, 200, 1000] {
            for &p in &[0.05, 0.5, 0.93] {
                let a = binomial_product_variance_closed_form(m, p).unwrap();
                let b = binomial_product_variance_bruteforce(m, p).unwrap();
                assert!(((a - b) / a).abs() < 1e-9, "m={m} p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(binomial_product_variance_closed_form(1, 0.5).is_err());
        assert!(binomial_product_variance_bruteforce(3, 1.5).is_err());
        assert!(binomial_product_variance_closed_form(3, f64::NAN).is_err());
    }
}
