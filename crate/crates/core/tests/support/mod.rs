//! Reference routines that share no code with the library implementations
//! they check.
#![allow(dead_code)]

use hetci::GroupedSample;

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// erf by its all-positive power series `2/√π e^{-x²} Σ (2x²)^k x / (2k+1)!!`.
fn erf_series(x: f64) -> f64 {
    let two_x2 = 2.0 * x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 0.0;
    while term > 1e-18 * sum {
        k += 1.0;
        term *= two_x2 / (2.0 * k + 1.0);
        sum += term;
    }
    FRAC_2_SQRT_PI * (-x * x).exp() * sum
}

/// erfc by the Laplace continued fraction, evaluated bottom-up.
fn erfc_continued_fraction(x: f64) -> f64 {
    let mut tail = x;
    for k in (1..=600).rev() {
        tail = x + (k as f64 / 2.0) / tail;
    }
    (-x * x).exp() / (std::f64::consts::PI.sqrt() * tail)
}

fn erfc_ref(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 3.0 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// `P(Z <= z)` for `z <= 0` and `P(Z > z)` for `z > 0`; the smaller tail, accurate in relative terms.
pub fn normal_tail(z: f64) -> f64 {
    0.5 * erfc_ref(z.abs() / std::f64::consts::SQRT_2)
}

pub fn phi(z: f64) -> f64 {
    if z <= 0.0 {
        normal_tail(z)
    } else {
        1.0 - normal_tail(z)
    }
}

/// Φ⁻¹ by bisection on the reference tail probability.
pub fn phi_inverse(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    // solve tail(z) = min(p, 1-p) on the matching half line
    let (target, sign) = if p < 0.5 { (p, -1.0) } else { (1.0 - p, 1.0) };
    if target == 0.5 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 40.0f64); // |z|; tail decreasing in |z|
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_tail(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    sign * 0.5 * (lo + hi)
}

/// V̂ by visiting every ordered within-group pair.
pub fn v_hat_by_pairs(sample: &GroupedSample, cut: f64) -> f64 {
    let values = sample.values();
    let groups = sample.group_of();
    let sizes = sample.group_sizes();
    let mut total = 0.0;
    for a in 0..values.len() {
        for b in 0..values.len() {
            if groups[a] == groups[b] && values[a] <= cut && values[b] > cut {
                total += 1.0 / (sizes[groups[a]] - 1) as f64;
            }
        }
    }
    total / values.len() as f64
}

/// Sample order statistic by sorting and scanning ranks.
pub fn brute_quantile(values: &[f64], tau: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let k = (1..=n).find(|&k| k as f64 / n as f64 >= tau).unwrap();
    sorted[k - 1]
}

/// Smallest grid point with `f(x) >= target`, scanning `[lo, hi]` in `steps`.
pub fn grid_scan<F: Fn(f64) -> f64>(f: F, target: f64, lo: f64, hi: f64, steps: usize) -> (f64, f64) {
    let h = (hi - lo) / steps as f64;
    let mut prev = lo;
    for i in 0..=steps {
        let x = lo + h * i as f64;
        if f(x) >= target {
            return (prev, x);
        }
        prev = x;
    }
    panic!("target {target} not reached on grid");
}

/// Minimal deterministic generator for test inputs (SplitMix64).
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, k: usize) -> usize {
        (self.next_u64() % k as u64) as usize
    }
}

#[test]
fn reference_phi_known_values() {
    assert!((phi(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
    assert!((phi_inverse(0.975) - 1.959_963_984_540_054).abs() < 1e-12);
    // Φ(-7) = 1.279812543885835e-12
    assert!((normal_tail(7.0) / 1.279_812_543_885_835e-12 - 1.0).abs() < 1e-12);
}
