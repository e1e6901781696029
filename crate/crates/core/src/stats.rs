//! Small statistical helpers shared across the crate: the standard normal
//! tail function and its inverse, binomial tail sums, and a running
//! mean/variance accumulator for Monte-Carlo aggregation.

use crate::{Error, Result};
use statrs::function::erf;

// ──────────────────────────── Normal tail ────────────────────────────

/// Standard normal upper-tail probability `Q(x) = P(Z > x)`.
pub fn q(x: f64) -> f64 {
    0.5 * erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of [`q`]: returns `x` such that `Q(x) = p`, for `p ∈ (0, 1)`.
pub fn q_inv(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p == 0.0 || p == 1.0 {
        return Err(Error::InvalidArgument(format!(
            "tail probability must lie strictly inside (0, 1), got {p}"
        )));
    }
    Ok(std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p))
}

// ──────────────────────────── Binomial tail ────────────────────────────

/// Upper-tail binomial probability `P(X ≥ k_min)` for `X ~ Bin(n, p)`.
///
/// Computed by direct summation; intended for the small `n` used by
/// frame-delimiter analysis, not for large-deviation work.
pub fn binomial_tail(n: u32, k_min: u32, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "success probability must lie in [0, 1], got {p}"
        )));
    }
    if k_min > n {
        return Ok(0.0);
    }
    let q = 1.0 - p;
    let mut total = 0.0;
    for k in k_min..=n {
        total += binomial_coeff(n, k) * p.powi(k as i32) * q.powi((n - k) as i32);
    }
    Ok(total.min(1.0))
}

/// Binomial coefficient `C(n, k)` as an exact f64 for small `n`.
fn binomial_coeff(n: u32, k: u32) -> f64 {
    let k = k.min(n - k.min(n));
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

// ──────────────────────────── Accumulator ────────────────────────────

/// Running mean / standard-error accumulator.
///
/// Aggregation is order-independent in exact arithmetic; the harness still
/// reduces trial results in a fixed order so output files are byte-identical
/// across runs.
#[derive(Debug, Clone, Default)]
pub struct Accumulator {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.sum / self.n as f64
        }
    }

    /// Sample variance (unbiased).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    /// Root mean square of the accumulated values.
    pub fn rms(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            (self.sum_sq / self.n as f64).sqrt()
        }
    }
}

/// Standard error of an empirical proportion `p̂` over `n` trials.
pub fn proportion_stderr(p_hat: f64, n: u64) -> f64 {
    if n == 0 {
        f64::NAN
    } else {
        (p_hat * (1.0 - p_hat) / n as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-9;

    /// Independent oracle for `q_inv`: bisection on `q` itself.
    fn q_inv_bisect(p: f64) -> f64 {
        let (mut lo, mut hi) = (-12.0, 12.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if q(mid) > p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn test_q_basic_values() {
        assert!((q(0.0) - 0.5).abs() < TOL, "Q(0) must be 1/2");
        assert!((q(1.0) - 0.158_655_253_931).abs() < 1e-9);
        assert!((q(-1.0) + q(1.0) - 1.0).abs() < TOL, "Q(-x) + Q(x) = 1");
    }

    #[test]
    fn test_q_inv_matches_bisection_oracle() {
        for &p in &[1e-6, 1e-4, 1e-3, 0.01, 0.1, 0.5, 0.9, 0.999] {
            let x = q_inv(p).unwrap();
            let oracle = q_inv_bisect(p);
            assert!(
                (x - oracle).abs() < 1e-8,
                "q_inv({p}) = {x}, bisection oracle = {oracle}"
            );
        }
    }

    #[test]
    fn test_q_inv_false_alarm_design_point() {
        // The detection threshold design point used throughout: Q⁻¹(1e-3).
        let x = q_inv(1e-3).unwrap();
        assert!((x - 3.090_232_306).abs() < 1e-6, "Q⁻¹(1e-3) = {x}");
    }

    #[test]
    fn test_q_inv_rejects_degenerate_inputs() {
        assert!(q_inv(0.0).is_err());
        assert!(q_inv(1.0).is_err());
        assert!(q_inv(-0.5).is_err());
    }

    /// Exhaustive-enumeration oracle: sum over all 2^n outcomes.
    fn binomial_tail_enumerate(n: u32, k_min: u32, p: f64) -> f64 {
        let mut total = 0.0;
        for mask in 0u32..(1 << n) {
            let successes = mask.count_ones();
            if successes >= k_min {
                total += p.powi(successes as i32) * (1.0 - p).powi((n - successes) as i32);
            }
        }
        total
    }

    #[test]
    fn test_binomial_tail_matches_enumeration() {
        for &(n, k, p) in &[(7u32, 6u32, 0.9), (7, 4, 0.5), (5, 0, 0.3), (6, 6, 0.99)] {
            let fast = binomial_tail(n, k, p).unwrap();
            let oracle = binomial_tail_enumerate(n, k, p);
            assert!(
                (fast - oracle).abs() < 1e-12,
                "tail({n},{k},{p}) = {fast} vs enumeration {oracle}"
            );
        }
    }

    #[test]
    fn test_binomial_tail_edge_cases() {
        assert_eq!(binomial_tail(7, 8, 0.5).unwrap(), 0.0, "k_min > n is impossible");
        assert!((binomial_tail(7, 0, 0.5).unwrap() - 1.0).abs() < TOL);
        assert!(binomial_tail(7, 6, 1.5).is_err());
    }

    #[test]
    fn test_accumulator_moments() {
        let mut acc = Accumulator::new();
        for x in [1.0, 2.0, 3.0, 4.0] {
            acc.push(x);
        }
        assert_eq!(acc.count(), 4);
        assert!((acc.mean() - 2.5).abs() < TOL);
        assert!((acc.variance() - 5.0 / 3.0).abs() < TOL);
        assert!((acc.rms() - (7.5f64).sqrt()).abs() < TOL);
    }

    #[test]
    fn test_accumulator_merge_equals_sequential() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let mut whole = Accumulator::new();
        xs.iter().for_each(|&x| whole.push(x));
        let mut left = Accumulator::new();
        let mut right = Accumulator::new();
        xs[..37].iter().for_each(|&x| left.push(x));
        xs[37..].iter().for_each(|&x| right.push(x));
        left.merge(&right);
        assert!((whole.mean() - left.mean()).abs() < TOL);
        assert!((whole.variance() - left.variance()).abs() < TOL);
    }
}
