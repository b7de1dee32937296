//! Binomial coefficients and binomial probabilities.

use std::sync::OnceLock;

const LN_FACTORIAL_TABLE: usize = 1024;

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(LN_FACTORIAL_TABLE);
        let mut acc = 0.0f64;
        table.push(0.0);
        for i in 1..LN_FACTORIAL_TABLE {
            acc += (i as f64).ln();
            table.push(acc);
        }
        table
    })
}

/// `ln(n!)`, i.e. `ln Γ(n + 1)`.
pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) < LN_FACTORIAL_TABLE {
        return ln_factorial_table()[n as usize];
    }
    // Stirling series; at n >= 1024 the truncation error is far below f64 resolution.
    let x = n as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0)))
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `C(n, k)` as a float, zero when `k > n`.
///
/// Uses the multiplicative form, which is exact while the intermediate
/// products stay below 2^53 and otherwise carries only rounding error.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0f64;
    for i in 1..=k {
        c = c * (n - k + i) as f64 / i as f64;
    }
    c
}

/// Probability of exactly `k` successes in `n` Bernoulli trials with success
/// probability `p`. `0^0` is taken as 1 so the degenerate endpoints are exact.
pub fn binomial_pmf(n: u32, k: u32, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    binomial(n as u64, k as u64) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_binomials_are_exact() {
        assert_eq!(binomial(7, 3), 35.0);
        assert_eq!(binomial(7, 0), 1.0);
        assert_eq!(binomial(7, 7), 1.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(binomial(52, 5), 2_598_960.0);
    }

    #[test]
    fn ln_binomial_agrees_with_direct() {
        for n in 0..60u64 {
            for k in 0..=n {
                let direct = binomial(n, k).ln();
                assert!((ln_binomial(n, k) - direct).abs() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn stirling_branch_is_continuous() {
        let n = LN_FACTORIAL_TABLE as u64;
        let from_table = ln_factorial(n - 1) + (n as f64).ln();
        assert!((ln_factorial(n) - from_table).abs() / from_table < 1e-14);
    }

    #[test]
    fn pmf_endpoints() {
        assert_eq!(binomial_pmf(5, 5, 1.0), 1.0);
        assert_eq!(binomial_pmf(5, 0, 0.0), 1.0);
        assert_eq!(binomial_pmf(5, 3, 0.0), 0.0);
        let total: f64 = (0..=9).map(|k| binomial_pmf(9, k, 0.37)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }
}
