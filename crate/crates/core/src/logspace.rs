//! Small log-domain helpers. All significances are carried as natural logs so
//! that products over dozens of spins never underflow.

/// `ln(e^a + e^b)`, exact for infinite arguments.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(sum(e^x))` over a slice. Empty input gives `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// `1 / (1 + e^x)` without overflow; returns exactly 0 or 1 for infinite `x`.
#[inline]
pub fn logistic_complement(x: f64) -> f64 {
    if x == f64::INFINITY {
        0.0
    } else if x == f64::NEG_INFINITY {
        1.0
    } else if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Natural log of the binomial coefficient C(n, k) for every k in 0..=n.
pub fn ln_binomial_row(n: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(n + 1);
    let mut acc = 0.0f64;
    row.push(acc);
    for k in 0..n {
        acc += ((n - k) as f64).ln() - ((k + 1) as f64).ln();
        row.push(acc);
    }
    // C(n, k) = C(n, n - k); mirror the first half to cancel drift.
    for k in 0..=n / 2 {
        row[n - k] = row[k];
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_add_exp_handles_infinities() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, -3.0), -3.0);
        assert!((log_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((log_add_exp(-1000.0, -1000.0) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn logistic_complement_extremes() {
        assert_eq!(logistic_complement(f64::INFINITY), 0.0);
        assert_eq!(logistic_complement(f64::NEG_INFINITY), 1.0);
        assert_eq!(logistic_complement(0.0), 0.5);
        assert!(logistic_complement(800.0) >= 0.0);
        assert_eq!(logistic_complement(-800.0), 1.0);
    }

    #[test]
    fn binomial_row_matches_pascal() {
        let row = ln_binomial_row(10);
        let expected = [1u64, 10, 45, 120, 210, 252, 210, 120, 45, 10, 1];
        for (k, &c) in expected.iter().enumerate() {
            assert!((row[k].exp() - c as f64).abs() < 1e-9 * c as f64);
        }
        assert_eq!(log_sum_exp(&row).exp().round(), 1024.0);
    }
}
