//! Small numerical utilities: the Gamma function and order-stable summation.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function via the Lanczos approximation (g = 7, nine terms), with the
/// reflection formula below one half.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

const PAIRWISE_BLOCK: usize = 32;

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// length, so results are reproducible bit for bit.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise-summed dot product.
pub fn pairwise_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= PAIRWISE_BLOCK {
        return a.iter().zip(b).map(|(x, y)| x * y).sum();
    }
    let mid = a.len() / 2;
    pairwise_dot(&a[..mid], &b[..mid]) + pairwise_dot(&a[mid..], &b[mid..])
}

/// `(exp(x) - 1) / x`, accurate near zero.
pub(crate) fn exprel(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 + x / 2.0 + x * x / 6.0
    } else {
        x.exp_m1() / x
    }
}

/// `∫_{t0}^{t1} t^{-p} dt` for `0 < t0 <= t1`, continuous through `p = 1`.
pub(crate) fn int_pow(t0: f64, t1: f64, p: f64) -> f64 {
    let log_ratio = (t1 / t0).ln();
    t0.powf(1.0 - p) * log_ratio * exprel((1.0 - p) * log_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_known_values() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(1.0) - 1.0).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((gamma(1.5) - 0.5 * PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn int_pow_matches_closed_forms() {
        // p = 1 is the logarithmic case
        assert!((int_pow(1.0, 2.0, 1.0) - 2f64.ln()).abs() < 1e-15);
        let p = 1.5;
        let exact = (2f64.powf(1.0 - p) - 1.0) / (1.0 - p);
        assert!((int_pow(1.0, 2.0, p) - exact).abs() < 1e-14);
        let p = 1.0 + 1e-9;
        assert!((int_pow(1.0, 3.0, p) - 3f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn pairwise_sum_is_exact_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
        assert_eq!(pairwise_dot(&xs, &vec![1.0; 1000]), 500_500.0);
    }
}
