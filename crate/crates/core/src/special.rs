//! Log-gamma and binomial helpers.

use std::f64::consts::PI;

// Lanczos approximation, g = 7, n = 9.
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

/// Natural log of the gamma function for positive real `x`.
///
/// Uses the Lanczos series above 0.5 and the reflection formula below it.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return (PI / (PI * x).sin()).abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `ln n!`, exact summation for small `n`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 32 {
        (2..=n).map(|j| (j as f64).ln()).sum()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// `ln C(n, k)` for `0 <= k <= n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    assert!(k <= n, "ln_binomial requires k <= n");
    let k = k.min(n - k);
    if k == 0 {
        return 0.0;
    }
    if let Some(exact) = binomial_exact(n, k) {
        if exact < (1u128 << 100) {
            return (exact as f64).ln();
        }
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Exact binomial coefficient, `None` on `u128` overflow.
pub fn binomial_exact(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        // acc * (n - j) / (j + 1) stays integral at every step
        acc = acc.checked_mul((n - j) as u128)? / (j as u128 + 1);
    }
    Some(acc)
}

/// `n!` as f64 (exact up to 22!).
pub fn factorial(n: u64) -> f64 {
    (2..=n).fold(1.0, |acc, j| acc * j as f64)
}
