//! Weighted-Bergman normalization `c(B^n, k) = C((n+1)(k-1)+n, n)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureConfig, Scheme};
use crate::special::{binomial_exact, factorial, ln_binomial, ln_factorial};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightConstant {
    pub n: usize,
    pub k: u32,
    /// Natural log of `c(B^n, k)`.
    pub value_log: f64,
}

impl WeightConstant {
    pub fn value(&self) -> f64 {
        self.value_log.exp()
    }

    /// Exact integer value when it fits in `u128`.
    pub fn exact(&self) -> Option<u128> {
        let (top, n) = binomial_args(self.n, self.k);
        binomial_exact(top, n)
    }
}

fn binomial_args(n: usize, k: u32) -> (u64, u64) {
    let n = n as u64;
    ((n + 1) * (k as u64 - 1) + n, n)
}

pub fn c_ball(n: usize, k: u32) -> Result<WeightConstant> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidArgument(format!(
            "c(B^n,k) needs n >= 1 and k >= 1, got n={n}, k={k}"
        )));
    }
    let (top, bottom) = binomial_args(n, k);
    Ok(WeightConstant {
        n,
        k,
        value_log: ln_binomial(top, bottom),
    })
}

/// Leading Stirling form `((n+1)^n / n!) k^n`.
pub fn c_ball_stirling(n: usize, k: u32) -> Result<f64> {
    if n == 0 || k < 2 {
        return Err(Error::InvalidArgument(format!(
            "Stirling form needs n >= 1 and k >= 2, got n={n}, k={k}"
        )));
    }
    let nf = n as f64;
    Ok((nf * (nf + 1.0).ln() - ln_factorial(n as u64) + nf * (k as f64).ln()).exp())
}

/// `c(B^n,k) (n!/pi^n) (2 pi)^n prod_j int_0^1 (1-R^2)^{(n+1)(k-1)+j} R dR`,
/// the defining normalization integral evaluated at the origin. Equals 1.
pub fn c_ball_integral_check(n: usize, k: u32, quad: &QuadratureConfig) -> Result<f64> {
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "radial reduction implemented for n in {{1,2}}, got {n}"
        )));
    }
    if !(1..=8).contains(&k) {
        return Err(Error::InvalidArgument(format!("k must be in 1..=8, got {k}")));
    }
    let c = c_ball(n, k)?;
    let base = (n as i32 + 1) * (k as i32 - 1);
    let cfg = QuadratureConfig {
        scheme: Scheme::Fixed,
        parallel: false,
        ..quad.clone()
    };
    let mut product = 1.0;
    for j in 0..n as i32 {
        let exponent = base + j;
        let radial = integrate(&|t: &[f64]| (1.0 - t[0] * t[0]).powi(exponent) * t[0], &[(0.0, 1.0)], &cfg)?;
        product *= radial.value;
    }
    let prefactor = factorial(n as u64) / PI.powi(n as i32) * (2.0 * PI).powi(n as i32);
    Ok(c.value() * prefactor * product)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(c_ball(1, 2).unwrap().exact(), Some(3));
        assert_eq!(c_ball(2, 2).unwrap().exact(), Some(10));
        assert_eq!(c_ball(1, 1).unwrap().exact(), Some(1));
        assert!((c_ball(2, 2).unwrap().value() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn stirling_small_k() {
        assert!((c_ball_stirling(1, 2).unwrap() - 4.0).abs() < 1e-12);
        let ratio = c_ball(1, 100).unwrap().value() / c_ball_stirling(1, 100).unwrap();
        assert!((ratio - 0.995).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(c_ball(0, 2).is_err());
        assert!(c_ball(1, 0).is_err());
        assert!(c_ball_stirling(1, 1).is_err());
        let q = QuadratureConfig::fixed(64, 1e-13);
        assert!(c_ball_integral_check(3, 2, &q).is_err());
        assert!(c_ball_integral_check(1, 9, &q).is_err());
    }

    #[test]
    fn weight_one_integral_is_one() {
        let q = QuadratureConfig::fixed(64, 1e-13);
        assert!((c_ball_integral_check(1, 1, &q).unwrap() - 1.0).abs() < 1e-14);
    }
}
