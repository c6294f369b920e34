//! Leading-order Laplace asymptotics of `int e^{-lambda f} g` with a
//! nondegenerate minimum, and an empirical check of the `O(1/lambda)` error.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_split, QuadratureConfig};

pub type RealFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

const DEGENERATE_TOL: f64 = 1e-10;
const IDENTITY_TOL: f64 = 1e-9;

#[derive(Clone)]
pub struct LaplaceProblem {
    pub dim: usize,
    pub phase: RealFn,
    pub amplitude: RealFn,
    pub minimum: Vec<f64>,
    pub domain_box: Vec<(f64, f64)>,
}

impl fmt::Debug for LaplaceProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LaplaceProblem")
            .field("dim", &self.dim)
            .field("minimum", &self.minimum)
            .field("domain_box", &self.domain_box)
            .finish_non_exhaustive()
    }
}

impl LaplaceProblem {
    pub fn new(
        phase: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        amplitude: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        minimum: Vec<f64>,
        domain_box: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let dim = minimum.len();
        if dim == 0 || domain_box.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: domain_box.len(),
            });
        }
        for (t, &(a, b)) in minimum.iter().zip(&domain_box) {
            if !(a < b) || *t < a || *t > b {
                return Err(Error::InvalidArgument(format!(
                    "minimum coordinate {t} outside [{a}, {b}]"
                )));
            }
        }
        Ok(Self {
            dim,
            phase: Arc::new(phase),
            amplitude: Arc::new(amplitude),
            minimum,
            domain_box,
        })
    }

    /// True when the minimum lies on a face of the box.
    pub fn on_boundary(&self) -> bool {
        self.minimum
            .iter()
            .zip(&self.domain_box)
            .any(|(t, &(a, b))| (t - a).abs() <= 1e-12 * (1.0 + a.abs()) || (t - b).abs() <= 1e-12 * (1.0 + b.abs()))
    }

    pub fn hessian(&self) -> DMatrix<f64> {
        hessian_fd(&*self.phase, &self.minimum)
    }
}

/// Symmetrized central-difference Hessian, step `max(1e-4, 1e-4 |t_i|)`.
pub fn hessian_fd(phase: &dyn Fn(&[f64]) -> f64, t0: &[f64]) -> DMatrix<f64> {
    let q = t0.len();
    let h: Vec<f64> = t0.iter().map(|t| (1e-4 * t.abs()).max(1e-4)).collect();
    let f0 = phase(t0);
    let mut hess = DMatrix::zeros(q, q);
    let mut p = t0.to_vec();
    for i in 0..q {
        p[i] = t0[i] + h[i];
        let fp = phase(&p);
        p[i] = t0[i] - h[i];
        let fm = phase(&p);
        p[i] = t0[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in 0..i {
            let mut eval = |si: f64, sj: f64| {
                p[i] = t0[i] + si * h[i];
                p[j] = t0[j] + sj * h[j];
                let v = phase(&p);
                p[i] = t0[i];
                p[j] = t0[j];
                v
            };
            let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    (&hess + hess.transpose()) * 0.5
}

pub fn min_eigenvalue(h: &DMatrix<f64>) -> f64 {
    h.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// `e^{-lambda f(t0)} (2 pi / lambda)^{q/2} g(t0) det(H)^{-1/2}`, halved on the boundary.
pub fn laplace_leading(p: &LaplaceProblem, lambda: f64, boundary: bool) -> Result<f64> {
    Ok(leading_shifted(p, lambda, boundary)? * (-lambda * (p.phase)(&p.minimum)).exp())
}

/// Leading term without the `e^{-lambda f(t0)}` factor.
fn leading_shifted(p: &LaplaceProblem, lambda: f64, boundary: bool) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let hess = p.hessian();
    let min_eig = min_eigenvalue(&hess);
    if !(min_eig > DEGENERATE_TOL) {
        return Err(Error::DegeneratePhase(min_eig));
    }
    let q = p.dim as f64;
    let value = (2.0 * PI / lambda).powf(0.5 * q) * (p.amplitude)(&p.minimum) / hess.determinant().sqrt();
    Ok(if boundary { 0.5 * value } else { value })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceRow {
    pub lambda: f64,
    /// Quadrature of `int e^{-lambda (f - f(t0))} g`.
    pub quadrature: f64,
    pub leading: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorOrder {
    pub rows: Vec<LaplaceRow>,
    /// Log-log slope of `|Q/L - 1|`; `None` when the ratio is identically 1.
    pub slope: Option<f64>,
    /// Fitted `C` in `|Q/L - 1| ~ C / lambda`, from the last row.
    pub constant: f64,
}

/// Compares quadrature with the leading term along a geometric `lambda` list.
pub fn laplace_error_order(p: &LaplaceProblem, lambdas: &[f64], quad: &QuadratureConfig) -> Result<ErrorOrder> {
    if lambdas.len() < 4 {
        return Err(Error::InvalidArgument("need at least 4 lambda values".into()));
    }
    let q0 = lambdas[1] / lambdas[0];
    let geometric = q0 > 1.0
        && lambdas
            .windows(2)
            .all(|w| w[0] > 0.0 && ((w[1] / w[0]) / q0 - 1.0).abs() < 1e-9);
    if !geometric {
        return Err(Error::InvalidArgument("lambda list must be increasing geometric".into()));
    }
    let boundary = p.on_boundary();
    let f0 = (p.phase)(&p.minimum);
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let phase = p.phase.clone();
        let amp = p.amplitude.clone();
        let integrand = move |t: &[f64]| (-lambda * (phase(t) - f0)).exp() * amp(t);
        let qv = integrate_split(&integrand, &p.domain_box, &p.minimum, quad)?.value;
        let lv = leading_shifted(p, lambda, boundary)?;
        rows.push(LaplaceRow {
            lambda,
            quadrature: qv,
            leading: lv,
            ratio: qv / lv,
        });
    }
    let dev: Vec<f64> = rows.iter().map(|r| (r.ratio - 1.0).abs()).collect();
    let last = rows.last().expect("non-empty");
    let constant = dev[dev.len() - 1] * last.lambda;
    if dev.iter().all(|&d| d <= IDENTITY_TOL) {
        return Ok(ErrorOrder {
            rows,
            slope: None,
            constant,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.lambda.ln()).collect();
    let ys: Vec<f64> = dev.iter().map(|d| d.max(f64::MIN_POSITIVE).ln()).collect();
    Ok(ErrorOrder {
        slope: Some(fit_slope(&xs, &ys)),
        rows,
        constant,
    })
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Phases that come with the library, keyed by name.
pub fn shipped_problem(name: &str) -> Result<LaplaceProblem> {
    match name {
        "gaussian" => LaplaceProblem::new(|t| 0.5 * t[0] * t[0], |_| 1.0, vec![0.0], vec![(-1.0, 1.0)]),
        "quartic" => LaplaceProblem::new(
            |t| 0.5 * t[0] * t[0] + t[0].powi(4),
            |_| 1.0,
            vec![0.0],
            vec![(-1.0, 1.0)],
        ),
        "segment" => segment_phase(0.0, 0.5),
        "circle" => circle_phase(0.5),
        "disc" => disc_phase(0.2, 0.1, 0.6),
        "cr_ball" => cr_radial_phase(0.4, 0.5),
        other => Err(Error::InvalidArgument(format!("unknown Laplace case '{other}'"))),
    }
}

pub const SHIPPED_CASES: [&str; 6] = ["gaussian", "quartic", "segment", "circle", "disc", "cr_ball"];

/// Inner segment integral `f(t) = -1/2 ln((1-t^2)(1-T^2)/(1-tT)^2)` on `(-alpha, alpha)`.
pub fn segment_phase(big_t: f64, alpha: f64) -> Result<LaplaceProblem> {
    check_radius(alpha)?;
    LaplaceProblem::new(
        move |t| -0.5 * ((1.0 - t[0] * t[0]).ln() + (1.0 - big_t * big_t).ln() - 2.0 * (1.0 - t[0] * big_t).ln()),
        |_| 1.0,
        vec![big_t],
        vec![(-alpha, alpha)],
    )
}

/// Circle phase `-ln((1-alpha^2)/(1-alpha^2 cos s))` in the angle offset `s`.
pub fn circle_phase(alpha: f64) -> Result<LaplaceProblem> {
    check_radius(alpha)?;
    let a2 = alpha * alpha;
    LaplaceProblem::new(
        move |t| -((1.0 - a2) / (1.0 - a2 * t[0].cos())).ln(),
        |_| 1.0,
        vec![0.0],
        vec![(-PI, PI)],
    )
}

/// Half the disc phase, so that `lambda = (n+1)k`; minimum at `(u1, u2)`.
pub fn disc_phase(u1: f64, u2: f64, alpha: f64) -> Result<LaplaceProblem> {
    check_radius(alpha)?;
    if u1 * u1 + u2 * u2 >= alpha * alpha {
        return Err(Error::InvalidArgument("minimum must lie inside the disc".into()));
    }
    let su = 1.0 - u1 * u1 - u2 * u2;
    LaplaceProblem::new(
        move |x| -0.5 * ((1.0 - x[0] * x[0] - x[1] * x[1]) * su / (1.0 - x[0] * u1 - x[1] * u2).powi(2)).ln(),
        |_| 1.0,
        vec![u1, u2],
        vec![(-alpha, alpha), (-alpha, alpha)],
    )
}

/// Radial phase `-ln(sqrt(1-rho^2)/(1-a rho))` with amplitude `rho^2` on `(0, alpha)`.
pub fn cr_radial_phase(a: f64, alpha: f64) -> Result<LaplaceProblem> {
    check_radius(alpha)?;
    if !(a > 0.0 && a < alpha) {
        return Err(Error::InvalidArgument("need 0 < a < alpha".into()));
    }
    LaplaceProblem::new(
        move |r| -(0.5 * (1.0 - r[0] * r[0]).ln() - (1.0 - a * r[0]).ln()),
        |r| r[0] * r[0],
        vec![a],
        vec![(0.0, alpha)],
    )
}

fn check_radius(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be in (0,1), got {alpha}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_leading_term() {
        let p = shipped_problem("gaussian").unwrap();
        let l = laplace_leading(&p, 50.0, false).unwrap();
        assert!((l - (2.0 * PI / 50.0).sqrt()).abs() < 1e-7);
        let half = laplace_leading(&p, 50.0, true).unwrap();
        assert!((half - 0.5 * l).abs() < 1e-15);
    }

    #[test]
    fn degenerate_phase_rejected() {
        let p = LaplaceProblem::new(|t| t[0] * t[0], |_| 1.0, vec![0.0, 0.0], vec![(-1.0, 1.0); 2]).unwrap();
        assert!(matches!(laplace_leading(&p, 10.0, false), Err(Error::DegeneratePhase(_))));
    }

    #[test]
    fn minimum_outside_box_rejected() {
        assert!(LaplaceProblem::new(|t| t[0], |_| 1.0, vec![2.0], vec![(-1.0, 1.0)]).is_err());
    }

    #[test]
    fn boundary_detection() {
        assert!(shipped_problem("cr_ball").map(|p| !p.on_boundary()).unwrap());
        let p = LaplaceProblem::new(|t| t[0], |_| 1.0, vec![0.0], vec![(0.0, 1.0)]).unwrap();
        assert!(p.on_boundary());
    }

    #[test]
    fn slope_fit_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, -1.0, -3.0, -5.0];
        assert!((fit_slope(&xs, &ys) + 2.0).abs() < 1e-15);
    }

    #[test]
    fn non_geometric_lambdas_rejected() {
        let p = shipped_problem("quartic").unwrap();
        let q = QuadratureConfig::adaptive(1e-10);
        assert!(laplace_error_order(&p, &[1.0, 2.0, 3.0, 4.0], &q).is_err());
        assert!(laplace_error_order(&p, &[1.0, 2.0, 4.0], &q).is_err());
    }
}
