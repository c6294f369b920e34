//! Exact-formula primitives of the complex hyperbolic ball `B^n`.
//!
//! Points are `n` complex coordinates with `|z| < 1`; automorphisms are
//! `SU(n,1)` matrices acting by fractional-linear maps. The indefinite
//! pairing `<z,w> = z_1 conj(w_1) + ... + z_n conj(w_n) - 1` is strictly
//! negative on the diagonal, and every complex power below is taken on the
//! principal branch of `-<z,w>`, whose real part is positive on the ball.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{pairwise_sum, GaussLegendre};
use crate::special::ln_factorial;
use crate::submanifold::{Chart, ParamSubmanifold};

const GROUP_TOL: f64 = 1e-10;
const SINGULAR_TOL: f64 = 1e-14;
const ARCCOSH_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    coords: Vec<Complex64>,
}

impl BallPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("ball dimension must be >= 1".into()));
        }
        let norm_sq = norm_sq(&coords);
        if !(norm_sq < 1.0) {
            return Err(Error::OutsideBall { norm_sq });
        }
        Ok(Self { coords })
    }

    /// Point with real coordinates `x_j`.
    pub fn from_real(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Inverse of `to_real`: `(x_1, y_1, ..., x_n, y_n)`.
    pub fn from_interleaved(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() || xs.len() % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "need an even, nonzero number of reals, got {}",
                xs.len()
            )));
        }
        Self::new(xs.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
    }

    pub fn origin(n: usize) -> Self {
        Self {
            coords: vec![Complex64::new(0.0, 0.0); n.max(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.coords)
    }

    /// Real coordinates `(x_1, y_1, ..., x_n, y_n)`.
    pub fn to_real(&self) -> Vec<f64> {
        self.coords.iter().flat_map(|c| [c.re, c.im]).collect()
    }
}

fn norm_sq(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

/// Ball dimension and weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelContext {
    pub n: usize,
    pub k: u32,
}

impl KernelContext {
    pub fn new(n: usize, k: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("ball dimension n must be >= 1".into()));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("weight k must be >= 1".into()));
        }
        Ok(Self { n, k })
    }

    /// Series use needs `k >= 2` for absolute convergence.
    pub fn for_series(n: usize, k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::Precondition(format!(
                "Poincare series need weight k >= 2, got {k}"
            )));
        }
        Self::new(n, k)
    }

    /// `(n+1) k`, the exponent of the kernel ratio in the pairing integrals.
    pub fn lambda(&self) -> f64 {
        (self.n as f64 + 1.0) * self.k as f64
    }

    /// `ln(n! / pi^n)`.
    pub fn ln_kernel_prefactor(&self) -> f64 {
        ln_factorial(self.n as u64) - self.n as f64 * PI.ln()
    }
}

pub(crate) fn pairing_raw(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(-1.0, 0.0);
    for (a, b) in z.iter().zip(w) {
        acc += a * b.conj();
    }
    acc
}

/// `<z,w> = sum z_j conj(w_j) - 1`.
pub fn pairing(z: &BallPoint, w: &BallPoint) -> Result<Complex64> {
    check_dims(z.dim(), w.dim())?;
    Ok(pairing_raw(&z.coords, &w.coords))
}

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Principal log of the Bergman kernel `ln K(z,w)`.
pub fn ln_bergman_kernel(z: &BallPoint, w: &BallPoint, ctx: &KernelContext) -> Result<Complex64> {
    check_dims(ctx.n, z.dim())?;
    check_dims(ctx.n, w.dim())?;
    let minus = -pairing_raw(&z.coords, &w.coords);
    Ok(Complex64::new(ctx.ln_kernel_prefactor(), 0.0) - minus.ln() * (ctx.n as f64 + 1.0))
}

/// `K(z,w) = (n!/pi^n) (-<z,w>)^{-(n+1)}`.
pub fn bergman_kernel(z: &BallPoint, w: &BallPoint, ctx: &KernelContext) -> Result<Complex64> {
    Ok(ln_bergman_kernel(z, w, ctx)?.exp())
}

/// `K(z,w)^k`, assembled in log domain.
pub fn bergman_kernel_power(z: &BallPoint, w: &BallPoint, ctx: &KernelContext) -> Result<Complex64> {
    Ok((ln_bergman_kernel(z, w, ctx)? * ctx.k as f64).exp())
}

/// An element of `SU(n,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallAutomorphism {
    matrix: DMatrix<Complex64>,
}

impl BallAutomorphism {
    /// Validates `A^T sigma conj(A) = sigma` and `det A = 1` to 1e-10.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() < 2 {
            return Err(Error::NotInGroup(format!(
                "expected an (n+1)x(n+1) matrix with n >= 1, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let a = Self { matrix };
        let res = a.group_residual();
        if res > GROUP_TOL {
            return Err(Error::NotInGroup(format!("form residual {res:e}")));
        }
        let det = a.matrix.determinant();
        if (det - Complex64::new(1.0, 0.0)).norm() > GROUP_TOL {
            return Err(Error::NotInGroup(format!("determinant {det}")));
        }
        Ok(a)
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<Complex64>) -> Self {
        Self { matrix }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n + 1, n + 1),
        }
    }

    /// Ball dimension `n`.
    pub fn dim(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Largest entry of `A^T sigma conj(A) - sigma`.
    pub fn group_residual(&self) -> f64 {
        let sigma = signature(self.dim());
        let lhs = self.matrix.transpose() * &sigma * self.matrix.map(|c| c.conj());
        (lhs - sigma).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `self * other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// `sigma A^H sigma`.
    pub fn inverse(&self) -> Self {
        let sigma = signature(self.dim());
        Self {
            matrix: &sigma * self.matrix.adjoint() * &sigma,
        }
    }

    fn denominator(&self, z: &[Complex64]) -> Complex64 {
        let n = self.dim();
        let mut den = self.matrix[(n, n)];
        for (l, zl) in z.iter().enumerate() {
            den += self.matrix[(n, l)] * zl;
        }
        den
    }

    pub(crate) fn apply_raw(&self, z: &[Complex64], out: &mut [Complex64]) -> Result<Complex64> {
        let n = self.dim();
        let den = self.denominator(z);
        if den.norm() < SINGULAR_TOL {
            return Err(Error::SingularMap(den.norm()));
        }
        for (j, o) in out.iter_mut().enumerate().take(n) {
            let mut num = self.matrix[(j, n)];
            for (l, zl) in z.iter().enumerate() {
                num += self.matrix[(j, l)] * zl;
            }
            *o = num / den;
        }
        Ok(den)
    }

    /// Principal log of the Jacobian, `-(n+1) Log(denominator)`.
    pub(crate) fn ln_jacobian_raw(&self, z: &[Complex64]) -> Result<Complex64> {
        let den = self.denominator(z);
        if den.norm() < SINGULAR_TOL {
            return Err(Error::SingularMap(den.norm()));
        }
        Ok(-den.ln() * (self.dim() as f64 + 1.0))
    }
}

fn signature(n: usize) -> DMatrix<Complex64> {
    let mut s = DMatrix::identity(n + 1, n + 1);
    s[(n, n)] = Complex64::new(-1.0, 0.0);
    s
}

/// Fractional-linear action of `gamma` on `z`.
pub fn apply_automorphism(gamma: &BallAutomorphism, z: &BallPoint) -> Result<BallPoint> {
    check_dims(gamma.dim(), z.dim())?;
    let mut out = vec![Complex64::new(0.0, 0.0); z.dim()];
    gamma.apply_raw(&z.coords, &mut out)?;
    // an SU(n,1) matrix cannot push an interior point out; rounding can touch 1
    BallPoint::new(out)
}

/// Complex Jacobian `1 / (a_{n+1,1} z_1 + ... + a_{n+1,n+1})^{n+1}`.
pub fn jacobian(gamma: &BallAutomorphism, z: &BallPoint) -> Result<Complex64> {
    check_dims(gamma.dim(), z.dim())?;
    let den = gamma.denominator(&z.coords);
    if den.norm() < SINGULAR_TOL {
        return Err(Error::SingularMap(den.norm()));
    }
    Ok(den.powi(-(gamma.dim() as i32 + 1)))
}

/// `|J(g,z) conj(J(g,w)) K(gz,gw) - K(z,w)|`.
pub fn kernel_transform_residual(
    gamma: &BallAutomorphism,
    z: &BallPoint,
    w: &BallPoint,
    ctx: &KernelContext,
) -> Result<f64> {
    let gz = apply_automorphism(gamma, z)?;
    let gw = apply_automorphism(gamma, w)?;
    let lhs = jacobian(gamma, z)? * jacobian(gamma, w)?.conj() * bergman_kernel(&gz, &gw, ctx)?;
    let rhs = bergman_kernel(z, w, ctx)?;
    Ok((lhs - rhs).norm())
}

/// Complex hyperbolic distance with `cosh^2(tau/2) = <z,w><w,z> / (<z,z><w,w>)`.
///
/// Evaluated through `sinh^2(tau/2)`, whose numerator
/// `|z-w|^2 - (|z|^2 |w|^2 - |z.conj(w)|^2)` avoids the cancellation near `z = w`.
pub fn hyperbolic_distance(z: &BallPoint, w: &BallPoint) -> Result<f64> {
    check_dims(z.dim(), w.dim())?;
    Ok(distance_raw(&z.coords, &w.coords)?)
}

pub(crate) fn distance_raw(z: &[Complex64], w: &[Complex64]) -> Result<f64> {
    let zz = 1.0 - norm_sq(z);
    let ww = 1.0 - norm_sq(w);
    let diff: f64 = z.iter().zip(w).map(|(a, b)| (a - b).norm_sqr()).sum();
    let mut lagrange = 0.0;
    for j in 0..z.len() {
        for l in (j + 1)..z.len() {
            lagrange += (z[j] * w[l] - z[l] * w[j]).norm_sqr();
        }
    }
    let excess = (diff - lagrange) / (zz * ww);
    if excess < 0.0 {
        if excess < -ARCCOSH_CLAMP {
            return Err(Error::NumericalDomain(1.0 + excess));
        }
        return Ok(0.0);
    }
    Ok(2.0 * excess.sqrt().asinh())
}

/// `T_a = (1-|a|^2)^{-1/2} [[1, a], [conj(a), 1]]`, maps 0 to `a` in `B^1`.
pub fn build_translation(a: Complex64) -> Result<BallAutomorphism> {
    build_translation_n(&BallPoint::new(vec![a])?)
}

/// Hermitian boost of `B^n` taking 0 to `a`.
pub fn build_translation_n(a: &BallPoint) -> Result<BallAutomorphism> {
    let n = a.dim();
    let r2 = a.norm_sq();
    let g = 1.0 / (1.0 - r2).sqrt();
    let mut m = DMatrix::identity(n + 1, n + 1);
    for j in 0..n {
        for l in 0..n {
            if r2 > 0.0 {
                m[(j, l)] += a.coords[j] * a.coords[l].conj() * ((g - 1.0) / r2);
            }
        }
        m[(j, n)] = a.coords[j] * g;
        m[(n, j)] = a.coords[j].conj() * g;
    }
    m[(n, n)] = Complex64::new(g, 0.0);
    Ok(BallAutomorphism::from_matrix_unchecked(m))
}

/// `diag(e^{i theta/2}, e^{-i theta/2})`, acting as `z -> e^{i theta} z`.
pub fn build_rotation(theta: f64) -> BallAutomorphism {
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 0)] = Complex64::from_polar(1.0, 0.5 * theta);
    m[(1, 1)] = Complex64::from_polar(1.0, -0.5 * theta);
    BallAutomorphism::from_matrix_unchecked(m)
}

/// `diag(U, 1/det U)` for a unitary `n x n` matrix `U`.
pub fn build_unitary_rotation(u: &DMatrix<Complex64>) -> Result<BallAutomorphism> {
    let n = u.nrows();
    if u.ncols() != n || n == 0 {
        return Err(Error::InvalidArgument("rotation block must be square".into()));
    }
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(u);
    m[(n, n)] = Complex64::new(1.0, 0.0) / u.determinant();
    BallAutomorphism::new(m)
}

/// Elliptic element `T_a R_theta T_a^{-1}` rotating by `theta` about `fix` in `B^1`.
pub fn build_elliptic(fix: Complex64, theta: f64) -> Result<BallAutomorphism> {
    let t = build_translation(fix)?;
    Ok(t.compose(&build_rotation(theta)).compose(&t.inverse()))
}

/// Value of the invariant Kahler metric tensor at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix {
    pub h: DMatrix<Complex64>,
}

impl MetricMatrix {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn hermitian_residual(&self) -> f64 {
        (&self.h - self.h.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.h + self.h.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Riemannian inner product `Re sum h_{jl} U_j conj(V_l)` of real tangent
    /// vectors given as `(x_1, y_1, ..., x_n, y_n)` components.
    pub fn real_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.dim();
        let cu: Vec<Complex64> = (0..n).map(|j| Complex64::new(u[2 * j], u[2 * j + 1])).collect();
        let cv: Vec<Complex64> = (0..n).map(|j| Complex64::new(v[2 * j], v[2 * j + 1])).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for l in 0..n {
                acc += self.h[(j, l)] * cu[j] * cv[l].conj();
            }
        }
        acc.re
    }
}

/// `h_{jl} = (conj(z_j) z_l - <z,z> delta_{jl}) / <z,z>^2`.
pub fn metric_tensor(z: &BallPoint) -> MetricMatrix {
    let n = z.dim();
    let zz = pairing_raw(&z.coords, &z.coords).re;
    let mut h = DMatrix::zeros(n, n);
    for j in 0..n {
        for l in 0..n {
            let mut v = z.coords[j].conj() * z.coords[l];
            if j == l {
                v -= zz;
            }
            h[(j, l)] = v / (zz * zz);
        }
    }
    MetricMatrix { h }
}

/// Outcome of the CR-structure verification on the hemiball submanifold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrReport {
    pub holomorphic_dist_ok: bool,
    pub totally_real_dist_ok: bool,
    /// Normal component of `J` applied to the holomorphic distribution.
    pub holomorphic_residual: f64,
    /// Largest normalized metric pairing of `J v` with the tangent frame.
    pub orthogonality_residual: f64,
}

const CR_TOL: f64 = 1e-9;

/// Checks that `span{d/dx1, d/dy1}` is `J`-invariant on the hemiball and
/// that `J` maps the complementary generator
/// `d/dx2 - x1 x2/(1-x2^2) d/dx1 - x2 y1/(1-x2^2) d/dy1` into the normal bundle.
pub fn cr_structure_check(x: &ParamSubmanifold, sample: &BallPoint) -> Result<CrReport> {
    let alpha = match x.chart() {
        Chart::CrHemiball { alpha } => *alpha,
        _ => {
            return Err(Error::Precondition(
                "CR check applies to the hemiball submanifold only".into(),
            ))
        }
    };
    let n = x.ambient_dim();
    check_dims(n, sample.dim())?;
    let c = sample.coords();
    let (x1, y1, x2) = (c[0].re, c[0].im, c[1].re);
    let off_plane = c[1].im.abs() + c.iter().skip(2).map(|v| v.norm()).sum::<f64>();
    if off_plane > 1e-12 || x2 <= 0.0 || x1 * x1 + y1 * y1 + x2 * x2 >= alpha * alpha {
        return Err(Error::Precondition("sample point is not on the submanifold".into()));
    }

    let dim = 2 * n;
    let basis = |i: usize| {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        e
    };
    // real coordinates ordered (x1, y1, x2, y2, ...)
    let tangent = [basis(0), basis(1), basis(2)];
    let complex_structure = |v: &[f64]| {
        let mut out = vec![0.0; dim];
        for j in 0..n {
            out[2 * j] = v[2 * j + 1];
            out[2 * j + 1] = -v[2 * j];
        }
        out
    };
    let normal_part = |v: &[f64]| -> f64 {
        v.iter()
            .enumerate()
            .filter(|(i, _)| *i > 2)
            .map(|(_, a)| a * a)
            .sum::<f64>()
            .sqrt()
    };
    let holomorphic_residual = normal_part(&complex_structure(&tangent[0]))
        .max(normal_part(&complex_structure(&tangent[1])));

    let s = 1.0 - x2 * x2;
    let mut v = basis(2);
    v[0] = -x1 * x2 / s;
    v[1] = -x2 * y1 / s;
    let jv = complex_structure(&v);
    let metric = metric_tensor(sample);
    let norm = |u: &[f64]| metric.real_inner(u, u).sqrt();
    let orthogonality_residual = tangent
        .iter()
        .map(|t| metric.real_inner(&jv, t).abs() / (norm(&jv) * norm(t)))
        .fold(0.0, f64::max);

    Ok(CrReport {
        holomorphic_dist_ok: holomorphic_residual <= CR_TOL,
        totally_real_dist_ok: orthogonality_residual <= CR_TOL,
        holomorphic_residual,
        orthogonality_residual,
    })
}

/// `int_{B^1} f(w) K(z,w) dV_e(w)` by a polar tensor Gauss-Legendre rule,
/// the unweighted reproducing integral on the disc.
pub fn disc_reproducing_integral(
    z: Complex64,
    f: impl Fn(Complex64) -> Complex64,
    nodes_per_axis: usize,
) -> Complex64 {
    let gl = GaussLegendre::new(nodes_per_axis);
    let mut terms = Vec::with_capacity(nodes_per_axis * nodes_per_axis);
    for (&xr, &wr) in gl.nodes.iter().zip(&gl.weights) {
        let r = 0.5 * (xr + 1.0);
        for (&xa, &wa) in gl.nodes.iter().zip(&gl.weights) {
            let phi = PI * (xa + 1.0);
            let w = Complex64::from_polar(r, phi);
            let kernel = 1.0 / (PI * (1.0 - z * w.conj()).powi(2));
            terms.push(f(w) * kernel * (wr * 0.5 * wa * PI * r));
        }
    }
    pairwise_sum(&terms)
}

/// Holomorphic differential of the action at `z`, by central differences.
pub fn action_differential_fd(gamma: &BallAutomorphism, z: &BallPoint, step: f64) -> Result<DMatrix<Complex64>> {
    let n = z.dim();
    let mut d = DMatrix::zeros(n, n);
    for l in 0..n {
        let mut plus = z.coords.clone();
        let mut minus = z.coords.clone();
        plus[l] += step;
        minus[l] -= step;
        let fp = apply_automorphism(gamma, &BallPoint::new(plus)?)?;
        let fm = apply_automorphism(gamma, &BallPoint::new(minus)?)?;
        let col = DVector::from_iterator(
            n,
            fp.coords.iter().zip(&fm.coords).map(|(a, b)| (a - b) / (2.0 * step)),
        );
        d.set_column(l, &col);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pairing_examples() {
        let o = BallPoint::origin(1);
        assert_eq!(pairing(&o, &o).unwrap(), c(-1.0, 0.0));
        let z = BallPoint::from_real(&[0.5, 0.0]).unwrap();
        assert_eq!(pairing(&z, &z).unwrap(), c(-0.75, 0.0));
        // (0.3+0.4i) * conj(0.1i) - 1 = (0.3+0.4i)(-0.1i) - 1 = 0.04 - 0.03i - 1
        let z = BallPoint::new(vec![c(0.3, 0.4)]).unwrap();
        let w = BallPoint::new(vec![c(0.0, 0.1)]).unwrap();
        let p = pairing(&z, &w).unwrap();
        assert!((p - c(-0.96, -0.03)).norm() < 1e-15);
        assert!((p - pairing(&w, &z).unwrap().conj()).norm() < 1e-15);
    }

    #[test]
    fn pairing_dimension_mismatch() {
        let a = BallPoint::origin(1);
        let b = BallPoint::origin(2);
        assert!(matches!(pairing(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn point_outside_ball_rejected() {
        assert!(matches!(
            BallPoint::from_real(&[0.8, 0.6]),
            Err(Error::OutsideBall { .. })
        ));
    }

    #[test]
    fn kernel_at_origin() {
        let ctx = KernelContext::new(1, 1).unwrap();
        let o = BallPoint::origin(1);
        let k = bergman_kernel(&o, &o, &ctx).unwrap();
        assert!((k.re - 1.0 / PI).abs() < 1e-15 && k.im == 0.0);
        let ctx2 = KernelContext::new(2, 1).unwrap();
        let o2 = BallPoint::origin(2);
        let k2 = bergman_kernel(&o2, &o2, &ctx2).unwrap();
        assert!((k2.re - 0.202_642_367_284_675_5).abs() < 1e-15);
        let z = BallPoint::new(vec![c(0.3, 0.4)]).unwrap();
        let kz = bergman_kernel(&z, &z, &ctx).unwrap();
        assert!((kz.re - 1.0 / (PI * 0.75f64.powi(2))).abs() < 1e-14);
    }

    #[test]
    fn distance_examples() {
        let o = BallPoint::origin(2);
        let w = BallPoint::from_real(&[0.5, 0.0]).unwrap();
        assert!((hyperbolic_distance(&o, &w).unwrap() - 3f64.ln()).abs() < 1e-14);
        assert_eq!(hyperbolic_distance(&w, &w).unwrap(), 0.0);
    }

    #[test]
    fn rotation_and_translation_actions() {
        let z = BallPoint::new(vec![c(0.2, -0.3)]).unwrap();
        let theta = 0.7;
        let r = apply_automorphism(&build_rotation(theta), &z).unwrap();
        assert!((r.coords()[0] - Complex64::from_polar(1.0, theta) * z.coords()[0]).norm() < 1e-15);
        let half = apply_automorphism(&build_rotation(PI), &z).unwrap();
        assert!((half.coords()[0] + z.coords()[0]).norm() < 1e-15);
        let t = build_translation(c(0.5, 0.0)).unwrap();
        let moved = apply_automorphism(&t, &BallPoint::origin(1)).unwrap();
        assert!((moved.coords()[0] - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(build_translation(c(0.0, 0.0)).unwrap(), BallAutomorphism::identity(1));
        assert!(build_translation(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn rotation_jacobian_is_phase() {
        let theta = 1.1;
        let g = build_rotation(theta);
        for z in [c(0.0, 0.0), c(0.4, 0.1), c(-0.2, 0.6)] {
            let j = jacobian(&g, &BallPoint::new(vec![z]).unwrap()).unwrap();
            assert!((j - Complex64::from_polar(1.0, theta)).norm() < 1e-14);
        }
        assert_eq!(jacobian(&BallAutomorphism::identity(2), &BallPoint::origin(2)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn elliptic_fixes_its_point() {
        let a = c(0.3, -0.2);
        let g = build_elliptic(a, 2.0 * PI / 3.0).unwrap();
        let fixed = apply_automorphism(&g, &BallPoint::new(vec![a]).unwrap()).unwrap();
        assert!((fixed.coords()[0] - a).norm() < 1e-12);
        assert!(BallAutomorphism::new(g.matrix().clone()).is_ok());
    }

    #[test]
    fn group_validation_rejects_non_members() {
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = c(0.5, 0.0);
        assert!(matches!(BallAutomorphism::new(m), Err(Error::NotInGroup(_))));
        let m: DMatrix<Complex64> = DMatrix::identity(2, 2) * c(0.0, 1.0);
        // i*I has det -1
        assert!(BallAutomorphism::new(m).is_err());
    }

    #[test]
    fn inverse_composes_to_identity() {
        let a = BallPoint::new(vec![c(0.1, 0.2), c(-0.3, 0.1)]).unwrap();
        let t = build_translation_n(&a).unwrap();
        assert!(BallAutomorphism::new(t.matrix().clone()).is_ok());
        let id = t.compose(&t.inverse());
        let diff = (id.matrix() - DMatrix::<Complex64>::identity(3, 3)).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-14);
    }

    #[test]
    fn metric_at_origin_is_identity() {
        let h = metric_tensor(&BallPoint::origin(3));
        assert_eq!(h.h, DMatrix::identity(3, 3));
        assert!((h.min_eigenvalue() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cr_check_rejects_wrong_chart() {
        let seg = ParamSubmanifold::segment(2, 0.5, 0.0).unwrap();
        let p = BallPoint::from_real(&[0.1, 0.2]).unwrap();
        assert!(cr_structure_check(&seg, &p).is_err());
    }

    #[test]
    fn cr_check_rejects_off_manifold_sample() {
        let x = ParamSubmanifold::cr_hemiball(2, 0.5).unwrap();
        let below = BallPoint::new(vec![c(0.1, 0.1), c(-0.2, 0.0)]).unwrap();
        assert!(cr_structure_check(&x, &below).is_err());
        let tilted = BallPoint::new(vec![c(0.1, 0.1), c(0.2, 0.05)]).unwrap();
        assert!(cr_structure_check(&x, &tilted).is_err());
    }

    #[test]
    fn disc_reproduction_of_constant() {
        let z = c(0.3, 0.2);
        let v = disc_reproducing_integral(z, |_| c(1.0, 0.0), 48);
        assert!((v - c(1.0, 0.0)).norm() < 1e-10);
    }
}
