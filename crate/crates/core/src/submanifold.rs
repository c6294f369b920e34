//! Parameterized submanifolds of `B^n`, the pairing integral `I_1`, and the
//! example geometries with their predicted growth laws.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::constants::c_ball;
use crate::error::{Error, Result};
use crate::geometry::{distance_raw, pairing_raw, BallPoint, KernelContext};
use crate::laplace::fit_slope;
use crate::quadrature::{integrate, integrate_split, QuadResult, QuadValue, QuadratureConfig};
use crate::special::ln_factorial;

/// Largest ambient dimension supported by the chart buffers.
pub const MAX_AMBIENT: usize = 8;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    /// `z_1 = t e^{i phi}`, `-alpha < t < alpha`.
    Segment { alpha: f64, phi: f64 },
    /// `(z_1, z_2) = alpha (cos t, sin t)`, `0 <= t < 2 pi`.
    Circle { alpha: f64 },
    /// Real disc in polar form `(z_1, z_2) = s (cos t, sin t)`, `0 < s < alpha`.
    Disc { alpha: f64 },
    /// `z_1 = rho sin(Phi) e^{i Theta}`, `z_2 = rho cos(Phi)`, parameters `(rho, Theta, Phi)`.
    CrHemiball { alpha: f64 },
    /// `z = base + t direction`.
    AffineSegment {
        base: Vec<Complex64>,
        direction: Vec<Complex64>,
    },
    /// `(z_1, z_2) = (x_1, x_2)` over a square.
    PlanarPatch,
}

/// A chart into `B^n` with volume density `density_scale * jacobian(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSubmanifold {
    n: usize,
    chart: Chart,
    param_box: Vec<(f64, f64)>,
    density_scale: f64,
}

fn check_radius(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::InvalidArgument(format!("{name} must be in (0,1), got {v}")));
    }
    Ok(())
}

fn check_ambient(n: usize, min: usize) -> Result<()> {
    if n < min || n > MAX_AMBIENT {
        return Err(Error::InvalidArgument(format!(
            "ambient dimension must be in {min}..={MAX_AMBIENT}, got {n}"
        )));
    }
    Ok(())
}

impl ParamSubmanifold {
    pub fn segment(n: usize, alpha: f64, phi: f64) -> Result<Self> {
        check_ambient(n, 1)?;
        check_radius("alpha", alpha)?;
        Ok(Self {
            n,
            chart: Chart::Segment { alpha, phi },
            param_box: vec![(-alpha, alpha)],
            density_scale: 1.0,
        })
    }

    pub fn circle(n: usize, alpha: f64) -> Result<Self> {
        check_ambient(n, 2)?;
        check_radius("alpha", alpha)?;
        Ok(Self {
            n,
            chart: Chart::Circle { alpha },
            param_box: vec![(0.0, 2.0 * PI)],
            density_scale: 1.0,
        })
    }

    pub fn disc(n: usize, alpha: f64) -> Result<Self> {
        check_ambient(n, 2)?;
        check_radius("alpha", alpha)?;
        Ok(Self {
            n,
            chart: Chart::Disc { alpha },
            param_box: vec![(0.0, alpha), (0.0, 2.0 * PI)],
            density_scale: 1.0,
        })
    }

    pub fn cr_hemiball(n: usize, alpha: f64) -> Result<Self> {
        check_ambient(n, 2)?;
        check_radius("alpha", alpha)?;
        Ok(Self {
            n,
            chart: Chart::CrHemiball { alpha },
            param_box: vec![(0.0, alpha), (0.0, 2.0 * PI), (0.0, 0.5 * PI)],
            density_scale: 1.0,
        })
    }

    pub fn affine_segment(base: Vec<Complex64>, direction: Vec<Complex64>, range: (f64, f64)) -> Result<Self> {
        let n = base.len();
        check_ambient(n, 1)?;
        if direction.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: direction.len(),
            });
        }
        if !(range.0 < range.1) {
            return Err(Error::InvalidArgument("empty parameter range".into()));
        }
        let s = Self {
            n,
            chart: Chart::AffineSegment { base, direction },
            param_box: vec![range],
            density_scale: 1.0,
        };
        s.check_corners()?;
        Ok(s)
    }

    pub fn planar_patch(n: usize, half_width: f64) -> Result<Self> {
        check_ambient(n, 2)?;
        let s = Self {
            n,
            chart: Chart::PlanarPatch,
            param_box: vec![(-half_width, half_width); 2],
            density_scale: 1.0,
        };
        if !(half_width > 0.0) {
            return Err(Error::InvalidArgument("half_width must be positive".into()));
        }
        s.check_corners()?;
        Ok(s)
    }

    /// Replaces the parameter box; it must stay inside the chart's natural box.
    pub fn with_box(mut self, param_box: Vec<(f64, f64)>) -> Result<Self> {
        if param_box.len() != self.q() {
            return Err(Error::DimensionMismatch {
                expected: self.q(),
                got: param_box.len(),
            });
        }
        if param_box.iter().any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidArgument("empty parameter interval".into()));
        }
        let natural = matches!(self.chart, Chart::AffineSegment { .. } | Chart::PlanarPatch);
        if !natural
            && param_box
                .iter()
                .zip(&self.param_box)
                .any(|(&(a, b), &(a0, b0))| a < a0 - 1e-15 || b > b0 + 1e-15)
        {
            return Err(Error::InvalidArgument("box exceeds the chart's parameter range".into()));
        }
        self.param_box = param_box;
        self.check_corners()?;
        Ok(self)
    }

    pub fn with_density_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("density scale must be positive, got {scale}")));
        }
        self.density_scale = scale;
        Ok(self)
    }

    fn check_corners(&self) -> Result<()> {
        // every chart attains its largest norm at a box corner
        let q = self.q();
        for mask in 0..(1usize << q) {
            let t: Vec<f64> = (0..q)
                .map(|i| if mask >> i & 1 == 1 { self.param_box[i].1 } else { self.param_box[i].0 })
                .collect();
            let mut buf = [ZERO; MAX_AMBIENT];
            self.eval_into(&t, &mut buf);
            let norm_sq: f64 = buf[..self.n].iter().map(|c| c.norm_sqr()).sum();
            if !(norm_sq < 1.0) {
                return Err(Error::OutsideBall { norm_sq });
            }
        }
        Ok(())
    }

    /// Intrinsic dimension.
    pub fn q(&self) -> usize {
        self.param_box.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn param_box(&self) -> &[(f64, f64)] {
        &self.param_box
    }

    /// True when every chart point has real coordinates, so pairings are real.
    pub fn real_phase(&self) -> bool {
        match &self.chart {
            Chart::Segment { phi, .. } => phi.sin() == 0.0,
            Chart::Circle { .. } | Chart::Disc { .. } | Chart::PlanarPatch => true,
            Chart::CrHemiball { .. } => false,
            Chart::AffineSegment { base, direction } => {
                base.iter().chain(direction).all(|c| c.im == 0.0)
            }
        }
    }

    /// Writes the first `n` coordinates of the chart point into `out`.
    pub fn eval_into(&self, t: &[f64], out: &mut [Complex64]) {
        for o in out.iter_mut().take(self.n) {
            *o = ZERO;
        }
        match &self.chart {
            Chart::Segment { phi, .. } => out[0] = Complex64::from_polar(t[0], *phi),
            Chart::Circle { alpha } => {
                out[0] = Complex64::new(alpha * t[0].cos(), 0.0);
                out[1] = Complex64::new(alpha * t[0].sin(), 0.0);
            }
            Chart::Disc { .. } => {
                out[0] = Complex64::new(t[0] * t[1].cos(), 0.0);
                out[1] = Complex64::new(t[0] * t[1].sin(), 0.0);
            }
            Chart::CrHemiball { .. } => {
                let (rho, theta, phi) = (t[0], t[1], t[2]);
                out[0] = Complex64::from_polar(rho * phi.sin(), theta);
                out[1] = Complex64::new(rho * phi.cos(), 0.0);
            }
            Chart::AffineSegment { base, direction } => {
                for j in 0..self.n {
                    out[j] = base[j] + direction[j] * t[0];
                }
            }
            Chart::PlanarPatch => {
                out[0] = Complex64::new(t[0], 0.0);
                out[1] = Complex64::new(t[1], 0.0);
            }
        }
    }

    pub fn point(&self, t: &[f64]) -> Result<BallPoint> {
        if t.len() != self.q() {
            return Err(Error::DimensionMismatch {
                expected: self.q(),
                got: t.len(),
            });
        }
        let mut buf = [ZERO; MAX_AMBIENT];
        self.eval_into(t, &mut buf);
        BallPoint::new(buf[..self.n].to_vec())
    }

    /// Volume density with respect to `dt_1 ... dt_q`.
    pub fn density(&self, t: &[f64]) -> f64 {
        let j = match &self.chart {
            Chart::Disc { .. } => t[0],
            Chart::CrHemiball { .. } => t[0] * t[0] * t[2].sin(),
            _ => 1.0,
        };
        self.density_scale * j
    }

    /// Parameter of the chart point nearest to `z` in the Euclidean sense, clamped to the box.
    pub fn peak_hint(&self, z: &[Complex64]) -> Vec<f64> {
        let raw = match &self.chart {
            Chart::Segment { phi, .. } => vec![(z[0] * Complex64::from_polar(1.0, -phi)).re],
            Chart::Circle { .. } => vec![wrap_angle(z[1].re.atan2(z[0].re))],
            Chart::Disc { .. } => vec![z[0].re.hypot(z[1].re), wrap_angle(z[1].re.atan2(z[0].re))],
            Chart::CrHemiball { .. } => {
                let m = z[0].norm();
                vec![m.hypot(z[1].re), wrap_angle(z[0].arg()), m.atan2(z[1].re)]
            }
            Chart::AffineSegment { base, direction } => {
                let mut num = 0.0;
                let mut den = 0.0;
                for j in 0..self.n {
                    num += ((z[j] - base[j]) * direction[j].conj()).re;
                    den += direction[j].norm_sqr();
                }
                vec![if den > 0.0 { num / den } else { 0.0 }]
            }
            Chart::PlanarPatch => vec![z[0].re, z[1].re],
        };
        raw.iter()
            .zip(&self.param_box)
            .map(|(&t, &(a, b))| t.clamp(a, b))
            .collect()
    }

    /// Complex derivative matrix `B_{a j} = d z_j / d t_a` by central differences.
    pub fn derivative(&self, t0: &[f64]) -> DMatrix<Complex64> {
        let q = self.q();
        let mut b = DMatrix::zeros(q, self.n);
        let mut t = t0.to_vec();
        for a in 0..q {
            let h = 1e-6 * t0[a].abs().max(1.0);
            let mut plus = [ZERO; MAX_AMBIENT];
            let mut minus = [ZERO; MAX_AMBIENT];
            t[a] = t0[a] + h;
            self.eval_into(&t, &mut plus);
            t[a] = t0[a] - h;
            self.eval_into(&t, &mut minus);
            t[a] = t0[a];
            for j in 0..self.n {
                b[(a, j)] = (plus[j] - minus[j]) / (2.0 * h);
            }
        }
        b
    }
}

fn wrap_angle(a: f64) -> f64 {
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Smallest eigenvalue of `B conj(B)^T + conj(B) B^T` at `t0`.
pub fn tangent_hessian_check(x: &ParamSubmanifold, t0: &[f64]) -> Result<f64> {
    if t0.len() != x.q() {
        return Err(Error::DimensionMismatch {
            expected: x.q(),
            got: t0.len(),
        });
    }
    let b = x.derivative(t0);
    let h = (&b * b.adjoint()).map(|c| 2.0 * c.re);
    Ok(h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairingResult {
    pub value: f64,
    /// Imaginary part; nonzero only when `complex_integrand` is set.
    pub value_im: f64,
    pub k: u32,
    pub n: usize,
    pub quad_nodes: usize,
    pub est_rel_err: f64,
    pub evaluations: usize,
    pub complex_integrand: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawKind {
    /// `I_1 ~ C k^exponent`.
    Asymptotic,
    /// `|I_1| <= const k^exponent`.
    UpperBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticLaw {
    /// `None` when only the exponent is predicted.
    pub constant: Option<f64>,
    pub exponent: f64,
    pub kind: LawKind,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleSetup {
    pub x: ParamSubmanifold,
    pub y: ParamSubmanifold,
    pub law: AsymptoticLaw,
}

fn check_example_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidArgument(format!("example needs n >= {min}, got {n}")));
    }
    Ok(())
}

/// `((n+1)^{n-1/2} / n!) * factor`.
fn law_prefactor(n: usize, power_shift: f64) -> f64 {
    let nf = n as f64;
    ((nf + power_shift) * (nf + 1.0).ln() - ln_factorial(n as u64)).exp()
}

pub fn example_segment(n: usize, alpha: f64) -> Result<ExampleSetup> {
    check_example_n(n, 1)?;
    let x = ParamSubmanifold::segment(n, alpha, 0.0)?;
    let cn = law_prefactor(n, -0.5) * 2.0 * (2.0 * PI).sqrt();
    Ok(ExampleSetup {
        y: x.clone(),
        x,
        law: AsymptoticLaw {
            constant: Some(cn * (alpha - alpha.powi(3) / 3.0)),
            exponent: n as f64 - 0.5,
            kind: LawKind::Asymptotic,
            description: "segment: c(n)(a - a^3/3) k^(n-1/2)".into(),
        },
    })
}

pub fn example_circle(n: usize, alpha: f64) -> Result<ExampleSetup> {
    check_example_n(n, 2)?;
    let x = ParamSubmanifold::circle(n, alpha)?;
    let cn = law_prefactor(n, -0.5) * 2.0 * PI * (2.0 * PI).sqrt();
    Ok(ExampleSetup {
        y: x.clone(),
        x,
        law: AsymptoticLaw {
            constant: Some(cn * (1.0 - alpha * alpha).sqrt() / alpha),
            exponent: n as f64 - 0.5,
            kind: LawKind::Asymptotic,
            description: "circle: c(n) sqrt(1-a^2)/a k^(n-1/2)".into(),
        },
    })
}

pub fn example_disc(n: usize, alpha: f64) -> Result<ExampleSetup> {
    check_example_n(n, 2)?;
    let x = ParamSubmanifold::disc(n, alpha)?;
    let c = 0.8 * PI * PI * law_prefactor(n, -1.0) * (1.0 - (1.0 - alpha * alpha).powf(2.5));
    Ok(ExampleSetup {
        y: x.clone(),
        x,
        law: AsymptoticLaw {
            constant: Some(c),
            exponent: n as f64 - 1.0,
            kind: LawKind::Asymptotic,
            description: "disc: (4 pi^2/5)((n+1)^(n-1)/n!)(1-(1-a^2)^(5/2)) k^(n-1)".into(),
        },
    })
}

/// `Y` the real segment `|x_1| < beta`, `X` the real disc of radius `alpha`.
pub fn example_segment_disc(n: usize, alpha: f64, beta: f64) -> Result<ExampleSetup> {
    check_example_n(n, 2)?;
    if !(beta > 0.0 && beta < alpha) {
        return Err(Error::InvalidArgument(format!("need 0 < beta < alpha, got beta={beta}, alpha={alpha}")));
    }
    Ok(ExampleSetup {
        x: ParamSubmanifold::disc(n, alpha)?,
        y: ParamSubmanifold::segment(n, beta, 0.0)?,
        law: AsymptoticLaw {
            constant: None,
            exponent: n as f64 - 1.0,
            kind: LawKind::Asymptotic,
            description: "segment-disc: const(n,b) k^(n-1)".into(),
        },
    })
}

pub fn example_cr_ball(n: usize, alpha: f64) -> Result<ExampleSetup> {
    check_example_n(n, 2)?;
    let x = ParamSubmanifold::cr_hemiball(n, alpha)?;
    Ok(ExampleSetup {
        y: x.clone(),
        x,
        law: AsymptoticLaw {
            constant: None,
            exponent: n as f64 - 2.0,
            kind: LawKind::UpperBound,
            description: "CR hemiball: |I_1| <= const k^(n-2)".into(),
        },
    })
}

pub fn example_by_name(name: &str, n: usize, alpha: f64, beta: Option<f64>) -> Result<ExampleSetup> {
    match name {
        "segment" => example_segment(n, alpha),
        "circle" => example_circle(n, alpha),
        "disc" => example_disc(n, alpha),
        "segment_disc" => example_segment_disc(
            n,
            alpha,
            beta.ok_or_else(|| Error::InvalidArgument("segment_disc needs beta".into()))?,
        ),
        "cr_ball" => example_cr_ball(n, alpha),
        other => Err(Error::InvalidArgument(format!("unknown example '{other}'"))),
    }
}

/// Runs `inner` at every node of an adaptive outer integral, collecting the
/// first inner failure and the largest inner relative error.
fn outer_inner<V, F>(outer_box: &[(f64, f64)], quad: &QuadratureConfig, inner: F) -> Result<(QuadResult<V>, f64)>
where
    V: QuadValue,
    F: Fn(&[f64]) -> Result<QuadResult<V>> + Sync,
{
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let worst_inner = AtomicU64::new(0f64.to_bits());
    let inner_evals = AtomicU64::new(0);
    let f = |t: &[f64]| -> V {
        match inner(t) {
            Ok(r) => {
                worst_inner.fetch_max(r.rel_err().to_bits(), Ordering::Relaxed);
                inner_evals.fetch_add(r.evaluations as u64, Ordering::Relaxed);
                r.value
            }
            Err(e) => {
                let mut slot = failure.lock().expect("failure slot");
                if slot.is_none() {
                    *slot = Some(e);
                }
                V::zero()
            }
        }
    };
    let outer = integrate(&f, outer_box, quad);
    if let Some(e) = failure.into_inner().expect("failure slot") {
        return Err(e);
    }
    let mut outer = outer?;
    outer.evaluations = inner_evals.load(Ordering::Relaxed) as usize;
    Ok((outer, f64::from_bits(worst_inner.load(Ordering::Relaxed))))
}

fn inner_config(quad: &QuadratureConfig) -> QuadratureConfig {
    quad.inner(0.25 * quad.rel_tol)
}

fn check_pair(x: &ParamSubmanifold, y: &ParamSubmanifold, ctx: &KernelContext) -> Result<()> {
    if x.ambient_dim() != ctx.n {
        return Err(Error::DimensionMismatch {
            expected: ctx.n,
            got: x.ambient_dim(),
        });
    }
    if y.ambient_dim() != ctx.n {
        return Err(Error::DimensionMismatch {
            expected: ctx.n,
            got: y.ambient_dim(),
        });
    }
    Ok(())
}

/// `ln` of `(<z,z><zeta,zeta>)^{lambda/2} / (-<z,zeta>)^lambda` for real pairings.
#[inline]
fn ln_ratio_real(z: &[Complex64], zeta: &[Complex64], lambda: f64) -> f64 {
    let a = -pairing_raw(z, z).re;
    let b = -pairing_raw(zeta, zeta).re;
    let c = -pairing_raw(z, zeta).re;
    0.5 * lambda * (a.ln() + b.ln()) - lambda * c.ln()
}

#[inline]
fn ln_ratio_complex(z: &[Complex64], zeta: &[Complex64], lambda: f64) -> Complex64 {
    let a = -pairing_raw(z, z).re;
    let b = -pairing_raw(zeta, zeta).re;
    let c = -pairing_raw(z, zeta);
    Complex64::new(0.5 * lambda * (a.ln() + b.ln()), 0.0) - c.ln() * lambda
}

/// `c(B^n,k) int_Y int_X (<z,z><zeta,zeta>)^{(n+1)k/2} / (-<z,zeta>)^{(n+1)k} nu_X(zeta) nu_Y(z)`.
///
/// The outer integral runs over `Y`; the inner one over `X` is cut at the
/// parameter nearest to `z`, where the integrand peaks.
pub fn i1_pairing(
    x: &ParamSubmanifold,
    y: &ParamSubmanifold,
    ctx: &KernelContext,
    quad: &QuadratureConfig,
) -> Result<PairingResult> {
    check_pair(x, y, ctx)?;
    quad.validate()?;
    let lambda = ctx.lambda();
    let c = c_ball(ctx.n, ctx.k)?.value();
    let inner_cfg = inner_config(quad);
    let n = ctx.n;
    let real = x.real_phase() && y.real_phase();

    let (value, value_im, outer, inner_rel) = if real {
        let (outer, inner_rel) = outer_inner(y.param_box(), quad, |ty: &[f64]| {
            let mut z = [ZERO; MAX_AMBIENT];
            y.eval_into(ty, &mut z);
            let wy = y.density(ty);
            let f = |tx: &[f64]| -> f64 {
                let mut zeta = [ZERO; MAX_AMBIENT];
                x.eval_into(tx, &mut zeta);
                ln_ratio_real(&z[..n], &zeta[..n], lambda).exp() * x.density(tx) * wy
            };
            integrate_split(&f, x.param_box(), &x.peak_hint(&z[..n]), &inner_cfg)
        })?;
        (c * outer.value, 0.0, outer, inner_rel)
    } else {
        let (outer, inner_rel) = outer_inner(y.param_box(), quad, |ty: &[f64]| {
            let mut z = [ZERO; MAX_AMBIENT];
            y.eval_into(ty, &mut z);
            let wy = y.density(ty);
            let f = |tx: &[f64]| -> Complex64 {
                let mut zeta = [ZERO; MAX_AMBIENT];
                x.eval_into(tx, &mut zeta);
                ln_ratio_complex(&z[..n], &zeta[..n], lambda).exp() * (x.density(tx) * wy)
            };
            integrate_split(&f, x.param_box(), &x.peak_hint(&z[..n]), &inner_cfg)
        })?;
        (c * outer.value.re, c * outer.value.im, QuadResult {
            value: outer.value.norm(),
            abs_err: outer.abs_err,
            evaluations: outer.evaluations,
            cells: outer.cells,
        }, inner_rel)
    };
    let est_rel_err = outer.rel_err() + inner_rel;
    if !(est_rel_err <= quad.rel_tol) {
        return Err(Error::Convergence {
            value,
            rel_err: est_rel_err,
            cells: outer.cells,
        });
    }
    Ok(PairingResult {
        value,
        value_im,
        k: ctx.k,
        n,
        quad_nodes: quad.nodes_per_axis,
        est_rel_err,
        evaluations: outer.evaluations,
        complex_integrand: !real,
    })
}

/// Integrand of the reduced hemiball pairing after the two angular integrations:
/// `(1-rho^2)^{L/2} (1-r^2)^{L/2} (1 - u_2 rho cos Phi)^{-L} rho^2 sin Phi r^2 sin psi`
/// with `u_2 = r cos psi` and `L = (n+1)k`.
pub fn cr_ball_reduced_integrand(rho: f64, phi: f64, r: f64, psi: f64, ctx: &KernelContext) -> f64 {
    let lambda = ctx.lambda();
    let u2 = r * psi.cos();
    if rho == 0.0 || r == 0.0 {
        return 0.0;
    }
    let ln = 0.5 * lambda * ((1.0 - rho * rho).ln() + (1.0 - r * r).ln()) - lambda * (1.0 - u2 * rho * phi.cos()).ln();
    ln.exp() * rho * rho * phi.sin() * r * r * psi.sin()
}

/// `I_1` for the hemiball `x_1^2 + y_1^2 + x_2^2 < alpha^2, x_2 > 0` as
/// `c(B^n,k) 4 pi^2` times a 4-dimensional integral.
pub fn i1_cr_ball(alpha: f64, ctx: &KernelContext, quad: &QuadratureConfig) -> Result<PairingResult> {
    check_example_n(ctx.n, 2)?;
    check_radius("alpha", alpha)?;
    quad.validate()?;
    let c = c_ball(ctx.n, ctx.k)?.value();
    let inner_cfg = inner_config(quad);
    let outer_box = [(0.0, alpha), (0.0, 0.5 * PI)];
    let inner_box = [(0.0, alpha), (0.0, 0.5 * PI)];
    let (outer, inner_rel) = outer_inner(&outer_box, quad, |o: &[f64]| {
        let (r, psi) = (o[0], o[1]);
        let f = |i: &[f64]| cr_ball_reduced_integrand(i[0], i[1], r, psi, ctx);
        // the radial phase is minimal at rho = u_2, Phi = 0
        integrate_split(&f, &inner_box, &[r * psi.cos(), 0.0], &inner_cfg)
    })?;
    let value = c * 4.0 * PI * PI * outer.value;
    let est_rel_err = outer.rel_err() + inner_rel;
    if !(est_rel_err <= quad.rel_tol) {
        return Err(Error::Convergence {
            value,
            rel_err: est_rel_err,
            cells: outer.cells,
        });
    }
    Ok(PairingResult {
        value,
        value_im: 0.0,
        k: ctx.k,
        n: ctx.n,
        quad_nodes: quad.nodes_per_axis,
        est_rel_err,
        evaluations: outer.evaluations,
        complex_integrand: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawRow {
    pub k: u32,
    pub i1: f64,
    /// `I_1 / (C k^exponent)`; `None` when the law has no constant.
    pub ratio: Option<f64>,
    pub est_rel_err: f64,
}

/// Evaluates `I_1` at each `k` and compares with the law.
pub fn ratio_to_law(
    x: &ParamSubmanifold,
    y: &ParamSubmanifold,
    law: &AsymptoticLaw,
    ks: &[u32],
    quad: &QuadratureConfig,
) -> Result<Vec<LawRow>> {
    let n = x.ambient_dim();
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let ctx = KernelContext::new(n, k)?;
        let r = match x.chart() {
            Chart::CrHemiball { alpha } if x == y => i1_cr_ball(*alpha, &ctx, quad)?,
            _ => i1_pairing(x, y, &ctx, quad)?,
        };
        rows.push(LawRow {
            k,
            i1: r.value,
            ratio: law.constant.map(|c| r.value / (c * (k as f64).powf(law.exponent))),
            est_rel_err: r.est_rel_err,
        });
    }
    Ok(rows)
}

/// Least-squares fit of `ln I = exponent ln k + ln C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub exponent: f64,
    /// `I(k_last) / k_last^exponent`, the tail estimate of `C`.
    pub constant: f64,
}

pub fn fit_power_law(ks: &[u32], values: &[f64]) -> Result<PowerFit> {
    if ks.len() < 2 || ks.len() != values.len() || values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("power fit needs >= 2 positive values".into()));
    }
    let xs: Vec<f64> = ks.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let exponent = fit_slope(&xs, &ys);
    let last = ks.len() - 1;
    Ok(PowerFit {
        exponent,
        constant: values[last] / (ks[last] as f64).powf(exponent),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// `(k, I)` with `I = c(B^n,k) int int cosh(tau/2)^{-(n+1)k} nu nu`.
    pub values: Vec<(u32, f64)>,
    /// Slope of `ln I` against `k`.
    pub slope: f64,
    /// Minimum distance between the two submanifolds over the sampling grid.
    pub d_eff: f64,
    /// `-(n+1) ln cosh(d_eff/2) + 0.05`.
    pub bound: f64,
    pub passes: bool,
}

const DISTANCE_GRID: usize = 65;

/// Minimum hyperbolic distance between chart points on a uniform grid.
pub fn min_distance(x: &ParamSubmanifold, y: &ParamSubmanifold) -> Result<f64> {
    let grid = |s: &ParamSubmanifold| -> Vec<Vec<Complex64>> {
        let q = s.q();
        let total = DISTANCE_GRID.pow(q as u32);
        (0..total)
            .map(|mut flat| {
                let t: Vec<f64> = s
                    .param_box()
                    .iter()
                    .map(|&(a, b)| {
                        let j = flat % DISTANCE_GRID;
                        flat /= DISTANCE_GRID;
                        a + (b - a) * j as f64 / (DISTANCE_GRID - 1) as f64
                    })
                    .collect();
                let mut buf = [ZERO; MAX_AMBIENT];
                s.eval_into(&t, &mut buf);
                buf[..s.ambient_dim()].to_vec()
            })
            .collect()
    };
    let gx = grid(x);
    let gy = grid(y);
    let mut best = f64::INFINITY;
    for a in &gx {
        for b in &gy {
            best = best.min(distance_raw(a, b)?);
        }
    }
    Ok(best)
}

/// Exponential decay rate of the modulus pairing between separated submanifolds.
pub fn separated_decay(
    x: &ParamSubmanifold,
    y: &ParamSubmanifold,
    n: usize,
    ks: &[u32],
    quad: &QuadratureConfig,
) -> Result<DecayFit> {
    if ks.len() < 2 {
        return Err(Error::InvalidArgument("need at least two weights".into()));
    }
    let ctx0 = KernelContext::new(n, ks[0])?;
    check_pair(x, y, &ctx0)?;
    let d_eff = min_distance(x, y)?;
    if !(d_eff > 1e-9) {
        return Err(Error::Precondition(format!(
            "submanifolds are not separated (minimum distance {d_eff:e})"
        )));
    }
    let inner_cfg = inner_config(quad);
    let mut values = Vec::with_capacity(ks.len());
    for &k in ks {
        let ctx = KernelContext::new(n, k)?;
        let lambda = ctx.lambda();
        let c = c_ball(n, k)?.value();
        let (outer, inner_rel) = outer_inner(y.param_box(), quad, |ty: &[f64]| {
            let mut z = [ZERO; MAX_AMBIENT];
            y.eval_into(ty, &mut z);
            let wy = y.density(ty);
            let f = |tx: &[f64]| -> f64 {
                let mut zeta = [ZERO; MAX_AMBIENT];
                x.eval_into(tx, &mut zeta);
                ln_ratio_complex(&z[..n], &zeta[..n], lambda).re.exp() * x.density(tx) * wy
            };
            integrate_split(&f, x.param_box(), &x.peak_hint(&z[..n]), &inner_cfg)
        })?;
        let rel = outer.rel_err() + inner_rel;
        if !(rel <= quad.rel_tol) {
            return Err(Error::Convergence {
                value: c * outer.value,
                rel_err: rel,
                cells: outer.cells,
            });
        }
        values.push((k, c * outer.value));
    }
    let xs: Vec<f64> = values.iter().map(|v| v.0 as f64).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.1.ln()).collect();
    let slope = fit_slope(&xs, &ys);
    let bound = -(n as f64 + 1.0) * (0.5 * d_eff).cosh().ln() + 0.05;
    Ok(DecayFit {
        values,
        slope,
        d_eff,
        bound,
        passes: slope <= bound,
    })
}

/// Two vertical segments `x = -offset` and `x = offset`, `|y| <= half_length`, in `B^1`.
pub fn parallel_segments(offset: f64, half_length: f64) -> Result<(ParamSubmanifold, ParamSubmanifold)> {
    let up = vec![Complex64::new(0.0, 1.0)];
    let range = (-half_length, half_length);
    Ok((
        ParamSubmanifold::affine_segment(vec![Complex64::new(-offset, 0.0)], up.clone(), range)?,
        ParamSubmanifold::affine_segment(vec![Complex64::new(offset, 0.0)], up, range)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_law_constant() {
        let ex = example_segment(1, 0.5).unwrap();
        let c = ex.law.constant.unwrap();
        assert!((c - 4.0 * PI.sqrt() * (0.5 - 0.125 / 3.0)).abs() < 1e-12);
        assert_eq!(ex.law.exponent, 0.5);
    }

    #[test]
    fn disc_law_constant() {
        let ex = example_disc(2, 0.6).unwrap();
        let expect = 0.8 * PI * PI * 1.5 * (1.0 - 0.64f64.powf(2.5));
        assert!((ex.law.constant.unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn circle_constant_vanishes_at_edge() {
        let c = example_circle(2, 1.0 - 1e-12).unwrap().law.constant.unwrap();
        assert!(c < 1e-4);
    }

    #[test]
    fn example_parameter_checks() {
        assert!(example_circle(1, 0.5).is_err());
        assert!(example_segment(1, 1.0).is_err());
        assert!(example_segment_disc(2, 0.3, 0.6).is_err());
        assert!(example_by_name("torus", 2, 0.5, None).is_err());
    }

    #[test]
    fn reduced_integrand_vanishes_at_origin() {
        let ctx = KernelContext::new(2, 4).unwrap();
        assert_eq!(cr_ball_reduced_integrand(0.0, 0.3, 0.0, 0.2, &ctx), 0.0);
    }

    #[test]
    fn chart_points_and_densities() {
        let d = ParamSubmanifold::disc(2, 0.6).unwrap();
        let p = d.point(&[0.5, 0.5 * PI]).unwrap();
        assert!((p.coords()[1].re - 0.5).abs() < 1e-15);
        assert_eq!(d.density(&[0.3, 1.0]), 0.3);
        let h = ParamSubmanifold::cr_hemiball(2, 0.5).unwrap();
        assert!((h.density(&[0.5, 0.0, 0.5 * PI]) - 0.25).abs() < 1e-15);
        assert!(!h.real_phase());
    }

    #[test]
    fn peak_hint_recovers_parameters() {
        let h = ParamSubmanifold::cr_hemiball(2, 0.5).unwrap();
        let t = [0.3, 1.2, 0.7];
        let p = h.point(&t).unwrap();
        let back = h.peak_hint(p.coords());
        for (a, b) in back.iter().zip(t) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn box_outside_ball_rejected() {
        assert!(ParamSubmanifold::planar_patch(2, 0.75).is_err());
        let up = vec![Complex64::new(0.0, 1.0)];
        assert!(ParamSubmanifold::affine_segment(vec![Complex64::new(0.9, 0.0)], up, (-0.5, 0.5)).is_err());
    }

    #[test]
    fn power_fit_recovers_exponent() {
        let ks = [10, 20, 40];
        let vals: Vec<f64> = ks.iter().map(|&k| 3.0 * (k as f64).powf(1.5)).collect();
        let fit = fit_power_law(&ks, &vals).unwrap();
        assert!((fit.exponent - 1.5).abs() < 1e-12);
        assert!((fit.constant - 3.0).abs() < 1e-10);
    }
}
