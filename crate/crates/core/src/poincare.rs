//! Word-enumerated truncations of discrete groups acting on the ball,
//! unitary representations, and truncated scalar and vector-valued
//! Poincare series with automorphy diagnostics.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::constants::c_ball;
use crate::error::{Error, Result};
use crate::geometry::{
    apply_automorphism, build_elliptic, build_rotation, jacobian, pairing_raw, BallAutomorphism, BallPoint,
    KernelContext,
};
use crate::quadrature::{pairwise_sum, tensor_rule};

const DEDUP_TOL: f64 = 1e-9;
const UNITARY_TOL: f64 = 1e-10;
const RELATION_TOL: f64 = 1e-6;
const BUCKET: f64 = 1e-6;
const UNDEFINED_NORM: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    pub generators: Vec<BallAutomorphism>,
    pub names: Vec<String>,
}

impl GroupSpec {
    pub fn new(generators: Vec<BallAutomorphism>, names: Vec<String>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidArgument("a group needs at least one generator".into()));
        }
        if names.len() != generators.len() {
            return Err(Error::InvalidArgument("one name per generator required".into()));
        }
        let n = generators[0].dim();
        for g in &generators {
            if g.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: g.dim(),
                });
            }
            BallAutomorphism::new(g.matrix().clone())?;
        }
        Ok(Self { generators, names })
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryRep {
    pub m: usize,
    pub generator_images: Vec<DMatrix<Complex64>>,
}

impl UnitaryRep {
    pub fn new(m: usize, generator_images: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("representation dimension must be >= 1".into()));
        }
        for (i, u) in generator_images.iter().enumerate() {
            if u.nrows() != m || u.ncols() != m {
                return Err(Error::InconsistentRepresentation(format!(
                    "image {i} is {}x{}, expected {m}x{m}",
                    u.nrows(),
                    u.ncols()
                )));
            }
            let defect = max_abs(&(u * u.adjoint() - DMatrix::identity(m, m)));
            if defect > UNITARY_TOL {
                return Err(Error::InconsistentRepresentation(format!(
                    "image {i} is not unitary (defect {defect:e})"
                )));
            }
        }
        Ok(Self { m, generator_images })
    }

    pub fn trivial(generators: usize) -> Self {
        Self {
            m: 1,
            generator_images: vec![DMatrix::identity(1, 1); generators],
        }
    }

    fn letter(&self, letter: i32) -> DMatrix<Complex64> {
        let u = &self.generator_images[letter.unsigned_abs() as usize - 1];
        if letter > 0 {
            u.clone()
        } else {
            u.adjoint()
        }
    }
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub matrix: BallAutomorphism,
    /// Letters `+i` / `-i` for generator `i` (1-based) and its inverse.
    pub word: Vec<i32>,
    pub rho: DMatrix<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupTruncation {
    /// Sorted by word length, then lexicographically in the letter order
    /// `g1, g1^-1, g2, g2^-1, ...`; the identity comes first.
    pub elements: Vec<GroupElement>,
    pub radius: usize,
    pub m: usize,
}

impl GroupTruncation {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].matrix.dim()
    }

    /// Elements with word length at most `r`.
    pub fn up_to(&self, r: usize) -> &[GroupElement] {
        let end = self.elements.partition_point(|e| e.word.len() <= r);
        &self.elements[..end]
    }
}

/// Rank of a letter in the order `1, -1, 2, -2, ...`.
fn letter_order(gens: usize) -> Vec<i32> {
    (1..=gens as i32).flat_map(|i| [i, -i]).collect()
}

/// Index of the `(n+1)`-th root of unity closest to `a / b`.
fn center_factor(a: Complex64, b: Complex64, n: usize) -> Complex64 {
    let order = (n + 1) as f64;
    let turns = ((a / b).arg() / (2.0 * PI) * order).round();
    Complex64::from_polar(1.0, 2.0 * PI * turns / order)
}

/// Largest entry of `A - omega B` over the central scalars `omega`, relative to `|A|`.
pub fn distance_mod_center(a: &BallAutomorphism, b: &BallAutomorphism) -> f64 {
    let n = a.dim();
    let (am, bm) = (a.matrix(), b.matrix());
    // entry of largest modulus fixes the candidate scalar
    let (idx, _) = am
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (i, c)| if c.norm() > best.1 { (i, c.norm()) } else { best });
    if bm[idx].norm() == 0.0 {
        return f64::INFINITY;
    }
    let omega = center_factor(am[idx], bm[idx], n);
    max_abs(&(am - bm * omega)) / max_abs(am).max(1.0)
}

fn bucket_key(g: &BallAutomorphism) -> Vec<i64> {
    let n = g.dim();
    let m = g.matrix();
    (0..n)
        .flat_map(|j| {
            let w = m[(j, n)] / m[(n, n)];
            [(w.re / BUCKET).round() as i64, (w.im / BUCKET).round() as i64]
        })
        .collect()
}

fn neighbor_keys(key: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::with_capacity(key.len())];
    for &k in key {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (-1..=1).map(move |d| {
                    let mut p = prefix.clone();
                    p.push(k + d);
                    p
                })
            })
            .collect();
    }
    out
}

/// Breadth-first enumeration of reduced words up to length `radius`,
/// deduplicated modulo the center. Fails if more than `cap` elements arise or
/// if two words for the same element carry different representation values.
pub fn enumerate(spec: &GroupSpec, rep: &UnitaryRep, radius: usize, cap: usize) -> Result<GroupTruncation> {
    if rep.generator_images.len() != spec.generators.len() {
        return Err(Error::InconsistentRepresentation(format!(
            "{} generator images for {} generators",
            rep.generator_images.len(),
            spec.generators.len()
        )));
    }
    let n = spec.dim();
    let letters = letter_order(spec.generators.len());
    let gen_matrix = |l: i32| {
        let g = &spec.generators[l.unsigned_abs() as usize - 1];
        if l > 0 {
            g.clone()
        } else {
            g.inverse()
        }
    };
    let letter_mats: Vec<(i32, BallAutomorphism, DMatrix<Complex64>)> =
        letters.iter().map(|&l| (l, gen_matrix(l), rep.letter(l))).collect();

    let mut elements = vec![GroupElement {
        matrix: BallAutomorphism::identity(n),
        word: Vec::new(),
        rho: DMatrix::identity(rep.m, rep.m),
    }];
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    buckets.entry(bucket_key(&elements[0].matrix)).or_default().push(0);
    let mut frontier = vec![0usize];
    for _ in 0..radius {
        let mut next = Vec::new();
        for &idx in &frontier {
            for (l, g, u) in &letter_mats {
                if elements[idx].word.last() == Some(&-l) {
                    continue;
                }
                let matrix = elements[idx].matrix.compose(g);
                let rho = &elements[idx].rho * u;
                let key = bucket_key(&matrix);
                let dup = neighbor_keys(&key).iter().find_map(|k| {
                    buckets.get(k).and_then(|ids| {
                        ids.iter()
                            .copied()
                            .find(|&j| distance_mod_center(&matrix, &elements[j].matrix) <= DEDUP_TOL)
                    })
                });
                if let Some(j) = dup {
                    let defect = max_abs(&(&rho - &elements[j].rho));
                    if defect > RELATION_TOL {
                        let mut word = elements[idx].word.clone();
                        word.push(*l);
                        return Err(Error::InconsistentRepresentation(format!(
                            "words {:?} and {:?} give the same element but representation values differ by {defect:e}",
                            word, elements[j].word
                        )));
                    }
                    continue;
                }
                let mut word = elements[idx].word.clone();
                word.push(*l);
                buckets.entry(key).or_default().push(elements.len());
                next.push(elements.len());
                elements.push(GroupElement { matrix, word, rho });
                if elements.len() > cap {
                    return Err(Error::TruncationOverflow { cap });
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(GroupTruncation {
        elements,
        radius,
        m: rep.m,
    })
}

fn check_series(ctx: &KernelContext, trunc: &GroupTruncation, p: &BallPoint, z: &BallPoint) -> Result<()> {
    KernelContext::for_series(ctx.n, ctx.k)?;
    let n = trunc.dim();
    for d in [ctx.n, p.dim(), z.dim()] {
        if d != n {
            return Err(Error::DimensionMismatch { expected: n, got: d });
        }
    }
    Ok(())
}

/// `ln(K(gamma z, p) J(gamma, z))`.
fn ln_kernel_jacobian(g: &BallAutomorphism, z: &BallPoint, p: &BallPoint, ctx: &KernelContext) -> Result<Complex64> {
    let gz = apply_automorphism(g, z)?;
    let minus = -pairing_raw(gz.coords(), p.coords());
    let ln_k = Complex64::new(ctx.ln_kernel_prefactor(), 0.0) - minus.ln() * (ctx.n as f64 + 1.0);
    Ok(ln_k + g.ln_jacobian_raw(z.coords())?)
}

fn series_terms(
    elements: &[GroupElement],
    p: &BallPoint,
    z: &BallPoint,
    ctx: &KernelContext,
) -> Result<Vec<Complex64>> {
    let k = ctx.k as f64;
    elements
        .par_iter()
        .map(|e| Ok((ln_kernel_jacobian(&e.matrix, z, p, ctx)? * k).exp()))
        .collect()
}

/// `sum (K(gamma z, p) J(gamma, z))^k` over the truncation.
pub fn theta_scalar(p: &BallPoint, z: &BallPoint, ctx: &KernelContext, trunc: &GroupTruncation) -> Result<Complex64> {
    check_series(ctx, trunc, p, z)?;
    Ok(pairwise_sum(&series_terms(&trunc.elements, p, z, ctx)?))
}

/// Partial sums of `theta_scalar` over word length `0..=radius`.
pub fn theta_scalar_partial_sums(
    p: &BallPoint,
    z: &BallPoint,
    ctx: &KernelContext,
    trunc: &GroupTruncation,
) -> Result<Vec<Complex64>> {
    check_series(ctx, trunc, p, z)?;
    let terms = series_terms(&trunc.elements, p, z, ctx)?;
    Ok((0..=trunc.radius)
        .map(|r| pairwise_sum(&terms[..trunc.up_to(r).len()]))
        .collect())
}

/// `sum |K(gamma z, p) J(gamma, z)|^k`, the absolute majorant.
pub fn theta_majorant(p: &BallPoint, z: &BallPoint, ctx: &KernelContext, trunc: &GroupTruncation) -> Result<f64> {
    check_series(ctx, trunc, p, z)?;
    let k = ctx.k as f64;
    let terms: Result<Vec<f64>> = trunc
        .elements
        .par_iter()
        .map(|e| Ok((ln_kernel_jacobian(&e.matrix, z, p, ctx)?.re * k).exp()))
        .collect();
    Ok(pairwise_sum(&terms?))
}

/// `c(B^n,k) sum rho(gamma)^{-1} e_j K(gamma z, p)^k J(gamma, z)^k`; `j` is 0-based.
pub fn theta_vector(
    p: &BallPoint,
    j: usize,
    z: &BallPoint,
    ctx: &KernelContext,
    trunc: &GroupTruncation,
) -> Result<Vec<Complex64>> {
    check_series(ctx, trunc, p, z)?;
    if j >= trunc.m {
        return Err(Error::DimensionMismatch {
            expected: trunc.m,
            got: j + 1,
        });
    }
    let c = c_ball(ctx.n, ctx.k)?.value();
    let terms = series_terms(&trunc.elements, p, z, ctx)?;
    Ok((0..trunc.m)
        .map(|l| {
            // (rho^{-1})_{l j} = conj(rho_{j l}) for unitary rho
            let comps: Vec<Complex64> = trunc
                .elements
                .iter()
                .zip(&terms)
                .map(|(e, t)| e.rho[(j, l)].conj() * t)
                .collect();
            pairwise_sum(&comps) * c
        })
        .collect())
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `|J(g,z)^k F(gz) - rho(g) F(z)| / |F(z)|` for a series oracle `F`.
pub fn automorphy_residual(
    series: impl Fn(&BallPoint) -> Result<Vec<Complex64>>,
    g: &BallAutomorphism,
    rho_g: &DMatrix<Complex64>,
    z: &BallPoint,
    ctx: &KernelContext,
) -> Result<f64> {
    let fz = series(z)?;
    let norm = vec_norm(&fz);
    if !(norm >= UNDEFINED_NORM) {
        return Err(Error::UndefinedResidual(norm));
    }
    if rho_g.nrows() != fz.len() || rho_g.ncols() != fz.len() {
        return Err(Error::DimensionMismatch {
            expected: fz.len(),
            got: rho_g.nrows(),
        });
    }
    let gz = apply_automorphism(g, z)?;
    let fgz = series(&gz)?;
    let jk = jacobian(g, z)?.powu(ctx.k);
    let diff: Vec<Complex64> = (0..fz.len())
        .map(|a| {
            let rotated: Complex64 = (0..fz.len()).map(|b| rho_g[(a, b)] * fz[b]).sum();
            jk * fgz[a] - rotated
        })
        .collect();
    Ok(vec_norm(&diff) / norm)
}

/// Automorphy residual of `theta_vector(p, j, ., trunc)` under a truncation element.
pub fn element_residual(
    p: &BallPoint,
    j: usize,
    z: &BallPoint,
    ctx: &KernelContext,
    trunc: &GroupTruncation,
    element: &GroupElement,
) -> Result<f64> {
    automorphy_residual(|w| theta_vector(p, j, w, ctx, trunc), &element.matrix, &element.rho, z, ctx)
}

/// Group-averaged monomial `H(z) = (1/N) sum rho(gamma)^{-1} J(gamma,z)^k v z^a`
/// for a finite group of rotations about the origin of `B^1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedMonomial {
    pub exponent: u32,
    pub vector: Vec<Complex64>,
}

impl AveragedMonomial {
    pub fn eval(&self, z: Complex64, k: u32, trunc: &GroupTruncation) -> Result<Vec<Complex64>> {
        let m = trunc.m;
        if self.vector.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: self.vector.len(),
            });
        }
        let zp = BallPoint::new(vec![z])?;
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        for e in &trunc.elements {
            let gz = apply_automorphism(&e.matrix, &zp)?.coords()[0];
            let scale = jacobian(&e.matrix, &zp)?.powu(k) * gz.powu(self.exponent);
            for (l, o) in out.iter_mut().enumerate() {
                let inv_v: Complex64 = (0..m).map(|b| e.rho[(b, l)].conj() * self.vector[b]).sum();
                *o += inv_v * scale;
            }
        }
        let nf = trunc.len() as f64;
        Ok(out.into_iter().map(|c| c / nf).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReproducingReport {
    /// Petersson pairing `(H, Theta_p^{(j)})` over the fundamental sector.
    pub pairing: Complex64,
    /// `H_j(p)`.
    pub expected: Complex64,
    pub deviation: f64,
}

/// Angle of a truncation element that fixes the origin, or `None`.
fn rotation_angle(g: &BallAutomorphism) -> Option<f64> {
    let m = g.matrix();
    if m[(0, 1)].norm() > 1e-12 || m[(1, 0)].norm() > 1e-12 {
        return None;
    }
    Some((m[(0, 0)] / m[(1, 1)]).arg())
}

/// Petersson pairing of `H` against `Theta_p^{(j)}` over the sector
/// `0 <= arg z < 2 pi / N` of a finite cyclic rotation group of order `N`,
/// by a tensor Gauss-Legendre rule with `nodes` points per polar axis.
pub fn reproducing_check(
    h: &AveragedMonomial,
    p: &BallPoint,
    j: usize,
    ctx: &KernelContext,
    trunc: &GroupTruncation,
    nodes: usize,
) -> Result<ReproducingReport> {
    let z0 = BallPoint::origin(1);
    check_series(ctx, trunc, p, &z0)?;
    if ctx.n != 1 {
        return Err(Error::Precondition("reproducing check is implemented on B^1".into()));
    }
    let order = trunc.len();
    let mut angles = Vec::with_capacity(order);
    for e in &trunc.elements {
        let a = rotation_angle(&e.matrix)
            .ok_or_else(|| Error::Precondition("group must consist of rotations about 0".into()))?;
        angles.push(a);
    }
    let step = 2.0 * PI / order as f64;
    for a in &angles {
        let turns = a / step;
        if (turns - turns.round()).abs() > 1e-9 {
            return Err(Error::Precondition(format!(
                "truncation is not a closed cyclic group of order {order}"
            )));
        }
    }
    let k = ctx.k as i32;
    let terms = |zz: Complex64| -> Result<Complex64> {
        let w = BallPoint::new(vec![zz])?;
        let hv = h.eval(zz, ctx.k, trunc)?;
        let tv = theta_vector(p, j, &w, ctx, trunc)?;
        let inner: Complex64 = hv.iter().zip(&tv).map(|(a, b)| a * b.conj()).sum();
        // K(z,z)^{1-k} with K(z,z) = 1 / (pi (1-|z|^2)^2)
        let weight = (PI * (1.0 - zz.norm_sqr()).powi(2)).powi(k - 1);
        Ok(inner * weight)
    };
    let failure = std::sync::Mutex::new(None);
    let integrand = |t: &[f64]| -> Complex64 {
        let zz = Complex64::from_polar(t[0], t[1]);
        match terms(zz) {
            Ok(v) => v * t[0],
            Err(e) => {
                failure.lock().expect("failure slot").get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let pairing = tensor_rule(&integrand, &[(0.0, 1.0), (0.0, step)], nodes, true);
    if let Some(e) = failure.into_inner().expect("failure slot") {
        return Err(e);
    }
    let expected = h.eval(p.coords()[0], ctx.k, trunc)?[j];
    Ok(ReproducingReport {
        pairing,
        expected,
        deviation: (pairing - expected).norm(),
    })
}

/// Rotation by `2 pi / order` about the origin of `B^1`.
pub fn cyclic_spec(order: u32) -> Result<GroupSpec> {
    if order < 2 {
        return Err(Error::InvalidArgument("cyclic order must be >= 2".into()));
    }
    GroupSpec::new(vec![build_rotation(2.0 * PI / order as f64)], vec![format!("r{order}")])
}

/// Type of the product `ab` of the two triangle generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThirdVertex {
    /// `ab` elliptic of order `q`, a cocompact `(2,3,q)` triangle group.
    Elliptic(u32),
    /// `ab` parabolic: the `(2,3,infinity)` group.
    Parabolic,
    /// `ab` hyperbolic with translation length `l`; the group is the free
    /// product `Z/2 * Z/3` with infinite covolume.
    Hyperbolic(f64),
}

/// Rotation by `2 pi / 3` about 0 and a half-turn about a point on the
/// positive real axis, placed so that `ab` has the requested type.
pub fn triangle23_spec(third: ThirdVertex) -> Result<GroupSpec> {
    let c = match third {
        ThirdVertex::Elliptic(q) if q >= 7 => (PI / q as f64).cos(),
        ThirdVertex::Elliptic(q) => {
            return Err(Error::InvalidArgument(format!("(2,3,{q}) is not hyperbolic, need q >= 7")));
        }
        ThirdVertex::Parabolic => 1.0,
        ThirdVertex::Hyperbolic(l) if l > 0.0 && l.is_finite() => (0.5 * l).cosh(),
        ThirdVertex::Hyperbolic(l) => {
            return Err(Error::InvalidArgument(format!("translation length must be positive, got {l}")));
        }
    };
    let cosh_d = c / (PI / 3.0).sin();
    let q = (0.5 * cosh_d.acosh()).tanh();
    GroupSpec::new(
        vec![build_rotation(2.0 * PI / 3.0), build_elliptic(Complex64::new(q, 0.0), PI)?],
        vec!["a".into(), "b".into()],
    )
}

/// The `(2,3,7)` triangle group.
pub fn triangle237_spec() -> Result<GroupSpec> {
    triangle23_spec(ThirdVertex::Elliptic(7))
}

/// Translation length used by the shipped infinite-covolume config.
pub const HYPERIDEAL_LENGTH: f64 = 1.924_847_300_238_413_9;

/// Klein's 3-dimensional unitary representation of the `(2,3,7)` group,
/// through its quotient `PSL(2,7)`: `a` goes to the cyclic shift and `b` to
/// `S R S^{-1}` with `S = diag(e^4, e^2, e)` and `R` the Klein involution,
/// `e = exp(2 pi i / 7)`.
pub fn klein_rep() -> UnitaryRep {
    let e = |j: i32| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 7.0);
    let mut shift = DMatrix::zeros(3, 3);
    shift[(0, 1)] = Complex64::new(1.0, 0.0);
    shift[(1, 2)] = Complex64::new(1.0, 0.0);
    shift[(2, 0)] = Complex64::new(1.0, 0.0);
    // -1/sqrt(-7) = i/sqrt(7)
    let h = Complex64::new(0.0, 1.0 / 7f64.sqrt());
    let d = |a: i32, b: i32| e(a) - e(b);
    let entries = [
        [d(1, 6), d(2, 5), d(4, 3)],
        [d(2, 5), d(4, 3), d(1, 6)],
        [d(4, 3), d(1, 6), d(2, 5)],
    ];
    let s = [e(4), e(2), e(1)];
    let b = DMatrix::from_fn(3, 3, |i, j| h * entries[i][j] * s[i] * s[j].conj());
    UnitaryRep {
        m: 3,
        generator_images: vec![shift, b],
    }
}
