//! Tensor Gauss-Legendre cubature: fixed rules with a node-doubling check and
//! a global adaptive bisection scheme for peaked integrands.
//!
//! All reductions are pairwise in a fixed order, so results do not depend on
//! the number of rayon worker threads.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values that can be integrated: real or complex scalars.
pub trait QuadValue:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Pairwise (tree) summation in slice order.
pub fn pairwise_sum<V: QuadValue>(values: &[V]) -> V {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        return values.iter().fold(V::zero(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the three-term Legendre recurrence.
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// One-dimensional rule on `[a, b]`.
    pub fn integrate<V: QuadValue>(&self, a: f64, b: f64, f: impl Fn(f64) -> V) -> V {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let terms: Vec<V> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(mid + half * x) * (w * half))
            .collect();
        pairwise_sum(&terms)
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=m {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let mf = m as f64;
    let p = if m == 0 { 1.0 } else { p1 };
    let d = mf * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Tensor rule; node count doubles until the relative change is below `rel_tol`.
    Fixed,
    /// Global adaptive bisection of the box.
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Gauss-Legendre nodes per axis: of the whole box for `Fixed`, of each cell for `Adaptive`.
    pub nodes_per_axis: usize,
    pub scheme: Scheme,
    pub rel_tol: f64,
    /// Absolute error floor, useful when the integral may vanish.
    pub abs_tol: f64,
    /// Adaptive: minimum total nodes per axis of the initial partition.
    pub floor_nodes_per_axis: usize,
    /// Adaptive: maximum number of cells before giving up.
    pub max_cells: usize,
    /// Evaluate nodes on the rayon pool.
    pub parallel: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes_per_axis: 8,
            scheme: Scheme::Adaptive,
            rel_tol: 1e-6,
            abs_tol: 0.0,
            floor_nodes_per_axis: 32,
            max_cells: 200_000,
            parallel: true,
        }
    }
}

impl QuadratureConfig {
    pub fn fixed(nodes_per_axis: usize, rel_tol: f64) -> Self {
        Self {
            nodes_per_axis,
            scheme: Scheme::Fixed,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn adaptive(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_axis < 8 {
            return Err(Error::InvalidArgument(format!(
                "nodes_per_axis must be >= 8, got {}",
                self.nodes_per_axis
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.abs_tol < 0.0 || self.max_cells == 0 {
            return Err(Error::InvalidArgument("abs_tol >= 0 and max_cells > 0 required".into()));
        }
        Ok(())
    }

    /// Configuration for an integral nested inside another one.
    pub fn inner(&self, rel_tol: f64) -> Self {
        Self {
            rel_tol,
            parallel: false,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<V> {
    pub value: V,
    /// Estimated absolute error.
    pub abs_err: f64,
    pub evaluations: usize,
    pub cells: usize,
}

impl<V: QuadValue> QuadResult<V> {
    pub fn rel_err(&self) -> f64 {
        let m = self.value.magnitude();
        if m > 0.0 {
            self.abs_err / m
        } else if self.abs_err == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Integrates `f` over the box `bounds` with the configured scheme.
pub fn integrate<V, F>(f: &F, bounds: &[(f64, f64)], cfg: &QuadratureConfig) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: Fn(&[f64]) -> V + Sync,
{
    cfg.validate()?;
    if bounds.is_empty() {
        return Err(Error::InvalidArgument("empty integration box".into()));
    }
    match cfg.scheme {
        Scheme::Fixed => integrate_doubling(f, bounds, cfg),
        Scheme::Adaptive => integrate_adaptive(f, bounds, cfg),
    }
}

/// Integrates over the sub-boxes obtained by cutting `bounds` at `split`
/// along every axis where the cut is interior. Useful when the integrand
/// peaks at a known point, which then sits on cell corners.
pub fn integrate_split<V, F>(
    f: &F,
    bounds: &[(f64, f64)],
    split: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: Fn(&[f64]) -> V + Sync,
{
    if split.len() != bounds.len() {
        return Err(Error::DimensionMismatch {
            expected: bounds.len(),
            got: split.len(),
        });
    }
    let mut boxes: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
    for (&(a, b), &s) in bounds.iter().zip(split) {
        let pieces: Vec<(f64, f64)> = if s > a && s < b {
            vec![(a, s), (s, b)]
        } else {
            vec![(a, b)]
        };
        boxes = boxes
            .into_iter()
            .flat_map(|bx| {
                pieces.iter().map(move |&p| {
                    let mut nb = bx.clone();
                    nb.push(p);
                    nb
                })
            })
            .collect();
    }
    let mut values = Vec::with_capacity(boxes.len());
    let mut abs_err = 0.0;
    let mut evaluations = 0;
    let mut cells = 0;
    for bx in &boxes {
        let r = integrate(f, bx, cfg)?;
        values.push(r.value);
        abs_err += r.abs_err;
        evaluations += r.evaluations;
        cells += r.cells;
    }
    Ok(QuadResult {
        value: pairwise_sum(&values),
        abs_err,
        evaluations,
        cells,
    })
}

/// Tensor Gauss-Legendre rule with `m` nodes per axis, no error control.
pub fn tensor_rule<V, F>(f: &F, bounds: &[(f64, f64)], m: usize, parallel: bool) -> V
where
    V: QuadValue,
    F: Fn(&[f64]) -> V + Sync,
{
    let rule = GaussLegendre::new(m);
    let rules: Vec<&GaussLegendre> = vec![&rule; bounds.len()];
    let lo: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    let hi: Vec<f64> = bounds.iter().map(|b| b.1).collect();
    tensor_sum(f, &lo, &hi, &rules, parallel)
}

fn integrate_doubling<V, F>(f: &F, bounds: &[(f64, f64)], cfg: &QuadratureConfig) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: Fn(&[f64]) -> V + Sync,
{
    let d = bounds.len() as u32;
    let mut m = cfg.nodes_per_axis;
    let mut evaluations = m.pow(d);
    let mut prev = tensor_rule(f, bounds, m, cfg.parallel);
    const MAX_POINTS: usize = 1 << 26;
    loop {
        let next_m = 2 * m;
        if next_m.pow(d) > MAX_POINTS {
            let rel = f64::INFINITY;
            return Err(Error::Convergence {
                value: prev.magnitude(),
                rel_err: rel,
                cells: 1,
            });
        }
        let next = tensor_rule(f, bounds, next_m, cfg.parallel);
        evaluations += next_m.pow(d);
        let diff = (next - prev).magnitude();
        if diff <= cfg.rel_tol * next.magnitude() || diff <= cfg.abs_tol {
            return Ok(QuadResult {
                value: next,
                abs_err: diff,
                evaluations,
                cells: 1,
            });
        }
        prev = next;
        m = next_m;
    }
}

/// Tensor product of possibly different rules per axis over `[lo, hi]`.
fn tensor_sum<V, F>(f: &F, lo: &[f64], hi: &[f64], rules: &[&GaussLegendre], parallel: bool) -> V
where
    V: QuadValue,
    F: Fn(&[f64]) -> V + Sync,
{
    let d = lo.len();
    let counts: Vec<usize> = rules.iter().map(|r| r.len()).collect();
    let total: usize = counts.iter().product();
    let half: Vec<f64> = (0..d).map(|i| 0.5 * (hi[i] - lo[i])).collect();
    let mid: Vec<f64> = (0..d).map(|i| 0.5 * (hi[i] + lo[i])).collect();
    let scale: f64 = half.iter().product();
    let term = |flat: usize| -> V {
        let mut idx = flat;
        let mut point = [0.0f64; 8];
        let mut heap_point;
        let p: &mut [f64] = if d <= 8 {
            &mut point[..d]
        } else {
            heap_point = vec![0.0; d];
            &mut heap_point[..]
        };
        let mut w = scale;
        for axis in (0..d).rev() {
            let j = idx % counts[axis];
            idx /= counts[axis];
            p[axis] = mid[axis] + half[axis] * rules[axis].nodes[j];
            w *= rules[axis].weights[j];
        }
        f(p) * w
    };
    let terms: Vec<V> = if parallel && total >= 16 {
        (0..total).into_par_iter().map(term).collect()
    } else {
        (0..total).map(term).collect()
    };
    pairwise_sum(&terms)
}

struct Cell<V> {
    id: u64,
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: V,
    err: f64,
    split_axis: usize,
}

struct HeapEntry {
    err: f64,
    id: u64,
    slot: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct CellRules {
    high: GaussLegendre,
    low: GaussLegendre,
}

fn evaluate_cell<V, F>(
    f: &F,
    lo: Vec<f64>,
    hi: Vec<f64>,
    rules: &CellRules,
    id: u64,
    parallel: bool,
) -> Cell<V>
where
    V: QuadValue,
    F: Fn(&[f64]) -> V + Sync,
{
    let d = lo.len();
    let all_high: Vec<&GaussLegendre> = vec![&rules.high; d];
    let value = tensor_sum(f, &lo, &hi, &all_high, parallel);
    let mut err = 0.0;
    let mut split_axis = 0;
    let mut worst = -1.0;
    for axis in 0..d {
        let mut mixed = all_high.clone();
        mixed[axis] = &rules.low;
        let reduced = tensor_sum(f, &lo, &hi, &mixed, parallel);
        let diff = (value - reduced).magnitude();
        err += diff;
        // widest axis wins ties so flat cells still get split
        let score = diff + 1e-300 * (hi[axis] - lo[axis]);
        if score > worst {
            worst = score;
            split_axis = axis;
        }
    }
    Cell {
        id,
        lo,
        hi,
        value,
        err,
        split_axis,
    }
}

fn integrate_adaptive<V, F>(f: &F, bounds: &[(f64, f64)], cfg: &QuadratureConfig) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: Fn(&[f64]) -> V + Sync,
{
    let d = bounds.len();
    let m = cfg.nodes_per_axis;
    let rules = CellRules {
        high: GaussLegendre::new(m),
        low: GaussLegendre::new(m - m / 4),
    };
    let per_cell_evals = m.pow(d as u32) + d * (m - m / 4) * m.pow(d as u32 - 1);
    let pieces = cfg.floor_nodes_per_axis.div_ceil(m).max(1);

    let mut initial: Vec<(Vec<f64>, Vec<f64>)> = vec![(Vec::new(), Vec::new())];
    for &(a, b) in bounds {
        let h = (b - a) / pieces as f64;
        let mut next = Vec::with_capacity(initial.len() * pieces);
        for (lo, hi) in &initial {
            for j in 0..pieces {
                let mut lo2 = lo.clone();
                let mut hi2 = hi.clone();
                lo2.push(a + h * j as f64);
                hi2.push(if j + 1 == pieces { b } else { a + h * (j + 1) as f64 });
                next.push((lo2, hi2));
            }
        }
        initial = next;
    }

    let mut next_id: u64 = 0;
    let mut cells: Vec<Option<Cell<V>>> = Vec::new();
    let mut heap = BinaryHeap::new();
    let parallel_cells = cfg.parallel && initial.len() > 1;
    let evaluated: Vec<Cell<V>> = if parallel_cells {
        initial
            .into_par_iter()
            .enumerate()
            .map(|(i, (lo, hi))| evaluate_cell(f, lo, hi, &rules, i as u64, false))
            .collect()
    } else {
        initial
            .into_iter()
            .enumerate()
            .map(|(i, (lo, hi))| evaluate_cell(f, lo, hi, &rules, i as u64, cfg.parallel))
            .collect()
    };
    for cell in evaluated {
        next_id = next_id.max(cell.id + 1);
        heap.push(HeapEntry {
            err: cell.err,
            id: cell.id,
            slot: cells.len(),
        });
        cells.push(Some(cell));
    }

    let mut evaluations = cells.len() * per_cell_evals;
    let mut live = cells.len();
    let mut iterations = 0usize;
    loop {
        let (total, err) = totals(&cells);
        let target = (cfg.rel_tol * total.magnitude()).max(cfg.abs_tol);
        if err <= target {
            return Ok(QuadResult {
                value: total,
                abs_err: err,
                evaluations,
                cells: live,
            });
        }
        if live >= cfg.max_cells {
            return Err(Error::Convergence {
                value: total.magnitude(),
                rel_err: err / total.magnitude(),
                cells: live,
            });
        }
        // split a batch of the worst cells, refreshing totals afterwards
        let batch = (live / 8).clamp(1, 64);
        let mut to_split = Vec::with_capacity(batch);
        let mut removed_err = 0.0;
        while to_split.len() < batch {
            let Some(entry) = heap.pop() else { break };
            let cell = cells[entry.slot].take().expect("heap entries point at live cells");
            removed_err += cell.err;
            to_split.push(cell);
            if err - removed_err <= target {
                break;
            }
        }
        let mut children_spec = Vec::with_capacity(2 * to_split.len());
        for cell in &to_split {
            let axis = cell.split_axis;
            let mid = 0.5 * (cell.lo[axis] + cell.hi[axis]);
            let mut hi_left = cell.hi.clone();
            hi_left[axis] = mid;
            let mut lo_right = cell.lo.clone();
            lo_right[axis] = mid;
            children_spec.push((cell.lo.clone(), hi_left, next_id));
            children_spec.push((lo_right, cell.hi.clone(), next_id + 1));
            next_id += 2;
        }
        let children: Vec<Cell<V>> = if cfg.parallel && children_spec.len() > 1 {
            children_spec
                .into_par_iter()
                .map(|(lo, hi, id)| evaluate_cell(f, lo, hi, &rules, id, false))
                .collect()
        } else {
            children_spec
                .into_iter()
                .map(|(lo, hi, id)| evaluate_cell(f, lo, hi, &rules, id, cfg.parallel))
                .collect()
        };
        live += children.len() - to_split.len();
        evaluations += children.len() * per_cell_evals;
        for child in children {
            heap.push(HeapEntry {
                err: child.err,
                id: child.id,
                slot: cells.len(),
            });
            cells.push(Some(child));
        }
        iterations += 1;
        if iterations % 256 == 0 {
            compact(&mut cells, &mut heap);
        }
    }
}

fn totals<V: QuadValue>(cells: &[Option<Cell<V>>]) -> (V, f64) {
    let live: Vec<&Cell<V>> = cells.iter().flatten().collect();
    let values: Vec<V> = live.iter().map(|c| c.value).collect();
    let errs: Vec<f64> = live.iter().map(|c| c.err).collect();
    (pairwise_sum(&values), pairwise_sum(&errs))
}

fn compact<V>(cells: &mut Vec<Option<Cell<V>>>, heap: &mut BinaryHeap<HeapEntry>) {
    let live: Vec<Cell<V>> = cells.drain(..).flatten().collect();
    heap.clear();
    for (slot, cell) in live.into_iter().enumerate() {
        heap.push(HeapEntry {
            err: cell.err,
            id: cell.id,
            slot,
        });
        cells.push(Some(cell));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for m in [1, 2, 5, 8, 16, 33, 64, 128] {
            let gl = GaussLegendre::new(m);
            let s: f64 = gl.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "m={m} sum={s}");
            assert!(gl.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let gl = GaussLegendre::new(8);
        // degree 15 is integrated exactly
        let got = gl.integrate(0.0, 1.0, |x| x.powi(15));
        assert!((got - 1.0 / 16.0).abs() < 1e-15);
        let got = gl.integrate(-1.0, 2.0, |x| 3.0 * x * x - x + 1.0);
        assert!((got - (9.0 - 1.5 + 3.0)).abs() < 1e-13);
    }

    #[test]
    fn known_two_point_rule() {
        let gl = GaussLegendre::new(2);
        let x = 1.0 / 3f64.sqrt();
        assert!((gl.nodes[1] - x).abs() < 1e-15);
        assert!((gl.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|x| x as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
    }

    #[test]
    fn fixed_scheme_converges_on_smooth_integrand() {
        let f = |p: &[f64]| (p[0] + p[1]).exp();
        let cfg = QuadratureConfig::fixed(8, 1e-12);
        let r = integrate(&f, &[(0.0, 1.0), (0.0, 1.0)], &cfg).unwrap();
        let exact = (std::f64::consts::E - 1.0).powi(2);
        assert!((r.value - exact).abs() < 1e-12);
    }

    #[test]
    fn adaptive_resolves_narrow_peak() {
        let s: f64 = 1e-3;
        let f = |p: &[f64]| (-(p[0] - 0.3).powi(2) / (2.0 * s * s)).exp();
        let r = integrate(&f, &[(0.0, 1.0)], &QuadratureConfig::adaptive(1e-10)).unwrap();
        let exact = s * (2.0 * std::f64::consts::PI).sqrt();
        assert!((r.value - exact).abs() / exact < 1e-9, "{}", r.value);
    }

    #[test]
    fn adaptive_complex_integrand() {
        let f = |p: &[f64]| Complex64::new(0.0, p[0] + p[1]).exp();
        let r = integrate(&f, &[(0.0, 1.0), (0.0, 2.0)], &QuadratureConfig::adaptive(1e-11)).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let exact = ((i * 1.0).exp() - 1.0) * ((i * 2.0).exp() - 1.0) / (i * i);
        assert!((r.value - exact).norm() < 1e-10);
    }

    #[test]
    fn adaptive_reports_non_convergence() {
        let f = |p: &[f64]| if p[0] > 1.0 / 3.0 { 1.0 } else { 0.0 };
        let cfg = QuadratureConfig {
            max_cells: 20,
            ..QuadratureConfig::adaptive(1e-14)
        };
        assert!(matches!(
            integrate(&f, &[(0.0, 1.0)], &cfg),
            Err(Error::Convergence { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(QuadratureConfig::fixed(4, 1e-6).validate().is_err());
        assert!(QuadratureConfig::adaptive(0.0).validate().is_err());
        assert!(QuadratureConfig::adaptive(1e-6).validate().is_ok());
    }

    #[test]
    fn parallel_and_serial_agree_bitwise() {
        let f = |p: &[f64]| (3.0 * p[0]).sin() * (p[1] * p[0]).cos() / (1.0 + p[1]);
        let mut cfg = QuadratureConfig::adaptive(1e-10);
        let a = integrate(&f, &[(0.0, 2.0), (0.0, 1.0)], &cfg).unwrap();
        cfg.parallel = false;
        let b = integrate(&f, &[(0.0, 2.0), (0.0, 1.0)], &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
