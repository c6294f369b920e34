mod common;

use std::f64::consts::PI;

use ballseries::geometry::*;
use ballseries::submanifold::ParamSubmanifold;
use ballseries::Error;
use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn potential(z: &[f64]) -> f64 {
    // -log(-<z,z>) in real coordinates
    -(1.0 - z.iter().map(|x| x * x).sum::<f64>()).ln()
}

/// `d/dz_j d/dzbar_l` of the potential by central differences.
fn fd_levi_form(z: &BallPoint, step: f64) -> DMatrix<Complex64> {
    let x0 = z.to_real();
    let n = z.dim();
    let second = |a: usize, b: usize| -> f64 {
        let mut v = x0.clone();
        let mut f = |da: f64, db: f64| {
            v.copy_from_slice(&x0);
            v[a] += da;
            v[b] += db;
            potential(&v)
        };
        (f(step, step) - f(step, -step) - f(-step, step) + f(-step, -step)) / (4.0 * step * step)
    };
    DMatrix::from_fn(n, n, |j, l| {
        let (xj, yj, xl, yl) = (2 * j, 2 * j + 1, 2 * l, 2 * l + 1);
        // (d_xj - i d_yj)(d_xl + i d_yl) / 4
        let re = second(xj, xl) + second(yj, yl);
        let im = second(xj, yl) - second(yj, xl);
        c(re, im) / 4.0
    })
}

#[test]
fn metric_matches_levi_form_of_potential() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=3 {
        for _ in 0..10 {
            let z = random_point(&mut rng, n, 0.8);
            let h = metric_tensor(&z);
            let fd = fd_levi_form(&z, 1e-4);
            let scale = fd.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let diff = (&h.h - &fd).iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(diff <= 1e-6 * scale, "n={n} diff={diff:e}");
        }
    }
}

#[test]
fn metric_positive_definite_and_identity_at_origin() {
    let h0 = metric_tensor(&BallPoint::origin(3));
    assert!((&h0.h - DMatrix::<Complex64>::identity(3, 3)).iter().all(|v| v.norm() < 1e-15));
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let z = random_point(&mut rng, 2, 0.999);
        let h = metric_tensor(&z);
        assert!(h.hermitian_residual() <= 1e-12);
        assert!(h.min_eigenvalue() > 0.0);
    }
}

#[test]
fn jacobian_is_determinant_of_differential() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for n in 1..=3 {
        for _ in 0..20 {
            let g = random_automorphism(&mut rng, n);
            let z = random_point(&mut rng, n, 0.7);
            let d = action_differential_fd(&g, &z, 1e-5).unwrap();
            let det = d.determinant();
            let j = jacobian(&g, &z).unwrap();
            assert!((det - j).norm() <= 1e-6 * j.norm(), "n={n}: {det} vs {j}");
        }
    }
}

#[test]
fn rotation_jacobian_by_differences() {
    let theta = 1.1;
    let g = build_rotation(theta);
    for z in [c(0.0, 0.0), c(0.4, -0.2), c(-0.7, 0.1)] {
        let p = BallPoint::new(vec![z]).unwrap();
        let d = action_differential_fd(&g, &p, 1e-5).unwrap()[(0, 0)];
        assert!((d - Complex64::from_polar(1.0, theta)).norm() < 1e-9);
        assert!((jacobian(&g, &p).unwrap() - Complex64::from_polar(1.0, theta)).norm() < 1e-14);
    }
}

#[test]
fn kernel_transformation_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for n in 1..=2 {
        let ctx = KernelContext::new(n, 1).unwrap();
        for _ in 0..100 {
            let g = random_automorphism(&mut rng, n);
            let z = random_point(&mut rng, n, 0.9);
            let w = random_point(&mut rng, n, 0.9);
            let r = kernel_transform_residual(&g, &z, &w, &ctx).unwrap();
            let k = bergman_kernel(&z, &w, &ctx).unwrap().norm();
            assert!(r <= 1e-9 * k, "relative residual {:e}", r / k);
        }
    }
}

#[test]
fn cocycle_and_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for n in 1..=3 {
        for _ in 0..30 {
            let a = random_automorphism(&mut rng, n);
            let b = random_automorphism(&mut rng, n);
            let z = random_point(&mut rng, n, 0.9);
            let ab = a.compose(&b);
            let bz = apply_automorphism(&b, &z).unwrap();
            let lhs = jacobian(&ab, &z).unwrap();
            let rhs = jacobian(&a, &bz).unwrap() * jacobian(&b, &z).unwrap();
            assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm());
            let p = apply_automorphism(&ab, &z).unwrap();
            let q = apply_automorphism(&a, &bz).unwrap();
            for (x, y) in p.coords().iter().zip(q.coords()) {
                assert!((x - y).norm() <= 1e-10);
            }
            assert!(ab.group_residual() <= 1e-10);
        }
    }
}

#[test]
fn distance_is_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for n in 1..=2 {
        for _ in 0..20 {
            let g = random_automorphism(&mut rng, n);
            let z = random_point(&mut rng, n, 0.9);
            let w = random_point(&mut rng, n, 0.9);
            let d0 = hyperbolic_distance(&z, &w).unwrap();
            let gz = apply_automorphism(&g, &z).unwrap();
            let gw = apply_automorphism(&g, &w).unwrap();
            let d1 = hyperbolic_distance(&gz, &gw).unwrap();
            assert!((d0 - d1).abs() <= 1e-10 * d0.max(1.0), "{d0} vs {d1}");
        }
    }
}

#[test]
fn radial_distance() {
    for r in [0.1, 0.5, 0.9, 0.999] {
        let o = BallPoint::origin(2);
        let w = BallPoint::new(vec![c(0.0, 0.0), c(0.0, r)]).unwrap();
        let d = hyperbolic_distance(&o, &w).unwrap();
        assert!((d - 2.0 * f64::atanh(r)).abs() < 1e-12 * d);
    }
}

#[test]
fn builders() {
    assert_eq!(
        build_translation(c(0.0, 0.0)).unwrap().matrix(),
        BallAutomorphism::identity(1).matrix()
    );
    let z = BallPoint::new(vec![c(0.3, -0.1)]).unwrap();
    let h = apply_automorphism(&build_rotation(PI), &z).unwrap();
    assert!((h.coords()[0] + z.coords()[0]).norm() < 1e-15);
    let a = c(0.4, 0.3);
    let t = build_translation(a).unwrap();
    let t0 = apply_automorphism(&t, &BallPoint::origin(1)).unwrap();
    assert!((t0.coords()[0] - a).norm() < 1e-15);
    let e = build_elliptic(a, 0.9).unwrap();
    let pa = BallPoint::new(vec![a]).unwrap();
    assert!((apply_automorphism(&e, &pa).unwrap().coords()[0] - a).norm() < 1e-12);
    assert!(matches!(build_translation(c(1.0, 0.0)), Err(Error::OutsideBall { .. })));
}

#[test]
fn cr_distributions_on_hemiball() {
    let x = ParamSubmanifold::cr_hemiball(2, 0.5).unwrap();
    let on_axis = BallPoint::new(vec![c(0.0, 0.0), c(0.2, 0.0)]).unwrap();
    let r = cr_structure_check(&x, &on_axis).unwrap();
    assert!(r.holomorphic_dist_ok && r.totally_real_dist_ok);
    let generic = BallPoint::new(vec![c(0.2, -0.15), c(0.3, 0.0)]).unwrap();
    let r = cr_structure_check(&x, &generic).unwrap();
    assert!(r.holomorphic_dist_ok && r.totally_real_dist_ok);
    assert!(r.orthogonality_residual <= 1e-9);
    let off = BallPoint::new(vec![c(0.2, 0.0), c(0.3, 0.1)]).unwrap();
    assert!(cr_structure_check(&x, &off).is_err());
}
