#![allow(dead_code)]

use ballseries::geometry::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Uniform-ish point with `|z| < radius`.
pub fn random_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> BallPoint {
    loop {
        let coords: Vec<Complex64> = (0..n)
            .map(|_| c(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius)))
            .collect();
        if coords.iter().map(|z| z.norm_sqr()).sum::<f64>() < radius * radius {
            return BallPoint::new(coords).unwrap();
        }
    }
}

/// Haar-ish unitary from the QR factor of a Gaussian-like matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    m.qr().q()
}

/// Product of one to three translations, rotations or elliptics.
pub fn random_automorphism(rng: &mut ChaCha8Rng, n: usize) -> BallAutomorphism {
    let factors = rng.gen_range(1..=3);
    let mut g = BallAutomorphism::identity(n);
    for _ in 0..factors {
        let h = if n == 1 {
            match rng.gen_range(0..3) {
                0 => build_translation(random_point(rng, 1, 0.8).coords()[0]).unwrap(),
                1 => build_rotation(rng.gen_range(-3.0..3.0)),
                _ => build_elliptic(random_point(rng, 1, 0.8).coords()[0], rng.gen_range(-3.0..3.0)).unwrap(),
            }
        } else if rng.gen_bool(0.5) {
            build_translation_n(&random_point(rng, n, 0.8)).unwrap()
        } else {
            build_unitary_rotation(&random_unitary(rng, n)).unwrap()
        };
        g = g.compose(&h);
    }
    g
}

/// Mean and standard error of `f` over `samples` draws.
pub fn monte_carlo(samples: usize, seed: u64, mut f: impl FnMut(&mut ChaCha8Rng) -> f64) -> (f64, f64) {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let v = f(&mut rng);
        s += v;
        s2 += v * v;
    }
    let m = s / samples as f64;
    let var = (s2 / samples as f64 - m * m).max(0.0);
    (m, (var / samples as f64).sqrt())
}

/// Uniform point of the hemiball `x1^2 + y1^2 + x2^2 < alpha^2, x2 > 0`.
fn hemiball_sample(rng: &mut ChaCha8Rng, alpha: f64) -> [f64; 3] {
    loop {
        let p = [
            rng.gen_range(-alpha..alpha),
            rng.gen_range(-alpha..alpha),
            rng.gen_range(0.0..alpha),
        ];
        if p.iter().map(|x| x * x).sum::<f64>() < alpha * alpha {
            return p;
        }
    }
}

/// 6-dimensional Monte-Carlo estimate of the CR hemiball pairing in `B^2`:
/// `c(2,k) vol^2 E[Re (<z,z><w,w>)^{L/2} (-<z,w>)^{-L}]`, `L = 3k`.
pub fn cr_ball_monte_carlo(alpha: f64, k: u32, samples: usize, seed: u64) -> (f64, f64) {
    let lambda = 3.0 * k as f64;
    let vol = 2.0 / 3.0 * std::f64::consts::PI * alpha.powi(3);
    let c = ballseries::constants::c_ball(2, k).unwrap().value();
    let (m, se) = monte_carlo(samples, seed, |rng| {
        let a = hemiball_sample(rng, alpha);
        let b = hemiball_sample(rng, alpha);
        let za = 1.0 - a.iter().map(|x| x * x).sum::<f64>();
        let zb = 1.0 - b.iter().map(|x| x * x).sum::<f64>();
        // -<z,w> with z = (a0 + i a1, a2), w = (b0 + i b1, b2)
        let p = Complex64::new(1.0 - a[0] * b[0] - a[1] * b[1] - a[2] * b[2], -(a[1] * b[0] - a[0] * b[1]));
        let ln = Complex64::new(0.5 * lambda * (za.ln() + zb.ln()), 0.0) - p.ln() * lambda;
        ln.exp().re
    });
    let scale = c * vol * vol;
    (scale * m, scale * se)
}

/// Monte-Carlo estimate of the real-segment pairing in `B^1`, `L = 2k`.
pub fn segment_monte_carlo(alpha: f64, k: u32, samples: usize, seed: u64) -> (f64, f64) {
    let lambda = 2.0 * k as f64;
    let c = ballseries::constants::c_ball(1, k).unwrap().value();
    let (m, se) = monte_carlo(samples, seed, |rng| {
        let s: f64 = rng.gen_range(-alpha..alpha);
        let t: f64 = rng.gen_range(-alpha..alpha);
        (0.5 * lambda * ((1.0 - s * s).ln() + (1.0 - t * t).ln()) - lambda * (1.0 - s * t).ln()).exp()
    });
    let scale = c * 4.0 * alpha * alpha;
    (scale * m, scale * se)
}
