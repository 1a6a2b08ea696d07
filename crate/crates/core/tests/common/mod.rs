//! Independent oracles shared by the integration tests. Nothing here calls
//! into the code paths it is used to check.

#![allow(dead_code)]

use singlet_frame::sampler::{OutcomeRng, SamplerConfig};
use singlet_frame::Direction;

/// Adaptive Simpson with Richardson correction.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    // Coarse magnitude estimate sets the absolute tolerance.
    let n = 64;
    let h = (b - a) / n as f64;
    let scale: f64 = (0..=n).map(|i| f(a + i as f64 * h).abs()).sum::<f64>() * h;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, rel_tol * scale.max(f64::MIN_POSITIVE), 40)
}

/// `∫₋₁¹ (1 − γ)^p (1 + γ)^m dγ` by quadrature, split at the integrand's peak.
pub fn d_by_quadrature(p: u32, m: u32) -> f64 {
    let f = |g: f64| (1.0 - g).powi(p as i32) * (1.0 + g).powi(m as i32);
    let peak = if p + m == 0 { 0.0 } else { (m as f64 - p as f64) / (p + m) as f64 };
    let mut total = 0.0;
    if peak > -1.0 {
        total += simpson(&f, -1.0, peak, 1e-13);
    }
    if peak < 1.0 {
        total += simpson(&f, peak, 1.0, 1e-13);
    }
    total
}

/// Terminating series `₂F₁(1, −n; c; −1) = Σₖ n!/(n−k)! / (c)ₖ`.
pub fn hyp2f1_one_minus_n(n: u32, c: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..n {
        term *= (n - k) as f64 / (c + k as f64);
        sum += term;
    }
    sum
}

/// The hypergeometric expression for `d(n₊, n₋)`.
pub fn d_by_hypergeometric(p: u32, m: u32) -> f64 {
    hyp2f1_one_minus_n(m, 2.0 + p as f64) / (1.0 + p as f64) + hyp2f1_one_minus_n(p, 2.0 + m as f64) / (1.0 + m as f64)
}

/// Mutual information as `H(A) + H(B) − H(A, B)` in bits.
pub fn mi_by_entropies(p: [[f64; 2]; 2]) -> f64 {
    let h = |xs: &[f64]| -> f64 { xs.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum() };
    let pa = [p[0][0] + p[0][1], p[1][0] + p[1][1]];
    let pb = [p[0][0] + p[1][0], p[0][1] + p[1][1]];
    h(&pa) + h(&pb) - h(&[p[0][0], p[0][1], p[1][0], p[1][1]])
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `∫ dΩ f` over the unit sphere on a Gauss–Legendre × uniform-azimuth grid.
pub fn sphere_integral(f: impl Fn(&Direction) -> f64, n_cos: usize, n_phi: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n_cos);
    let dphi = std::f64::consts::TAU / n_phi as f64;
    let mut total = 0.0;
    for (z, w) in nodes.iter().zip(&weights) {
        for k in 0..n_phi {
            total += w * dphi * f(&Direction::from_polar(z.acos(), k as f64 * dphi));
        }
    }
    total
}

pub fn test_rng(seed: u64) -> OutcomeRng {
    SamplerConfig::new(seed, 0xACCE_0000).rng()
}

/// Uniform direction on the sphere.
pub fn random_direction(rng: &mut OutcomeRng) -> Direction {
    let z = 2.0 * rng.uniform() - 1.0;
    Direction::from_polar(z.acos(), std::f64::consts::TAU * rng.uniform())
}

/// Uniform integer in `0..=max`.
pub fn random_count(rng: &mut OutcomeRng, max: u64) -> u64 {
    ((rng.uniform() * (max + 1) as f64) as u64).min(max)
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
