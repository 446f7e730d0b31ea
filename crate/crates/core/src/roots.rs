//! Simultaneous root finding for small dense polynomials.

use num_complex::Complex64;

const MAX_ITER: usize = 500;

/// Horner evaluation of `p` and `p'`, coefficients low degree first.
pub fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn eval_real(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// All complex roots of a polynomial with nonzero leading coefficient, by Aberth iteration
/// followed by Newton polishing.
pub fn roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    if n == 1 {
        return vec![-monic[0]];
    }
    let radius = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    for _ in 0..MAX_ITER {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = eval_with_derivative(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulse: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulse);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval_with_derivative(&monic, *zi);
            let step = p / dp;
            if !step.is_finite() || step.norm() > 1e-6 * (1.0 + zi.norm()) {
                break;
            }
            *zi -= step;
        }
    }
    z
}

pub fn real_poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    roots(&c)
}

/// Largest `|p(z)| / (1 + |z|)^deg` over the given roots.
pub fn max_residual(coeffs: &[Complex64], zs: &[Complex64]) -> f64 {
    let n = coeffs.len().saturating_sub(1) as i32;
    zs.iter()
        .map(|&z| eval_with_derivative(coeffs, z).0.norm() / (1.0 + z.norm()).powi(n))
        .fold(0.0, f64::max)
}

/// Monic polynomial with the given roots, low degree first.
pub fn from_roots(zs: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for &z in zs {
        let mut next = vec![Complex64::new(0.0, 0.0); out.len() + 1];
        for (k, &c) in out.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * z;
        }
        out = next;
    }
    out
}
