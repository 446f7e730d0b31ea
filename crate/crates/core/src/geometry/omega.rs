//! The contour `Omega_{p,q}` bounding non-free parameters, and bounds derived from it.

use num_complex::Complex64;
use std::f64::consts::PI;

/// `cos(pi/p) cos(pi/q)` and `sin(pi/p) sin(pi/q)`.
pub fn cs(p: u32, q: u32) -> (f64, f64) {
    let (a, b) = (PI / p as f64, PI / q as f64);
    (a.cos() * b.cos(), a.sin() * b.sin())
}

pub fn omega_point(p: u32, q: u32, t: f64) -> Complex64 {
    let (c, s) = cs(p, q);
    let tc = 1.0 + t * c;
    let re = 4.0 * (2.0 * t * t - 1.0) * tc * tc - 4.0 * t * t * s * s;
    let im = -8.0 * t * (1.0 - t * t).max(0.0).sqrt() * tc * (tc * tc - s * s).max(0.0).sqrt();
    Complex64::new(re, im)
}

/// Maximum of `f` on `[0,1]`: grid of `n` cells, then golden-section refinement.
pub fn maximize(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let n = n.max(2);
    let (mut best_i, mut best) = (0, f(0.0));
    for i in 1..=n {
        let v = f(i as f64 / n as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let h = 1.0 / n as f64;
    let (mut lo, mut hi) = (((best_i as f64 - 1.0) * h).max(0.0), ((best_i as f64 + 1.0) * h).min(1.0));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if f(x1) >= f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    best.max(f(0.5 * (lo + hi)))
}

#[derive(Clone, Debug)]
pub struct OmegaBounds {
    pub p: u32,
    pub q: u32,
    pub re_max: f64,
    pub re_min: f64,
    pub abs_max: f64,
    pub im_max: f64,
    pub shift_max: f64,
    /// Upper half of the contour, `t` from 0 to 1.
    pub contour: Vec<Complex64>,
}

impl OmegaBounds {
    pub fn new(p: u32, q: u32, t_grid: usize, samples: usize) -> Self {
        let (a, b) = (PI / p as f64, PI / q as f64);
        let re_max = 4.0 * (a.cos() + b.cos()).powi(2);
        let abs_max = if q == 2 { 4.0 } else { re_max };
        let re_min = -maximize(|t| -omega_point(p, q, t).re, t_grid);
        let im_max = maximize(|t| omega_point(p, q, t).im.abs(), t_grid);
        let (c, _) = cs(p, q);
        let samples = samples.max(8);
        // cosine spacing clusters points near both endpoints
        let contour = (0..=samples)
            .map(|k| {
                let t = 0.5 * (1.0 - (PI * k as f64 / samples as f64).cos());
                omega_point(p, q, t)
            })
            .collect();
        OmegaBounds {
            p,
            q,
            re_max,
            re_min,
            abs_max,
            im_max,
            shift_max: 4.0 * (1.0 + c).powi(2),
            contour,
        }
    }

    /// Closed polygon: the sampled contour followed by its conjugate reflection.
    pub fn polygon(&self) -> Vec<Complex64> {
        let mut poly = self.contour.clone();
        poly.extend(self.contour.iter().rev().skip(1).map(|z| z.conj()));
        poly
    }

    /// Point-in-region test with an inclusion margin toward "inside".
    pub fn contains(&self, z: Complex64, margin: f64) -> bool {
        let poly = self.polygon();
        let mut inside = false;
        let mut near = false;
        for w in poly.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a.im > z.im) != (b.im > z.im) {
                let x = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
                if z.re < x {
                    inside = !inside;
                }
            }
            if segment_distance(z, a, b) <= margin {
                near = true;
            }
        }
        inside || near
    }
}

fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

pub fn inside_contour(bounds: &OmegaBounds, gamma: Complex64) -> bool {
    bounds.contains(gamma, 1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        let z = omega_point(6, 6, 1.0);
        assert!((z.re - 12.0).abs() < 1e-12 && z.im.abs() < 1e-12);
        let z = omega_point(6, 6, 0.0);
        assert!((z.re + 4.0).abs() < 1e-12 && z.im == 0.0);
    }

    #[test]
    fn bounds_examples() {
        let b = OmegaBounds::new(7, 7, 100_000, 4096);
        assert!((b.re_min + 5.0914).abs() < 1e-4, "{}", b.re_min);
        let b = OmegaBounds::new(6, 6, 100_000, 4096);
        assert!((b.abs_max - 12.0).abs() < 1e-12);
        assert_eq!(OmegaBounds::new(9, 2, 1000, 64).abs_max, 4.0);
    }

    #[test]
    fn containment() {
        let b = OmegaBounds::new(6, 6, 10_000, 4096);
        assert!(inside_contour(&b, Complex64::new(-1.0, 1.0)));
        assert!(!inside_contour(&b, Complex64::new(20.0, 0.0)));
        let b = OmegaBounds::new(10, 10, 10_000, 4096);
        assert!(inside_contour(&b, Complex64::new(8.794158, 4.828433)));
    }
}
