//! Möbius transformations, the normalized generator pair and isometric circles.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("gamma = 0 gives a reducible pair")]
    DegenerateGamma,
    #[error("lower-left entry vanishes; no isometric circle")]
    ParabolicFixedForm,
}

/// A 2x2 complex matrix acting by linear fractional maps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mobius {
    pub const IDENTITY: Mobius = Mobius {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        c: Complex64::new(0.0, 0.0),
        d: Complex64::new(1.0, 0.0),
    };

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mobius { a, b, c, d }
    }

    pub fn compose(&self, o: &Mobius) -> Mobius {
        Mobius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Mobius {
        let k = self.det().inv();
        Mobius {
            a: self.d * k,
            b: -self.b * k,
            c: -self.c * k,
            d: self.a * k,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    pub fn pow(&self, n: u32) -> Mobius {
        (0..n).fold(Mobius::IDENTITY, |acc, _| acc.compose(self))
    }

    /// Image of a finite point; `None` at the pole.
    pub fn apply(&self, z: Complex64) -> Option<Complex64> {
        let den = self.c * z + self.d;
        (den.norm() > 1e-300).then(|| (self.a * z + self.b) / den)
    }

    /// Image of infinity; `None` when infinity is fixed.
    pub fn image_of_infinity(&self) -> Option<Complex64> {
        (self.c.norm() > 1e-300).then(|| self.a / self.c)
    }

    pub fn pole(&self) -> Option<Complex64> {
        (self.c.norm() > 1e-300).then(|| -self.d / self.c)
    }

    /// `tr[A,B] - 2`.
    pub fn commutator_parameter(a: &Mobius, b: &Mobius) -> Complex64 {
        let k = a.compose(b).compose(&a.inverse()).compose(&b.inverse());
        k.trace() - 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

/// `I(g)` and `I(g^-1)` for a matrix of determinant one.
pub fn isometric_circles(m: &Mobius) -> Result<(Circle, Circle), GeometryError> {
    if m.c.norm() < 1e-14 {
        return Err(GeometryError::ParabolicFixedForm);
    }
    let radius = 1.0 / m.c.norm();
    Ok((
        Circle { center: -m.d / m.c, radius },
        Circle { center: m.a / m.c, radius },
    ))
}

/// Normalized generators of orders `p` and `q` with parameter `gamma`.
#[derive(Clone, Copy, Debug)]
pub struct MobiusPair {
    pub f: Mobius,
    pub g: Mobius,
    pub w: Complex64,
    pub p: u32,
    pub q: u32,
}

pub fn elliptic(order: u32) -> Mobius {
    let t = PI / order as f64;
    let (c, s) = (Complex64::new(t.cos(), 0.0), Complex64::new(0.0, t.sin()));
    Mobius::new(c, s, s, c)
}

/// Solves `gamma = sin^2(pi/p) sin^2(pi/q) (w - 1/w)^2` with `|w| <= 1`, `Re w >= 0`.
pub fn normalize_generators(p: u32, q: u32, gamma: Complex64) -> Result<MobiusPair, GeometryError> {
    if gamma.norm() < 1e-14 {
        return Err(GeometryError::DegenerateGamma);
    }
    let (sp, sq) = ((PI / p as f64).sin(), (PI / q as f64).sin());
    let h = (gamma / (sp * sp * sq * sq)).sqrt();
    let mut roots = Vec::with_capacity(4);
    for hh in [h, -h] {
        let disc = (hh * hh + 4.0).sqrt();
        roots.push((hh + disc) / 2.0);
        roots.push((hh - disc) / 2.0);
    }
    let w = roots
        .into_iter()
        .filter(|w| w.norm() <= 1.0 + 1e-12 && w.re >= -1e-12)
        .min_by(|x, y| (-x.re).total_cmp(&(-y.re)).then(x.im.total_cmp(&y.im)))
        .ok_or(GeometryError::DegenerateGamma)?;
    if (w - w.inv()).norm() < 1e-14 {
        return Err(GeometryError::DegenerateGamma);
    }
    let t = PI / q as f64;
    let i = Complex64::i();
    let g = Mobius::new(
        Complex64::new(t.cos(), 0.0),
        i * w * t.sin(),
        i * w.inv() * t.sin(),
        Complex64::new(t.cos(), 0.0),
    );
    Ok(MobiusPair { f: elliptic(p), g, w, p, q })
}

impl MobiusPair {
    pub fn gamma(&self) -> Complex64 {
        Mobius::commutator_parameter(&self.f, &self.g)
    }

    /// `lambda = tr f tr g tr fg`.
    pub fn trace_product(&self) -> Complex64 {
        self.f.trace() * self.g.trace() * self.f.compose(&self.g).trace()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        for gamma in [Complex64::new(-4.0, 4.0), Complex64::new(-1.0, 1.0), Complex64::new(3.0, 8.0)] {
            let pair = normalize_generators(6, 6, gamma).unwrap();
            assert!((pair.gamma() - gamma).norm() < 1e-9);
            assert!(pair.w.norm() <= 1.0 + 1e-12 && pair.w.re >= -1e-12);
            assert!((pair.f.trace().re - 2.0 * (PI / 6.0).cos()).abs() < 1e-12);
        }
        assert_eq!(
            normalize_generators(6, 6, Complex64::new(0.0, 0.0)).unwrap_err(),
            GeometryError::DegenerateGamma
        );
    }

    #[test]
    fn circles() {
        let m = Mobius::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        let (a, b) = isometric_circles(&m).unwrap();
        assert!(a.center.norm() < 1e-15 && b.center.norm() < 1e-15);
        assert_eq!((a.radius, b.radius), (1.0, 1.0));
        assert!(isometric_circles(&Mobius::IDENTITY).is_err());
    }
}
