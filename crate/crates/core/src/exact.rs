//! Exact integer linear algebra and polynomial routines over `Z`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Determinant of a square integer matrix by fraction-free elimination.
pub fn det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Integer polynomial, coefficients low degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZPoly(pub Vec<BigInt>);

impl ZPoly {
    pub fn from_i64(c: &[i64]) -> Self {
        let mut p = ZPoly(c.iter().map(|&x| BigInt::from(x)).collect());
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.0.len() > 1 && self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn lead(&self) -> &BigInt {
        self.0.last().expect("nonempty polynomial")
    }

    pub fn derivative(&self) -> ZPoly {
        if self.0.len() <= 1 {
            return ZPoly(vec![BigInt::zero()]);
        }
        ZPoly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn mul(&self, other: &ZPoly) -> ZPoly {
        let mut out = vec![BigInt::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        let mut p = ZPoly(out);
        p.trim();
        p
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.0
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + bigint_to_f64(c))
    }

    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.0.iter().map(|c| i64::try_from(c).ok()).collect()
    }

    /// Exact discriminant `(-1)^{n(n-1)/2} Res(f, f') / lc(f)`.
    pub fn discriminant(&self) -> BigInt {
        let n = self.degree();
        if n < 1 {
            return BigInt::zero();
        }
        if n == 1 {
            return BigInt::one();
        }
        let res = resultant(self, &self.derivative());
        let d = res / self.lead();
        if (n * (n - 1) / 2) % 2 == 1 {
            -d
        } else {
            d
        }
    }
}

pub fn bigint_to_f64(x: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// Resultant via the Sylvester determinant.
pub fn resultant(f: &ZPoly, g: &ZPoly) -> BigInt {
    let m = f.degree();
    let n = g.degree();
    let size = m + n;
    if size == 0 {
        return BigInt::one();
    }
    let mut s = vec![vec![BigInt::zero(); size]; size];
    for i in 0..n {
        for (j, c) in f.0.iter().rev().enumerate() {
            s[i][i + j] = c.clone();
        }
    }
    for i in 0..m {
        for (j, c) in g.0.iter().rev().enumerate() {
            s[n + i][i + j] = c.clone();
        }
    }
    det(s)
}

/// Lagrange interpolation through integer abscissae; `None` if a coefficient is not integral.
pub fn interpolate_integer(xs: &[i64], ys: &[BigInt]) -> Option<ZPoly> {
    let n = xs.len();
    let mut coeffs = vec![BigRational::zero(); n];
    for i in 0..n {
        // basis polynomial prod_{j != i} (x - x_j) / (x_i - x_j)
        let mut basis = vec![BigRational::one()];
        let mut denom = BigRational::one();
        for j in 0..n {
            if j == i {
                continue;
            }
            let xj = BigRational::from_integer(BigInt::from(xs[j]));
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (k, b) in basis.iter().enumerate() {
                next[k + 1] += b.clone();
                next[k] -= b * &xj;
            }
            basis = next;
            denom *= BigRational::from_integer(BigInt::from(xs[i] - xs[j]));
        }
        let scale = BigRational::from_integer(ys[i].clone()) / denom;
        for (k, b) in basis.iter().enumerate() {
            coeffs[k] += b * &scale;
        }
    }
    let ints: Option<Vec<BigInt>> = coeffs
        .into_iter()
        .map(|c| c.is_integer().then(|| c.to_integer()))
        .collect();
    let mut p = ZPoly(ints?);
    p.trim();
    Some(p)
}

/// Largest `k` with `k^2 | n`, together with `n / k^2`.
pub fn square_cofactor(n: &BigInt) -> (BigInt, BigInt) {
    let mut k = BigInt::one();
    let mut rest = n.abs();
    let mut d = BigInt::from(2);
    while &d * &d <= rest && d < BigInt::from(1_000_000) {
        let dd = &d * &d;
        while (&rest % &dd).is_zero() {
            rest /= &dd;
            k *= &d;
        }
        d += 1;
    }
    let signed = if n.is_negative() { -rest } else { rest };
    (k, signed)
}

pub fn is_perfect_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_small() {
        let m = vec![
            vec![BigInt::from(2), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(3)],
        ];
        assert_eq!(det(m), BigInt::from(5));
        let z = vec![
            vec![BigInt::from(0), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(0)],
        ];
        assert_eq!(det(z), BigInt::from(-1));
    }

    #[test]
    fn discriminants() {
        assert_eq!(ZPoly::from_i64(&[3, 0, 1]).discriminant(), BigInt::from(-12));
        assert_eq!(ZPoly::from_i64(&[2, 2, 1]).discriminant(), BigInt::from(-4));
        assert_eq!(ZPoly::from_i64(&[1, 1]).discriminant(), BigInt::from(1));
        assert_eq!(ZPoly::from_i64(&[1, 5, 4, 1]).discriminant(), BigInt::from(-23));
    }

    #[test]
    fn interpolation_roundtrip() {
        let p = ZPoly::from_i64(&[7, -3, 0, 2]);
        let xs: Vec<i64> = (0..4).collect();
        let ys: Vec<BigInt> = xs
            .iter()
            .map(|&x| BigInt::from(7 - 3 * x + 2 * x * x * x))
            .collect();
        assert_eq!(interpolate_integer(&xs, &ys), Some(p));
    }

    #[test]
    fn squares() {
        assert_eq!(
            square_cofactor(&BigInt::from(-12)),
            (BigInt::from(2), BigInt::from(-3))
        );
        assert!(is_perfect_square(&BigInt::from(49)));
    }
}
