//! The totally real field `L = Q(cos 2pi/p, cos 2pi/q)` with a power integral basis.
//!
//! Elements are exact integer coordinate vectors in `1, u, ..., u^(mu-1)` with
//! `u = 2cos(2pi/M)`. Each real place is identified by an integer `k` coprime
//! to the conductor; the place sends `2cos(2pi a/b)` to `2cos(2pi k a/b)`.

use crate::dense::{self, Matrix};
use crate::exact::{self, ZPoly};
use crate::numtheory::{divisors, factorize, gcd, lcm, prime_power_base, totient};
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::One;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("no power integral basis found for ({p},{q})")]
    NoPowerBasisFound { p: u32, q: u32 },
    #[error("orders out of range: ({p},{q})")]
    OrdersOutOfRange { p: u32, q: u32 },
    #[error("certification failed: {0}")]
    CertificationFailed(String),
    #[error("ill-conditioned recognition (residual {0:e})")]
    IllConditioned(f64),
}

/// Exact integer coordinates in the power basis of `u`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElement(pub Vec<i64>);

impl FieldElement {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

/// Degree `[L:Q]` for orders `p, q`.
pub fn degree_of(p: u32, q: u32) -> usize {
    let n = lcm(p as u64, q as u64);
    let phi = totient(n) as usize;
    if gcd(p as u64, q as u64) > 2 {
        phi / 2
    } else {
        phi / 4
    }
}

fn delta_n(n: u32) -> f64 {
    match prime_power_base(n as u64) {
        Some(prime) => (prime as f64).powf(2.0 / totient(n as u64) as f64),
        None => 1.0,
    }
}

/// `delta_p^(2/phi(p)) * delta_q^(2/phi(q))`, with `delta_n` the prime when `n` is a prime power.
pub fn delta_pq(p: u32, q: u32) -> f64 {
    delta_n(p) * delta_n(q)
}

/// Exact prime-power factorization of a discriminant.
#[derive(Clone, Debug, PartialEq)]
pub struct Discriminant(pub Vec<(u64, i64)>);

impl Discriminant {
    pub fn value(&self) -> BigInt {
        self.0.iter().fold(BigInt::one(), |acc, &(p, e)| {
            acc * BigInt::from(p).pow(e as u32)
        })
    }

    pub fn ln(&self) -> f64 {
        self.0.iter().map(|&(p, e)| e as f64 * (p as f64).ln()).sum()
    }

    fn combine(a: &Discriminant, ea: i64, b: &Discriminant, eb: i64) -> Discriminant {
        let mut map = std::collections::BTreeMap::new();
        for &(p, e) in &a.0 {
            *map.entry(p).or_insert(0) += e * ea;
        }
        for &(p, e) in &b.0 {
            *map.entry(p).or_insert(0) += e * eb;
        }
        Discriminant(map.into_iter().filter(|&(_, e)| e != 0).collect())
    }
}

/// Discriminant of `Q(cos 2pi/M)` from the closed form over prime divisors of `M`.
pub fn cyclotomic_real_discriminant(m: u32) -> Discriminant {
    let m = m as u64;
    if m <= 2 {
        return Discriminant(vec![]);
    }
    let fac = factorize(m);
    let phi = totient(m) as i64;
    let odd: Vec<u64> = fac.iter().map(|f| f.0).filter(|&p| p != 2).collect();
    let two_exp = fac.iter().find(|f| f.0 == 2).map_or(0, |f| f.1);
    let halve_odd = odd.len() == 1 && two_exp <= 1;
    let halve_two = odd.is_empty() && two_exp >= 2;
    let exps = fac
        .iter()
        .map(|&(p, a)| {
            let mut e = Ratio::new(a as i64 * phi, 2) - Ratio::new(phi, 2 * (p as i64) - 2);
            if halve_odd && p != 2 {
                e -= Ratio::new(1, 2);
            }
            if halve_two && p == 2 {
                e -= Ratio::from_integer(1);
            }
            debug_assert!(e.is_integer(), "non-integral exponent for M={m}");
            (p, e.to_integer())
        })
        .filter(|&(_, e)| e != 0)
        .collect();
    Discriminant(exps)
}

/// Discriminant of `L`, composing the two real cyclotomic fields when `gcd(p,q) | 2`.
pub fn field_discriminant(p: u32, q: u32) -> Discriminant {
    if gcd(p as u64, q as u64) > 2 {
        cyclotomic_real_discriminant(lcm(p as u64, q as u64) as u32)
    } else {
        let dp = cyclotomic_real_discriminant(p);
        let dq = cyclotomic_real_discriminant(q);
        let ep = totient(q as u64) as i64 / 2;
        let eq = totient(p as u64) as i64 / 2;
        Discriminant::combine(&dp, ep, &dq, eq)
    }
}

#[derive(Clone, Debug)]
pub struct FieldSpec {
    pub p: u32,
    pub q: u32,
    /// Conductor `M` of the generator `u = 2cos(2pi/M)`.
    pub conductor: u32,
    pub degree: usize,
    /// Monic minimal polynomial of `u`, low degree first.
    pub minpoly_u: Vec<i64>,
    /// `k` labelling each real place, identity first.
    pub places: Vec<u64>,
    /// Images of `u`, identity first, the rest increasing.
    pub embeddings: Vec<f64>,
    pub beta1: FieldElement,
    pub beta2: FieldElement,
    pub delta_pq: f64,
    pub disc: Discriminant,
    vander: Matrix,
    vander_inv: Matrix,
}

#[derive(Serialize)]
struct FieldSpecJson<'a> {
    p: u32,
    q: u32,
    #[serde(rename = "M")]
    m: u32,
    mu: usize,
    minpoly_u: &'a [i64],
    beta1: &'a [i64],
    beta2: &'a [i64],
}

fn place_images(p: u32, q: u32, m: u32) -> Option<Vec<(u64, f64)>> {
    let n = 2 * lcm(lcm(p as u64, q as u64), m as u64);
    let mut seen: Vec<((i64, i64), f64, u64)> = Vec::new();
    for k in 1..n {
        if gcd(k, n) != 1 {
            continue;
        }
        let key = (
            (cos_turn(k, p as u64) * 1e9).round() as i64,
            (cos_turn(k, q as u64) * 1e9).round() as i64,
        );
        let u = 2.0 * cos_turn(k, m as u64);
        match seen.iter().find(|s| s.0 == key) {
            Some(s) if (s.1 - u).abs() > 1e-9 => return None,
            Some(_) => {}
            None => seen.push((key, u, k)),
        }
    }
    Some(seen.into_iter().map(|s| (s.2, s.1)).collect())
}

/// `cos(2 pi k / n)` with the argument reduced first.
pub fn cos_turn(k: u64, n: u64) -> f64 {
    (2.0 * PI * ((k % n) as f64) / n as f64).cos()
}

impl FieldSpec {
    /// Builds `L` for `6 <= q <= p <= 120`, preferring the conductor `lcm(p,q)`.
    pub fn new(p: u32, q: u32) -> Result<Self, FieldError> {
        if !(2..=120).contains(&q) || !(q..=120).contains(&p) {
            return Err(FieldError::OrdersOutOfRange { p, q });
        }
        let mu = degree_of(p, q);
        let l = lcm(p as u64, q as u64);
        let mut cands = vec![l];
        cands.extend(divisors(2 * l).into_iter().filter(|&d| d != l));
        for m in cands {
            if m <= 2 || totient(m) as usize / 2 != mu {
                continue;
            }
            if let Some(spec) = Self::try_conductor(p, q, m as u32, mu)? {
                return Ok(spec);
            }
        }
        Err(FieldError::NoPowerBasisFound { p, q })
    }

    fn try_conductor(p: u32, q: u32, m: u32, mu: usize) -> Result<Option<Self>, FieldError> {
        let Some(mut imgs) = place_images(p, q, m) else {
            return Ok(None);
        };
        if imgs.len() != mu {
            return Ok(None);
        }
        let ident = imgs.remove(imgs.iter().position(|x| x.0 == 1).expect("identity place"));
        imgs.sort_by(|a, b| a.1.total_cmp(&b.1));
        imgs.insert(0, ident);
        if imgs.windows(2).skip(1).any(|w| (w[1].1 - w[0].1).abs() < 1e-9) {
            return Ok(None);
        }
        let embeddings: Vec<f64> = imgs.iter().map(|x| x.1).collect();
        let places: Vec<u64> = imgs.iter().map(|x| x.0).collect();
        let minpoly_u = Self::build_minpoly(m)?;
        let vander: Matrix = embeddings
            .iter()
            .map(|&u| (0..mu).map(|j| u.powi(j as i32)).collect())
            .collect();
        let Some(vander_inv) = dense::inverse(&vander) else {
            return Ok(None);
        };
        let mut spec = FieldSpec {
            p,
            q,
            conductor: m,
            degree: mu,
            minpoly_u,
            places,
            embeddings,
            beta1: FieldElement(vec![0; mu]),
            beta2: FieldElement(vec![0; mu]),
            delta_pq: delta_pq(p, q),
            disc: field_discriminant(p, q),
            vander,
            vander_inv,
        };
        for (i, &u) in spec.embeddings.iter().enumerate() {
            let r = spec.minpoly_u.iter().rev().fold(0.0, |a, &c| a * u + c as f64);
            if r.abs() > 2f64.powi(-40) * (1.0 + u.abs()).powi(mu as i32) {
                return Err(FieldError::CertificationFailed(format!(
                    "place {i} is not a root of the minimal polynomial"
                )));
            }
        }
        let (Some(c1), Some(c2)) = (spec.cos_element(1, p as u64), spec.cos_element(1, q as u64))
        else {
            return Ok(None);
        };
        let two = spec.from_int(2);
        spec.beta1 = spec.sub(&c1, &two);
        spec.beta2 = spec.sub(&c2, &two);
        Ok(Some(spec))
    }

    fn build_minpoly(m: u32) -> Result<Vec<i64>, FieldError> {
        let mut coeffs = vec![1.0f64];
        for j in 1..m.div_ceil(2) {
            if gcd(j as u64, m as u64) != 1 {
                continue;
            }
            let r = 2.0 * cos_turn(j as u64, m as u64);
            let mut next = vec![0.0; coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            coeffs = next;
        }
        let rounded: Vec<i64> = coeffs.iter().map(|c| c.round() as i64).collect();
        if coeffs
            .iter()
            .zip(&rounded)
            .any(|(c, r)| (c - *r as f64).abs() > 1e-6)
        {
            return Err(FieldError::CertificationFailed(format!(
                "minimal polynomial for M={m} did not round cleanly"
            )));
        }
        Ok(rounded)
    }

    pub fn mu(&self) -> usize {
        self.degree
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(FieldSpecJson {
            p: self.p,
            q: self.q,
            m: self.conductor,
            mu: self.degree,
            minpoly_u: &self.minpoly_u,
            beta1: &self.beta1.0,
            beta2: &self.beta2.0,
        })
        .expect("serializable")
    }

    /// `sigma_i(u^j)` as a matrix, rows indexed by place.
    pub fn vandermonde(&self) -> &Matrix {
        &self.vander
    }

    pub fn vandermonde_inverse(&self) -> &Matrix {
        &self.vander_inv
    }

    /// Images of a cyclotomic expression: `f(k)` for every place label `k`.
    pub fn conjugates(&self, f: impl Fn(u64) -> f64) -> Vec<f64> {
        self.places.iter().map(|&k| f(k)).collect()
    }

    pub fn from_int(&self, n: i64) -> FieldElement {
        let mut c = vec![0; self.degree];
        c[0] = n;
        FieldElement(c)
    }

    pub fn one(&self) -> FieldElement {
        self.from_int(1)
    }

    pub fn zero(&self) -> FieldElement {
        self.from_int(0)
    }

    pub fn gen_u(&self) -> FieldElement {
        let mut c = vec![0; self.degree];
        if self.degree > 1 {
            c[1] = 1;
            FieldElement(c)
        } else {
            // u is rational when mu = 1
            FieldElement(vec![self.embeddings[0].round() as i64])
        }
    }

    pub fn add(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        FieldElement(x.0.iter().zip(&y.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        FieldElement(x.0.iter().zip(&y.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self, x: &FieldElement) -> FieldElement {
        FieldElement(x.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, x: &FieldElement, k: i64) -> FieldElement {
        FieldElement(x.0.iter().map(|a| a * k).collect())
    }

    /// Exact product reduced modulo the minimal polynomial of `u`.
    ///
    /// Panics if a coordinate leaves the `i64` range.
    pub fn mul(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let mu = self.degree;
        let mut prod = vec![0i128; 2 * mu - 1];
        for (i, &a) in x.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in y.0.iter().enumerate() {
                prod[i + j] += a as i128 * b as i128;
            }
        }
        for d in (mu..prod.len()).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for k in 0..mu {
                prod[d - mu + k] -= c * self.minpoly_u[k] as i128;
            }
        }
        FieldElement(
            prod[..mu]
                .iter()
                .map(|&c| i64::try_from(c).expect("field coordinate overflow"))
                .collect(),
        )
    }

    pub fn pow(&self, x: &FieldElement, e: u32) -> FieldElement {
        (0..e).fold(self.one(), |acc, _| self.mul(&acc, x))
    }

    /// `sigma_i(x)` for place `i`.
    pub fn embed(&self, x: &FieldElement, i: usize) -> f64 {
        let u = self.embeddings[i];
        x.0.iter().rev().fold(0.0, |acc, &c| acc * u + c as f64)
    }

    pub fn embed_all(&self, x: &FieldElement) -> Vec<f64> {
        (0..self.degree).map(|i| self.embed(x, i)).collect()
    }

    /// Absolute norm as an exact integer: determinant of multiplication by `x`.
    pub fn norm(&self, x: &FieldElement) -> BigInt {
        let mu = self.degree;
        let mut basis = self.one();
        let mut cols = Vec::with_capacity(mu);
        let u = self.gen_u();
        for _ in 0..mu {
            cols.push(self.mul(x, &basis));
            basis = self.mul(&basis, &u);
        }
        let m: Vec<Vec<BigInt>> = (0..mu)
            .map(|r| (0..mu).map(|c| BigInt::from(cols[c].0[r])).collect())
            .collect();
        exact::det(m)
    }

    /// `x / d` when it is an algebraic integer of `L`, certified by multiplying back.
    pub fn divide(&self, x: &FieldElement, d: &FieldElement) -> Result<Option<FieldElement>, FieldError> {
        if d.is_zero() {
            return Ok(None);
        }
        let vals: Vec<f64> = (0..self.degree).map(|i| self.embed(x, i) / self.embed(d, i)).collect();
        let tol = 1e-6 * (1.0 + vals.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        Ok(self.recognize(&vals, tol)?.filter(|q| &self.mul(q, d) == x))
    }

    /// Exact discriminant of the power basis `1, u, ..., u^(mu-1)`.
    pub fn power_basis_discriminant(&self) -> BigInt {
        ZPoly::from_i64(&self.minpoly_u).discriminant()
    }

    /// Solves for integer coordinates matching `values` at every place within `tol`.
    pub fn recognize(&self, values: &[f64], tol: f64) -> Result<Option<FieldElement>, FieldError> {
        let m = dense::mat_vec(&self.vander_inv, values);
        let back = dense::mat_vec(&self.vander, &m);
        let scale = 1.0 + values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let resid = back
            .iter()
            .zip(values)
            .fold(0.0f64, |a, (b, v)| a.max((b - v).abs()));
        if resid > 1e-6 * scale {
            return Err(FieldError::IllConditioned(resid));
        }
        if m.iter().any(|c| c.abs() > 9.0e15) {
            return Ok(None);
        }
        let x = FieldElement(m.iter().map(|c| c.round() as i64).collect());
        let ok = self
            .embed_all(&x)
            .iter()
            .zip(values)
            .all(|(a, b)| (a - b).abs() <= tol);
        Ok(ok.then_some(x))
    }

    /// The element with images `2cos(2 pi k a / b)`, certified by the exact identity `V_b(x) = 2`.
    pub fn cos_element(&self, a: u64, b: u64) -> Option<FieldElement> {
        let vals = self.conjugates(|k| 2.0 * cos_turn(k * a, b));
        let x = self.recognize(&vals, 1e-8).ok().flatten()?;
        let mut prev = self.from_int(2);
        let mut cur = x.clone();
        for _ in 1..b {
            let next = self.sub(&self.mul(&x, &cur), &prev);
            prev = cur;
            cur = next;
        }
        (cur == self.from_int(2)).then_some(x)
    }

    /// `4 sin^2(pi/n) = 2 - 2cos(2pi/n)`.
    pub fn four_sin_sq(&self, n: u64) -> Option<FieldElement> {
        let c = self.cos_element(1, n)?;
        Some(self.sub(&self.from_int(2), &c))
    }

    /// `-beta1`, a unit when `p` is not a prime power.
    pub fn unit_scale(&self) -> Option<FieldElement> {
        if prime_power_base(self.p as u64).is_some() {
            return None;
        }
        Some(self.neg(&self.beta1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn small_fields() {
        let f = FieldSpec::new(6, 6).unwrap();
        assert_eq!(f.degree, 1);
        let f = FieldSpec::new(8, 6).unwrap();
        assert_eq!((f.degree, f.conductor), (2, 8));
        assert!((f.embeddings[0] - 2f64.sqrt()).abs() < 1e-12);
        let f = FieldSpec::new(7, 7).unwrap();
        assert_eq!(f.minpoly_u, vec![-1, -2, 1, 1]);
    }

    #[test]
    fn arithmetic_examples() {
        let f = FieldSpec::new(8, 6).unwrap();
        let a = FieldElement(vec![3, -1]);
        let b = FieldElement(vec![3, 1]);
        assert_eq!(f.mul(&a, &b), f.from_int(7));
        assert_eq!(f.norm(&a), BigInt::from(7));
        assert_eq!(f.norm(&f.zero()), BigInt::zero());
        let g = FieldSpec::new(7, 7).unwrap();
        let u = g.gen_u();
        assert_eq!(g.pow(&u, 3), FieldElement(vec![1, 2, -1]));
    }

    #[test]
    fn discriminant_closed_form() {
        for (m, d) in [(5u32, 5i64), (7, 49), (12, 12), (8, 8), (9, 81), (11, 14641)] {
            assert_eq!(cyclotomic_real_discriminant(m).value(), BigInt::from(d), "M={m}");
        }
    }

    #[test]
    fn delta_values() {
        assert_eq!(delta_pq(6, 6), 1.0);
        assert!((delta_pq(8, 8) - 2.0).abs() < 1e-12);
        assert!((delta_pq(7, 6) - 7f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn recognize_examples() {
        let f = FieldSpec::new(8, 6).unwrap();
        let s = 2f64.sqrt();
        assert_eq!(f.recognize(&[s, -s], 1e-6).unwrap(), Some(FieldElement(vec![0, 1])));
        assert_eq!(
            f.recognize(&[0.999999999, 1.000000001], 1e-6).unwrap(),
            Some(FieldElement(vec![1, 0]))
        );
        assert_eq!(f.recognize(&[0.5, 0.7], 1e-9).unwrap(), None);
    }

    #[test]
    fn unit_scale_cases() {
        let f = FieldSpec::new(42, 42).unwrap();
        let v = f.unit_scale().unwrap();
        assert_eq!(f.norm(&v).magnitude(), &num_bigint::BigUint::from(1u32));
        assert!(FieldSpec::new(8, 8).unwrap().unit_scale().is_none());
        let f = FieldSpec::new(12, 12).unwrap();
        assert_eq!(f.norm(&f.unit_scale().unwrap()).magnitude(), &num_bigint::BigUint::from(1u32));
    }
}
