//! Arithmetic data of surviving parameters and comparison with the reference group table.

use crate::coeffsearch::{DeltaChoice, Route};
use crate::exact::{is_perfect_square, ZPoly};
use crate::field::{FieldElement, FieldError, FieldSpec};
use crate::geometry::FreeOutcome;
use crate::polyfilter::{compose_gamma2p, divide_exact, poly_mul, GammaCandidate, REAL_TOL};
use crate::roots;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Printed parameters carry six decimals.
pub const GAMMA_MATCH_TOL: f64 = 1e-5;
pub const RESIDUAL_TOL: f64 = 1e-4;
/// Conjugate parameters closer than this are one root.
const CLUSTER_TOL: f64 = 1e-7;

const GOLDEN_JSON: &str = include_str!("../data/golden.json");

#[derive(Debug, Error)]
pub enum InvariantError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("certification failed: {0}")]
    CertificationFailed(String),
    #[error("cannot parse coefficient {0:?}")]
    BadCoefficient(String),
    #[error("sqrt({d}) is not in the field of orders ({p},{q})")]
    NotInField { d: i64, p: u32, q: u32 },
    #[error("unit of the route is not in the field")]
    UnitNotInField,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenRow {
    pub index: usize,
    pub p: u32,
    pub q: u32,
    pub gamma: [f64; 2],
    /// Coefficients over `L`, low degree first, leading one included.
    pub minpoly: Vec<String>,
    pub disc: i64,
    pub description: String,
    #[serde(default)]
    pub nielsen_partner: Option<usize>,
}

#[derive(Deserialize)]
struct GoldenFile {
    rows: Vec<GoldenRow>,
}

pub fn golden_rows() -> Vec<GoldenRow> {
    serde_json::from_str::<GoldenFile>(GOLDEN_JSON)
        .expect("bundled golden table is valid")
        .rows
}

/// The element of `L` whose identity image is `+sqrt(d)`.
pub fn sqrt_element(field: &FieldSpec, d: i64) -> Result<FieldElement, InvariantError> {
    let missing = InvariantError::NotInField { d, p: field.p, q: field.q };
    let x = match d {
        2 => field.cos_element(1, 8),
        3 => field.cos_element(1, 12),
        5 => field.cos_element(1, 5).map(|c| field.add(&field.scale(&c, 2), &field.one())),
        _ => None,
    }
    .ok_or(missing)?;
    (field.mul(&x, &x) == field.from_int(d)).then_some(x).ok_or(InvariantError::NotInField {
        d,
        p: field.p,
        q: field.q,
    })
}

/// Parses `a`, `a+bsqrtd`, `a-sqrtd`, `-bsqrtd` into an element of `L`.
pub fn parse_coefficient(field: &FieldSpec, s: &str) -> Result<FieldElement, InvariantError> {
    let bad = || InvariantError::BadCoefficient(s.to_string());
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(pos) = t.find("sqrt") else {
        return Ok(field.from_int(t.parse().map_err(|_| bad())?));
    };
    let d: i64 = t[pos + 4..].parse().map_err(|_| bad())?;
    let head = &t[..pos];
    let (rational, coef) = match head.rfind(['+', '-']) {
        Some(i) if i > 0 => (&head[..i], &head[i..]),
        _ => ("0", head),
    };
    let a: i64 = rational.parse().map_err(|_| bad())?;
    let b: i64 = match coef {
        "" | "+" => 1,
        "-" => -1,
        c => c.parse().map_err(|_| bad())?,
    };
    let root = sqrt_element(field, d)?;
    Ok(field.add(&field.from_int(a), &field.scale(&root, b)))
}

impl GoldenRow {
    pub fn gamma(&self) -> Complex64 {
        Complex64::new(self.gamma[0], self.gamma[1])
    }

    pub fn is_real(&self) -> bool {
        self.gamma[1].abs() <= REAL_TOL
    }

    pub fn minpoly_in(&self, field: &FieldSpec) -> Result<Vec<FieldElement>, InvariantError> {
        self.minpoly.iter().map(|s| parse_coefficient(field, s)).collect()
    }

    /// `|m(gamma)|` for the printed polynomial at the printed parameter.
    pub fn residual(&self) -> Result<f64, InvariantError> {
        let field = FieldSpec::new(self.p, self.q)?;
        let coeffs: Vec<Complex64> = self
            .minpoly_in(&field)?
            .iter()
            .map(|c| Complex64::new(field.embed(c, 0), 0.0))
            .collect();
        Ok(roots::eval_with_derivative(&coeffs, self.gamma()).0.norm())
    }
}

/// Groups of values that agree to `CLUSTER_TOL`, one representative each.
fn distinct(zs: Vec<Complex64>) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::new();
    for z in zs {
        if !out.iter().any(|w| (w - z).norm() <= CLUSTER_TOL * (1.0 + z.norm())) {
            out.push(z);
        }
    }
    out
}

fn parameter_conjugates(field: &FieldSpec, delta: &DeltaChoice, cand: &GammaCandidate) -> Result<Vec<Vec<Complex64>>, InvariantError> {
    let unit = match &delta.unit {
        Some(u) => Some(u.element(field).ok_or(InvariantError::UnitNotInField)?),
        None => None,
    };
    (0..field.mu())
        .map(|i| {
            let scale = unit.as_ref().map_or(1.0, |u| field.embed(u, i));
            let beta = field.embed(&field.beta1, i);
            let zs = cand.poly.roots_at(field, i).into_iter().map(|z| z * scale);
            let gs: Vec<Complex64> = match delta.route {
                Route::Gamma => zs.collect(),
                Route::Gamma2p => zs.map(|z| compose_gamma2p(z, beta)).collect(),
            };
            Ok(distinct(gs))
        })
        .collect()
}

/// Minimal polynomial of the parameter over `L`, low degree first.
///
/// Built from the conjugates at every place, then certified exactly: the scaled or
/// composed candidate polynomial must divide its pullback.
pub fn minpoly_over_l(field: &FieldSpec, delta: &DeltaChoice, cand: &GammaCandidate) -> Result<Vec<FieldElement>, InvariantError> {
    let conj = parameter_conjugates(field, delta, cand)?;
    let deg = conj[0].len();
    if conj.iter().any(|c| c.len() != deg) {
        return Err(InvariantError::CertificationFailed("conjugate counts differ between places".into()));
    }
    let per_place: Vec<Vec<Complex64>> = conj.iter().map(|c| roots::from_roots(c)).collect();
    let mut m = Vec::with_capacity(deg + 1);
    for j in 0..=deg {
        let vals: Vec<f64> = per_place.iter().map(|c| c[j].re).collect();
        let tol = 1e-6 * (1.0 + vals.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        let x = field
            .recognize(&vals, tol)?
            .ok_or_else(|| InvariantError::CertificationFailed(format!("coefficient {j} is not integral")))?;
        m.push(x);
    }
    let unit = match &delta.unit {
        Some(u) => u.element(field).ok_or(InvariantError::UnitNotInField)?,
        None => field.one(),
    };
    // m(t) with t = unit z or t = unit z (unit z - beta1), as a polynomial in z
    let inner = match delta.route {
        Route::Gamma => vec![field.zero(), unit.clone()],
        Route::Gamma2p => {
            let u2 = field.mul(&unit, &unit);
            vec![field.zero(), field.neg(&field.mul(&unit, &field.beta1)), u2]
        }
    };
    let mut pullback = vec![field.zero()];
    for c in m.iter().rev() {
        pullback = poly_mul(field, &pullback, &inner);
        pullback[0] = field.add(&pullback[0], c);
    }
    while pullback.len() > 1 && pullback.last().is_some_and(|c| c.is_zero()) {
        pullback.pop();
    }
    let mut divisor = cand.poly.coeffs.clone();
    divisor.push(field.one());
    if divide_exact(field, &pullback, &divisor).is_none() {
        return Err(InvariantError::CertificationFailed("candidate does not divide the pullback".into()));
    }
    Ok(m)
}

/// Product of the conjugates of `m` over all places, rounded to integers and checked.
pub fn minpoly_over_q(field: &FieldSpec, m: &[FieldElement]) -> Result<ZPoly, InvariantError> {
    let mut prod = vec![Complex64::new(1.0, 0.0)];
    let mut all_roots = Vec::new();
    for i in 0..field.mu() {
        let conj: Vec<Complex64> = m.iter().map(|c| Complex64::new(field.embed(c, i), 0.0)).collect();
        let zs = roots::roots(&conj);
        prod = poly_mul_c(&prod, &conj);
        all_roots.extend(zs);
    }
    let mut coeffs = Vec::with_capacity(prod.len());
    for c in &prod {
        let r = c.re.round();
        let gap = (c.re - r).abs().max(c.im.abs());
        if gap > 1e-6 * (1.0 + r.abs()) || r.abs() > 9.0e15 {
            return Err(InvariantError::CertificationFailed(format!("coefficient {} is not near an integer", c.re)));
        }
        coeffs.push(r as i64);
    }
    let z = ZPoly::from_i64(&coeffs);
    if z.degree() != (m.len() - 1) * field.mu() {
        return Err(InvariantError::CertificationFailed("degree mismatch".into()));
    }
    let cz: Vec<Complex64> = coeffs.iter().map(|&c| Complex64::new(c as f64, 0.0)).collect();
    let resid = roots::max_residual(&cz, &all_roots);
    if resid > 1e-8 {
        return Err(InvariantError::CertificationFailed(format!("conjugate residual {resid:e}")));
    }
    Ok(z)
}

fn poly_mul_c(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Discriminant of `1, x, ..., x^(n-1)` for a monic integer polynomial; degree one gives 1.
pub fn power_basis_disc(poly: &ZPoly) -> BigInt {
    poly.discriminant()
}

/// `field_disc` divides `disc` with a perfect-square quotient.
pub fn square_cofactor_ok(field_disc: &BigInt, disc: &BigInt) -> bool {
    if field_disc.is_zero() {
        return false;
    }
    let (quot, rem) = disc.div_rem(field_disc);
    rem.is_zero() && !quot.is_negative() && is_perfect_square(&quot)
}

/// A surviving parameter with its arithmetic data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Survivor {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub gamma: Complex64,
    pub minpoly_over_l: Vec<FieldElement>,
    pub minpoly_over_q: Vec<i64>,
    pub power_basis_disc: String,
    #[serde(default)]
    pub free: Option<FreeSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeSummary {
    pub proved_free: bool,
    pub level: u8,
}

impl From<FreeOutcome> for FreeSummary {
    fn from(o: FreeOutcome) -> Self {
        FreeSummary { proved_free: o.verdict == crate::geometry::Verdict::ProvedFree, level: o.level }
    }
}

impl Survivor {
    pub fn from_candidate(field: &FieldSpec, delta: &DeltaChoice, cand: &GammaCandidate) -> Result<Self, InvariantError> {
        let m = minpoly_over_l(field, delta, cand)?;
        let mq = minpoly_over_q(field, &m)?;
        let disc = power_basis_disc(&mq);
        let minpoly_over_q = mq
            .to_i64()
            .ok_or_else(|| InvariantError::CertificationFailed("coefficient overflow".into()))?;
        Ok(Survivor {
            p: cand.p,
            q: cand.q,
            r: cand.r,
            gamma: cand.gamma,
            minpoly_over_l: m,
            minpoly_over_q,
            power_basis_disc: disc.to_string(),
            free: None,
        })
    }

    pub fn proved_free(&self) -> bool {
        self.free.as_ref().is_some_and(|f| f.proved_free)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowMatch {
    pub index: usize,
    pub found: bool,
    pub gamma_error: Option<f64>,
    pub minpoly_exact: bool,
    pub disc_square_cofactor: bool,
    pub free_inconclusive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenReport {
    pub rows: Vec<RowMatch>,
    /// Index of each real reference row and whether it was found among the real exclusions.
    pub real_rows: Vec<(usize, bool)>,
    /// Survivors outside the reference set that no free-product test removed.
    pub needs_geometric_confirmation: Vec<Survivor>,
    pub proved_free_extras: usize,
}

impl GoldenReport {
    pub fn matched(&self) -> usize {
        self.rows.iter().filter(|r| r.found && r.minpoly_exact).count()
    }

    pub fn all_ok(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.found && r.minpoly_exact && r.disc_square_cofactor && r.free_inconclusive)
            && self.real_rows.iter().all(|r| r.1)
    }
}

fn near(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm().min((a.conj() - b).norm())
}

/// Matches survivors and real exclusions against the reference rows.
pub fn golden_compare(rows: &[GoldenRow], survivors: &[Survivor], real_excluded: &[Survivor]) -> Result<GoldenReport, InvariantError> {
    let mut used = vec![false; survivors.len()];
    let mut out = Vec::new();
    let mut real_rows = Vec::new();
    for row in rows {
        let field = FieldSpec::new(row.p, row.q)?;
        let want = row.minpoly_in(&field)?;
        let matches = |s: &Survivor| s.p == row.p && s.q == row.q && near(s.gamma, row.gamma()) < GAMMA_MATCH_TOL;
        if row.is_real() {
            let hit = real_excluded.iter().any(|s| matches(s) && s.minpoly_over_l == want);
            real_rows.push((row.index, hit));
            continue;
        }
        let hit = survivors.iter().enumerate().find(|(_, s)| matches(s));
        let mq = minpoly_over_q(&field, &want)?;
        let disc_ok = square_cofactor_ok(&BigInt::from(row.disc), &power_basis_disc(&mq));
        out.push(match hit {
            Some((k, s)) => {
                used[k] = true;
                RowMatch {
                    index: row.index,
                    found: true,
                    gamma_error: Some(near(s.gamma, row.gamma())),
                    minpoly_exact: s.minpoly_over_l == want,
                    disc_square_cofactor: disc_ok,
                    free_inconclusive: !s.proved_free(),
                }
            }
            None => RowMatch {
                index: row.index,
                found: false,
                gamma_error: None,
                minpoly_exact: false,
                disc_square_cofactor: disc_ok,
                free_inconclusive: false,
            },
        });
    }
    let extras: Vec<&Survivor> = survivors.iter().zip(&used).filter(|(_, u)| !**u).map(|(s, _)| s).collect();
    let proved_free_extras = extras.iter().filter(|s| s.proved_free()).count();
    Ok(GoldenReport {
        rows: out,
        real_rows,
        needs_geometric_confirmation: extras.into_iter().filter(|s| !s.proved_free()).cloned().collect(),
        proved_free_extras,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfilter::{CandidatePolynomial, Filter, Source};

    fn z(c: &[i64]) -> ZPoly {
        ZPoly::from_i64(c)
    }

    #[test]
    fn discriminants() {
        assert_eq!(power_basis_disc(&z(&[3, 0, 1])), BigInt::from(-12));
        assert_eq!(power_basis_disc(&z(&[2, 2, 1])), BigInt::from(-4));
        assert_eq!(power_basis_disc(&z(&[1, 1])), BigInt::from(1));
        assert!(square_cofactor_ok(&BigInt::from(-3), &BigInt::from(-12)));
        assert!(!square_cofactor_ok(&BigInt::from(-3), &BigInt::from(-24)));
    }

    #[test]
    fn coefficient_parsing() {
        let f = FieldSpec::new(12, 12).unwrap();
        let r3 = 3f64.sqrt();
        for (s, v) in [("3-sqrt3", 3.0 - r3), ("11-4sqrt3", 11.0 - 4.0 * r3), ("-2sqrt3", -2.0 * r3), ("7", 7.0)] {
            let x = parse_coefficient(&f, s).unwrap();
            assert!((f.embed(&x, 0) - v).abs() < 1e-12, "{s}");
        }
        let g = FieldSpec::new(10, 10).unwrap();
        let x = parse_coefficient(&g, "3+sqrt5").unwrap();
        assert!((g.embed(&x, 0) - 3.0 - 5f64.sqrt()).abs() < 1e-12);
        assert!(parse_coefficient(&g, "3+sqrt7").is_err());
    }

    #[test]
    fn quartic_over_q_from_quadratic_over_sqrt3() {
        let f = FieldSpec::new(12, 12).unwrap();
        let row = &golden_rows()[1];
        let m = row.minpoly_in(&f).unwrap();
        // (x^2+(3-s)x+(3-s))(x^2+(3+s)x+(3+s)) with s^2 = 3
        assert_eq!(minpoly_over_q(&f, &m).unwrap(), z(&[6, 12, 12, 6, 1]));
    }

    #[test]
    fn rational_rows_are_their_own_minpoly() {
        let f = FieldSpec::new(6, 6).unwrap();
        for (idx, want) in [(13, vec![2, 2, 1]), (15, vec![3, 0, 1])] {
            let m = golden_rows()[idx - 1].minpoly_in(&f).unwrap();
            assert_eq!(minpoly_over_q(&f, &m).unwrap(), z(&want));
        }
    }

    #[test]
    fn composed_route_minpoly() {
        // z^2 + z + 1 gives the real parameter z(z+1) = -1
        let f = FieldSpec::new(6, 6).unwrap();
        let cand = GammaCandidate {
            p: 6,
            q: 6,
            r: 2,
            gamma: Complex64::new(-1.0, 0.0),
            poly: CandidatePolynomial::new(vec![f.from_int(1), f.from_int(1)]),
            flags: vec![Filter::RootLocation],
            source: Source::ViaGamma2p,
        };
        let m = minpoly_over_l(&f, &DeltaChoice::GAMMA2P, &cand).unwrap();
        assert_eq!(m, vec![f.from_int(1), f.from_int(1)]);
    }

    #[test]
    fn golden_fixture_self_check() {
        let rows = golden_rows();
        assert_eq!(rows.len(), 18);
        assert_eq!(rows.iter().filter(|r| !r.is_real()).count(), 17);
        for row in &rows {
            assert!(row.residual().unwrap() < RESIDUAL_TOL, "row {}", row.index);
        }
    }
}
