//! From coefficient candidates to surviving commutator parameters.
//!
//! Stages: root-location reduction at every real place, contour membership of the
//! identity-place complex root, and the integral factorization test.

use crate::coeffsearch::{DeltaChoice, Route, Windows};
use crate::field::{FieldElement, FieldError, FieldSpec};
use crate::geometry::{inside_contour, OmegaBounds};
use crate::numtheory::gcd;
use crate::roots;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Strict-inequality margin for root-location tests.
pub const ROOT_MARGIN: f64 = 1e-9;
/// A root with `|Im| <= REAL_TOL` counts as real.
pub const REAL_TOL: f64 = 1e-9;

/// Monic `x^r + c_{r-1} x^{r-1} + ... + c_0` over `L`; `coeffs[j] = c_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CandidatePolynomial {
    pub coeffs: Vec<FieldElement>,
}

impl CandidatePolynomial {
    pub fn new(coeffs: Vec<FieldElement>) -> Self {
        CandidatePolynomial { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// Conjugate polynomial at place `i`, leading one included.
    pub fn at_place(&self, field: &FieldSpec, i: usize) -> Vec<f64> {
        let mut out: Vec<f64> = self.coeffs.iter().map(|c| field.embed(c, i)).collect();
        out.push(1.0);
        out
    }

    pub fn roots_at(&self, field: &FieldSpec, i: usize) -> Vec<Complex64> {
        roots::real_poly_roots(&self.at_place(field, i))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Filter {
    RootLocation,
    Contour,
    Factorization,
    FreeInconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    Direct,
    ViaGamma2p,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaCandidate {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub gamma: Complex64,
    pub poly: CandidatePolynomial,
    pub flags: Vec<Filter>,
    pub source: Source,
}

impl GammaCandidate {
    pub fn has(&self, f: Filter) -> bool {
        self.flags.contains(&f)
    }

    pub fn is_real(&self) -> bool {
        self.gamma.im.abs() <= REAL_TOL
    }
}

fn embedded(field: &FieldSpec, xs: &[FieldElement]) -> Vec<Vec<f64>> {
    xs.iter().map(|x| field.embed_all(x)).collect()
}

fn inside(x: f64, (lo, hi): (f64, f64)) -> bool {
    x > lo + ROOT_MARGIN && x < hi - ROOT_MARGIN
}

/// Degree 2: a complex pair at the identity place, two real roots in the window elsewhere.
pub fn reduce_deg2(field: &FieldSpec, w: &Windows, c0s: &[FieldElement], c1s: &[FieldElement]) -> Vec<CandidatePolynomial> {
    let (e0, e1) = (embedded(field, c0s), embedded(field, c1s));
    let keep = |a: &[f64], b: &[f64]| -> bool {
        if b[0] * b[0] - 4.0 * a[0] >= -ROOT_MARGIN {
            return false;
        }
        (1..field.mu()).all(|i| {
            let (lo, hi) = w.real[i];
            let p = |x: f64| x * x + b[i] * x + a[i];
            b[i] * b[i] - 4.0 * a[i] > ROOT_MARGIN
                && p(lo) > ROOT_MARGIN
                && p(hi) > ROOT_MARGIN
                && inside(-b[i] / 2.0, (lo, hi))
        })
    };
    let mut out: Vec<CandidatePolynomial> = (0..c0s.len())
        .into_par_iter()
        .flat_map_iter(|a| {
            let keep = &keep;
            let (e0, e1) = (&e0, &e1);
            (0..c1s.len())
                .filter(move |&b| keep(&e0[a], &e1[b]))
                .map(move |b| CandidatePolynomial::new(vec![c0s[a].clone(), c1s[b].clone()]))
        })
        .collect();
    out.sort();
    out
}

fn cubic_disc(c0: f64, c1: f64, c2: f64) -> f64 {
    18.0 * c2 * c1 * c0 - 4.0 * c2.powi(3) * c0 + c2 * c2 * c1 * c1 - 4.0 * c1.powi(3) - 27.0 * c0 * c0
}

/// Degree 3: pairs `(c1, c2)` are screened through the derivative first, then each `c0`.
pub fn reduce_deg3(
    field: &FieldSpec,
    w: &Windows,
    c0s: &[FieldElement],
    c1s: &[FieldElement],
    c2s: &[FieldElement],
) -> Vec<CandidatePolynomial> {
    let mu = field.mu();
    let (e0, e1, e2) = (embedded(field, c0s), embedded(field, c1s), embedded(field, c2s));
    let derivative_ok = |c1: &[f64], c2: &[f64]| {
        (1..mu).all(|i| {
            let (lo, hi) = w.real[i];
            let dp = |x: f64| 3.0 * x * x + 2.0 * c2[i] * x + c1[i];
            c2[i] * c2[i] > 3.0 * c1[i] + ROOT_MARGIN
                && dp(lo) > ROOT_MARGIN
                && dp(hi) > ROOT_MARGIN
                && inside(-c2[i] / 3.0, (lo, hi))
        })
    };
    let pairs: Vec<(usize, usize)> = (0..c1s.len())
        .flat_map(|b| (0..c2s.len()).map(move |c| (b, c)))
        .filter(|&(b, c)| derivative_ok(&e1[b], &e2[c]))
        .collect();
    let keep = |a: &[f64], b: &[f64], c: &[f64]| {
        (0..mu).all(|i| {
            let (lo, hi) = w.real[i];
            let p = |x: f64| ((x + c[i]) * x + b[i]) * x + a[i];
            let disc = cubic_disc(a[i], b[i], c[i]);
            let sign_ok = if i == 0 { disc < -ROOT_MARGIN } else { disc > ROOT_MARGIN };
            sign_ok && p(lo) < -ROOT_MARGIN && p(hi) > ROOT_MARGIN
        })
    };
    let mut out: Vec<CandidatePolynomial> = pairs
        .par_iter()
        .flat_map_iter(|&(b, c)| {
            let keep = &keep;
            let (e0, e1, e2) = (&e0, &e1, &e2);
            (0..c0s.len())
                .filter(move |&a| keep(&e0[a], &e1[b], &e2[c]))
                .map(move |a| CandidatePolynomial::new(vec![c0s[a].clone(), c1s[b].clone(), c2s[c].clone()]))
        })
        .collect();
    out.sort();
    out
}

/// Root-location condition checked by solving numerically; used for any degree.
pub fn root_location_ok(field: &FieldSpec, w: &Windows, poly: &CandidatePolynomial) -> bool {
    (0..field.mu()).all(|i| {
        let zs = poly.roots_at(field, i);
        let complex = zs.iter().filter(|z| z.im.abs() > REAL_TOL * 1e3).count();
        let reals_ok = zs
            .iter()
            .filter(|z| z.im.abs() <= REAL_TOL * 1e3)
            .all(|z| inside(z.re, w.real[i]));
        let want = if i == 0 { 2 } else { 0 };
        complex == want && reals_ok
    })
}

/// Dispatches on the number of coefficient lists.
pub fn reduce(field: &FieldSpec, w: &Windows, lists: &[Vec<FieldElement>]) -> Vec<CandidatePolynomial> {
    match lists {
        [c0, c1] => reduce_deg2(field, w, c0, c1),
        [c0, c1, c2] => reduce_deg3(field, w, c0, c1, c2),
        _ => {
            let mut polys = vec![Vec::new()];
            for list in lists {
                polys = polys
                    .into_iter()
                    .flat_map(|p: Vec<FieldElement>| {
                        list.iter().map(move |c| {
                            let mut q = p.clone();
                            q.push(c.clone());
                            q
                        })
                    })
                    .collect();
            }
            let mut out: Vec<CandidatePolynomial> = polys
                .into_par_iter()
                .map(CandidatePolynomial::new)
                .filter(|p| root_location_ok(field, w, p))
                .collect();
            out.sort();
            out
        }
    }
}

/// `gamma(p,p) = gamma1 (gamma1 - beta1)`.
pub fn compose_gamma2p(gamma1: Complex64, beta1: f64) -> Complex64 {
    gamma1 * (gamma1 - beta1)
}

/// The identity-place root in the upper half plane, or the real root nearest the axis.
pub fn identity_root(field: &FieldSpec, poly: &CandidatePolynomial) -> Complex64 {
    poly.roots_at(field, 0)
        .into_iter()
        .max_by(|a, b| a.im.total_cmp(&b.im))
        .map(|z| if z.im.abs() <= REAL_TOL { Complex64::new(z.re, 0.0) } else { z })
        .unwrap_or_default()
}

/// The commutator parameter encoded by `poly` under the route `delta`, taken with `Im >= 0`.
pub fn gamma_of(field: &FieldSpec, delta: &DeltaChoice, w: &Windows, poly: &CandidatePolynomial) -> (Complex64, Source) {
    let z = identity_root(field, poly) * w.unit_images[0];
    let (g, source) = match delta.route {
        Route::Gamma => (z, Source::Direct),
        Route::Gamma2p => (compose_gamma2p(z, field.embed(&field.beta1, 0)), Source::ViaGamma2p),
    };
    (if g.im < 0.0 { g.conj() } else { g }, source)
}

/// Attaches gamma to each reduced polynomial and flags contour membership.
pub fn contour_stage(
    field: &FieldSpec,
    bounds: &OmegaBounds,
    delta: &DeltaChoice,
    w: &Windows,
    r: u32,
    polys: &[CandidatePolynomial],
) -> Vec<GammaCandidate> {
    polys
        .par_iter()
        .map(|poly| {
            let (gamma, source) = gamma_of(field, delta, w, poly);
            let mut flags = vec![Filter::RootLocation];
            if gamma.im.abs() > REAL_TOL && inside_contour(bounds, gamma) {
                flags.push(Filter::Contour);
            }
            GammaCandidate { p: field.p, q: field.q, r, gamma, poly: poly.clone(), flags, source }
        })
        .collect()
}

/// Which quadratic relates the trace product to gamma.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FactorForm {
    /// `b gamma = y^2 - b y + c` with `y = tr f tr g tr fg`.
    Trace,
    /// `b gamma = y (y - c)` with `y` shifted by an integer; needs `gcd(p,q) > 2`.
    Shifted,
}

impl FactorForm {
    pub fn for_orders(p: u32, q: u32) -> Self {
        if gcd(p as u64, q as u64) > 2 {
            FactorForm::Shifted
        } else {
            FactorForm::Trace
        }
    }
}

fn two_cos(field: &FieldSpec, a: u64, b: u64) -> Result<FieldElement, FieldError> {
    let g = gcd(a, b).max(1);
    field
        .cos_element(a / g, b / g)
        .ok_or_else(|| FieldError::CertificationFailed(format!("2cos(2pi*{a}/{b}) not in L")))
}

/// `(b, s, t)` with `b gamma = y^2 + s y + t`.
pub fn factor_quadratic(field: &FieldSpec, form: FactorForm) -> Result<[FieldElement; 3], FieldError> {
    let (p, q) = (field.p as u64, field.q as u64);
    let two = field.from_int(2);
    let trf2 = field.add(&two, &two_cos(field, 1, p)?);
    let trg2 = field.add(&two, &two_cos(field, 1, q)?);
    let b = field.mul(&trf2, &trg2);
    Ok(match form {
        FactorForm::Trace => {
            let c = field.mul(&b, &field.sub(&field.add(&trf2, &trg2), &field.from_int(4)));
            [b.clone(), field.neg(&b), c]
        }
        FactorForm::Shifted => {
            let c = field.sub(&two_cos(field, p - q, p * q)?, &two_cos(field, p + q, p * q)?);
            [b, field.neg(&c), field.zero()]
        }
    })
}

/// Polynomials over `L`, coefficients low degree first.
pub fn poly_mul(field: &FieldSpec, x: &[FieldElement], y: &[FieldElement]) -> Vec<FieldElement> {
    let mut out = vec![field.zero(); x.len() + y.len() - 1];
    for (i, a) in x.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            out[i + j] = field.add(&out[i + j], &field.mul(a, b));
        }
    }
    out
}

/// Exact division by a monic divisor; `None` when the remainder is nonzero.
pub fn divide_exact(field: &FieldSpec, num: &[FieldElement], den: &[FieldElement]) -> Option<Vec<FieldElement>> {
    let (n, d) = (num.len() - 1, den.len() - 1);
    if n < d {
        return None;
    }
    let mut rem = num.to_vec();
    let mut quot = vec![field.zero(); n - d + 1];
    for k in (0..=n - d).rev() {
        let lead = rem[k + d].clone();
        if lead.is_zero() {
            continue;
        }
        for (j, c) in den.iter().enumerate() {
            rem[k + j] = field.sub(&rem[k + j], &field.mul(&lead, c));
        }
        quot[k] = lead;
    }
    rem[..d].iter().all(FieldElement::is_zero).then_some(quot)
}

/// `M(y) = sum_k a_k b^(r-k) (y^2 + s y + t)^k` with `a_k` the minimal-polynomial coefficients of gamma.
pub fn build_factor_poly(
    field: &FieldSpec,
    delta: &DeltaChoice,
    poly: &CandidatePolynomial,
    form: FactorForm,
) -> Result<Vec<FieldElement>, FieldError> {
    let r = poly.degree();
    let unit = match &delta.unit {
        Some(u) => u
            .element(field)
            .ok_or_else(|| FieldError::CertificationFailed(format!("{} not in L", u.label())))?,
        None => field.one(),
    };
    let [b, s, t] = factor_quadratic(field, form)?;
    let quad = vec![t, s, field.one()];
    let scale = field.mul(&b, &unit);
    let mut out = vec![field.zero(); 2 * r + 1];
    let mut quad_pow = vec![field.one()];
    for k in 0..=r {
        let a_k = if k == r { field.one() } else { poly.coeffs[k].clone() };
        let coef = field.mul(&a_k, &field.pow(&scale, (r - k) as u32));
        for (j, c) in quad_pow.iter().enumerate() {
            out[j] = field.add(&out[j], &field.mul(&coef, c));
        }
        quad_pow = poly_mul(field, &quad_pow, &quad);
    }
    Ok(out)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Real monic factors of degree `k` at one place, as coefficient vectors without the leading one.
fn real_factors(zs: &[Complex64], k: usize, pin_first: bool) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for set in subsets(zs.len(), k) {
        if pin_first && set[0] != 0 {
            continue;
        }
        let chosen: Vec<Complex64> = set.iter().map(|&i| zs[i]).collect();
        let coeffs = roots::from_roots(&chosen);
        let scale = 1.0 + coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if coeffs.iter().all(|c| c.im.abs() <= 1e-7 * scale) {
            let re: Vec<f64> = coeffs[..k].iter().map(|c| c.re).collect();
            let dup = out
                .iter()
                .any(|o| o.iter().zip(&re).all(|(a, b)| (a - b).abs() <= 1e-7 * scale));
            if !dup {
                out.push(re);
            }
        }
    }
    out
}

/// Finds a monic factor of half the degree with integral coefficients in `L`, certified by exact division.
pub fn factorization_test(field: &FieldSpec, m: &[FieldElement]) -> Result<Option<Vec<FieldElement>>, FieldError> {
    find_factor(field, m, (m.len() - 1) / 2, true)
}

/// A monic degree-`k` factor of `m` over the integers of `L`; `pin_first` forces the first identity root in.
pub fn find_factor(
    field: &FieldSpec,
    m: &[FieldElement],
    k: usize,
    pin_first: bool,
) -> Result<Option<Vec<FieldElement>>, FieldError> {
    let mu = field.mu();
    let mut choices = Vec::with_capacity(mu);
    for i in 0..mu {
        let conj: Vec<Complex64> = m.iter().map(|c| Complex64::new(field.embed(c, i), 0.0)).collect();
        let zs = roots::roots(&conj);
        let resid = roots::max_residual(&conj, &zs);
        let scale = 1.0 + conj.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if resid > 1e-9 * scale {
            return Err(FieldError::CertificationFailed(format!("root residual {resid:e} at place {i}")));
        }
        choices.push(real_factors(&zs, k, pin_first && i == 0));
    }
    let mut pick = vec![0usize; mu];
    loop {
        if choices.iter().all(|c| !c.is_empty()) {
            let mut factor = Vec::with_capacity(k + 1);
            for j in 0..k {
                let vals: Vec<f64> = choices.iter().zip(&pick).map(|(c, &i)| c[i][j]).collect();
                let tol = 1e-6 * (1.0 + vals.iter().fold(0.0f64, |a, v| a.max(v.abs())));
                match field.recognize(&vals, tol)? {
                    Some(x) => factor.push(x),
                    None => break,
                }
            }
            if factor.len() == k {
                factor.push(field.one());
                if divide_exact(field, m, &factor).is_some() {
                    return Ok(Some(factor));
                }
            }
        }
        let mut i = 0;
        loop {
            if i == mu {
                return Ok(None);
            }
            pick[i] += 1;
            if pick[i] < choices[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

/// Runs the factorization test on contour survivors; the composed route passes automatically.
pub fn factor_stage(field: &FieldSpec, delta: &DeltaChoice, cands: &mut [GammaCandidate]) -> Result<(), FieldError> {
    let form = FactorForm::for_orders(field.p, field.q);
    let results: Vec<Result<bool, FieldError>> = cands
        .par_iter()
        .map(|c| {
            if !c.has(Filter::Contour) {
                return Ok(false);
            }
            if c.source == Source::ViaGamma2p {
                return Ok(true);
            }
            let m = build_factor_poly(field, delta, &c.poly, form)?;
            Ok(factorization_test(field, &m)?.is_some())
        })
        .collect();
    for (c, res) in cands.iter_mut().zip(results) {
        if res? {
            c.flags.push(Filter::Factorization);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(v: &[i64]) -> FieldElement {
        FieldElement(v.to_vec())
    }

    #[test]
    fn composition_symmetry() {
        let b1 = -1.0;
        let g1 = Complex64::new(-0.3, 0.8);
        let a = compose_gamma2p(g1, b1);
        let b = compose_gamma2p(Complex64::new(b1, 0.0) - g1, b1);
        assert!((a - b).norm() < 1e-14);
        let mid = compose_gamma2p(Complex64::new(b1 / 2.0, 0.0), b1);
        assert!((mid - Complex64::new(-b1 * b1 / 4.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gamma_minus_one_roundtrip() {
        // gamma1^2 + gamma1 + 1 = 0 for p = 6, where beta1 = -1
        let g1 = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
        let g = compose_gamma2p(g1, -1.0);
        assert!((g - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn exact_division() {
        let f = FieldSpec::new(6, 6).unwrap();
        let a = [el(&[2]), el(&[1])];
        let b = [el(&[-3]), el(&[0]), el(&[1])];
        let prod = poly_mul(&f, &a, &b);
        assert_eq!(divide_exact(&f, &prod, &b).unwrap(), a.to_vec());
        let mut off = prod.clone();
        off[0] = el(&[1]);
        assert!(divide_exact(&f, &off, &b).is_none());
    }

    #[test]
    fn shifted_form_for_twelve_six() {
        let f = FieldSpec::new(12, 6).unwrap();
        let [b, s, t] = factor_quadratic(&f, FactorForm::Shifted).unwrap();
        let root3 = f.cos_element(1, 12).unwrap();
        for i in 0..f.mu() {
            let r3 = f.embed(&root3, i);
            assert!((f.embed(&b, i) - 3.0 * (2.0 + r3)).abs() < 1e-9);
            assert!((f.embed(&s, i).abs() - r3.abs()).abs() < 1e-9);
        }
        assert!(t.is_zero());
    }

    #[test]
    fn finds_planted_factor() {
        let f = FieldSpec::new(8, 8).unwrap();
        let u = f.gen_u();
        let a = vec![f.add(&u, &f.from_int(3)), f.from_int(-1), f.one()];
        let b = vec![f.from_int(5), f.neg(&u), f.one()];
        let m = poly_mul(&f, &a, &b);
        let got = factorization_test(&f, &m).unwrap().unwrap();
        assert!(got == a || got == b);
    }

    #[test]
    fn irreducible_has_no_factor() {
        let f = FieldSpec::new(6, 6).unwrap();
        let m: Vec<FieldElement> = [2, 0, 0, 0, 1].iter().map(|&c| el(&[c])).collect();
        assert!(factorization_test(&f, &m).unwrap().is_none());
    }
}
