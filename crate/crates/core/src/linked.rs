//! Higher-degree searches for `p = q` through the pair `gamma1`, `gamma2 = beta1 - gamma1`.
//!
//! With `gamma = -gamma1 gamma2` the minimal polynomials `p1`, `p2` of `gamma1`, `gamma2`
//! satisfy `p2(x) = (-1)^r p1(beta1 - x)`, so `c0 = c0' c0''` and `p1(beta1) = (-1)^r c0''`.
//! Each stage below is a necessary condition on `p1`; the last ones are numerical checks
//! of the root distribution followed by an exact reducibility test.

use crate::coeffsearch::{self, basic_search, coeff_bounds, windows, CoeffBox, DeltaChoice, SearchError, Windows};
use crate::field::{FieldElement, FieldError, FieldSpec};
use crate::geometry::{inside_contour, OmegaBounds};
use crate::polyfilter::{compose_gamma2p, find_factor, CandidatePolynomial, Filter, GammaCandidate, Source};
use crate::roots;
use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashSet;
use thiserror::Error;

/// Imaginary parts below this count as real when checking root distributions.
pub const IM_TOL: f64 = 1e-6;
/// Interval tolerance for real roots.
pub const ROOT_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LinkedError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("linked search needs p = q and 3 <= r <= 5, got ({p},{q},{r})")]
    Unsupported { p: u32, q: u32, r: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageCount {
    pub stage: &'static str,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainOutcome {
    pub p: u32,
    pub r: u32,
    pub stages: Vec<StageCount>,
    /// Distribution survivors whose `p1` factors over `L`.
    pub reducible: usize,
    pub survivors: Vec<GammaCandidate>,
}

impl ChainOutcome {
    pub fn count(&self, stage: &str) -> Option<usize> {
        self.stages.iter().find(|s| s.stage == stage).map(|s| s.count)
    }
}

/// `(c0, c0', c0'')` with `c0 = c0' c0''`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LinkedTriple {
    pub c0: FieldElement,
    pub head: FieldElement,
    pub tail: FieldElement,
}

/// Shared data for one `(p, p, r)` chain.
pub struct Chain {
    pub field: FieldSpec,
    pub bounds: OmegaBounds,
    pub r: u32,
    pub cap: f64,
    /// Conjugates of `beta1`, identity first.
    pub beta: Vec<f64>,
    pub gamma_w: Windows,
    pub half_w: Windows,
    sign: i64,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `s * sum_k (l^(n-k) / s)^(1/k)`: largest `e_(n-1)` of `n` numbers in `(0, l)` with product `s`.
pub fn telescoping(s: f64, l: f64, n: u32) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    (1..=n).map(|k| s * (l.powi((n - k) as i32) / s).powf(1.0 / k as f64)).sum()
}

/// Upper bound for `e_(m+1)`-type sums at the identity: `sum_k l^((m-k)/k) s^(1-1/k) a^(2/k) + shift l^m`.
fn identity_sum(s: f64, l: f64, a: f64, shift: f64, m: u32) -> f64 {
    let s = s.max(0.0);
    let head: f64 = (1..=m)
        .map(|k| {
            let k = k as f64;
            l.powf((m as f64 - k) / k) * s.powf(1.0 - 1.0 / k) * a.powf(2.0 / k)
        })
        .sum();
    head + shift.max(0.0) * l.powi(m as i32)
}

fn derivative(coeffs: &[f64], times: usize) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    for _ in 0..times {
        c = c.iter().enumerate().skip(1).map(|(k, &x)| x * k as f64).collect();
    }
    c
}

/// All roots real and inside `[lo, hi]`, up to the tolerances.
fn all_real_in(coeffs: &[f64], lo: f64, hi: f64) -> bool {
    roots::real_poly_roots(coeffs)
        .iter()
        .all(|z| z.im.abs() <= IM_TOL * (1.0 + z.norm()) && z.re >= lo - ROOT_SLACK && z.re <= hi + ROOT_SLACK)
}

impl Chain {
    pub fn new(p: u32, r: u32, bounds: OmegaBounds, cap: f64) -> Result<Self, LinkedError> {
        if !(3..=5).contains(&r) {
            return Err(LinkedError::Unsupported { p, q: p, r });
        }
        let field = FieldSpec::new(p, p)?;
        let gamma_w = windows(&field, &bounds, &DeltaChoice::GAMMA)?;
        let half_w = windows(&field, &bounds, &DeltaChoice::GAMMA2P)?;
        let beta = field.embed_all(&field.beta1);
        let sign = if r.is_multiple_of(2) { 1 } else { -1 };
        Ok(Chain { field, bounds, r, cap, beta, gamma_w, half_w, sign })
    }

    fn mu(&self) -> usize {
        self.field.mu()
    }

    fn list(&self, w: &Windows, j: u32) -> Result<Vec<FieldElement>, LinkedError> {
        Ok(basic_search(&self.field, &coeff_bounds(w, self.r, j), self.cap)?.candidates)
    }

    /// Triples with `c0 = c0' c0''`, both factors in the `c0'` list, prefiltered by norms.
    pub fn linked_triples(&self, c0s: &[FieldElement], heads: &[FieldElement]) -> Result<Vec<LinkedTriple>, LinkedError> {
        let f = &self.field;
        let members: HashSet<&FieldElement> = heads.iter().collect();
        let norms: Vec<_> = heads.iter().map(|x| f.norm(x)).collect();
        let found: Result<Vec<Vec<LinkedTriple>>, FieldError> = c0s
            .par_iter()
            .map(|c0| {
                let n0 = f.norm(c0);
                let mut out = Vec::new();
                for (head, nh) in heads.iter().zip(&norms) {
                    if !n0.is_multiple_of(nh) {
                        continue;
                    }
                    if let Some(tail) = f.divide(c0, head)? {
                        if members.contains(&tail) {
                            out.push(LinkedTriple { c0: c0.clone(), head: head.clone(), tail });
                        }
                    }
                }
                Ok(out)
            })
            .collect();
        Ok(found?.into_iter().flatten().collect())
    }

    /// `beta1 | c0' - (-1)^r c0''`.
    pub fn beta_divisible(&self, t: &LinkedTriple) -> Result<bool, LinkedError> {
        let f = &self.field;
        let diff = f.sub(&t.head, &f.scale(&t.tail, self.sign));
        Ok(f.divide(&diff, &f.beta1)?.is_some())
    }

    /// Largest conjugates of the linear coefficient of the minimal polynomial of `gamma`.
    fn gamma_c1_max(&self, c0: &[f64]) -> Vec<f64> {
        let m = self.r - 2;
        (0..self.mu())
            .map(|i| {
                let l = self.beta[i] * self.beta[i] / 4.0;
                if i == 0 {
                    identity_sum(c0[0], l, self.bounds.abs_max, -2.0 * self.bounds.re_min, m)
                } else {
                    telescoping(c0[i], l, self.r)
                }
            })
            .collect()
    }

    /// Smallest conjugates of the same coefficient; the identity uses `|gamma| > 1 - |beta1|`.
    fn gamma_c1_min(&self, c0: &[f64]) -> Vec<f64> {
        let m = self.r - 2;
        let r = self.r as f64;
        let floor = 1.0 + self.beta[0];
        (0..self.mu())
            .map(|i| {
                if i == 0 {
                    let l = self.beta[0] * self.beta[0] / 4.0;
                    if floor > 0.0 {
                        c0[0] * (m as f64 / l - 2.0 / floor)
                    } else {
                        f64::NEG_INFINITY
                    }
                } else {
                    r * c0[i].max(0.0).powf((r - 1.0) / r)
                }
            })
            .collect()
    }

    /// Bounds for the linear coefficient of a factor with constant term conjugates `s`.
    fn half_c1_range(&self, s: &[f64], head: bool) -> (Vec<f64>, Vec<f64>) {
        let m = self.r - 2;
        let r = self.r as f64;
        let l0 = -self.beta[0];
        let mut lo = vec![0.0; self.mu()];
        let mut hi = vec![0.0; self.mu()];
        for i in 0..self.mu() {
            let l = -self.beta[i];
            if i == 0 {
                let shift = if head { 8.0 } else { l0 };
                hi[0] = identity_sum(s[0], l0, 4.0, shift, m);
                lo[0] = if head {
                    s[0] * (m as f64 / l0 + l0 / 16.0)
                } else {
                    -l0.powi(m as i32) / m as f64
                };
            } else {
                lo[i] = r * s[i].max(0.0).powf((r - 1.0) / r);
                hi[i] = telescoping(s[i], l, self.r);
            }
        }
        (lo, hi)
    }

    /// Window for `c1'` given the linked pair, from both factor bounds and the product relation.
    pub fn head_c1_box(&self, t: &LinkedTriple) -> CoeffBox {
        let f = &self.field;
        let (s0, s1, s2) = (f.embed_all(&t.c0), f.embed_all(&t.head), f.embed_all(&t.tail));
        let (c1_min, c1_max) = (self.gamma_c1_min(&s0), self.gamma_c1_max(&s0));
        let (tail_lo, tail_hi) = self.half_c1_range(&s2, false);
        let (mut lower, mut upper) = self.half_c1_range(&s1, true);
        for i in 0..self.mu() {
            let hi = (-self.beta[i] * c1_max[i] - s1[i] * tail_lo[i]) / s2[i];
            let lo = (-self.beta[i] * c1_min[i] - s1[i] * tail_hi[i]) / s2[i];
            upper[i] = upper[i].min(hi);
            lower[i] = lower[i].max(lo);
        }
        CoeffBox { j: 1, lower, upper }
    }

    /// `c1'` candidates for a linked pair, reduced by `beta1^2 | (-1)^r c0'' - c0' - beta1 c1'`.
    pub fn head_c1_candidates(&self, t: &LinkedTriple) -> Result<Vec<FieldElement>, LinkedError> {
        let bx = self.head_c1_box(t);
        if bx.lower.iter().zip(&bx.upper).any(|(l, h)| l > h) {
            return Ok(Vec::new());
        }
        let f = &self.field;
        let b2 = f.mul(&f.beta1, &f.beta1);
        let base = f.sub(&f.scale(&t.tail, self.sign), &t.head);
        let mut out = Vec::new();
        for c1 in basic_search(f, &bx, self.cap)?.candidates {
            let v = f.sub(&base, &f.mul(&f.beta1, &c1));
            if f.divide(&v, &b2)?.is_some() {
                out.push(c1);
            }
        }
        Ok(out)
    }

    /// `(c'_(r-1), c'_(r-2))` from the top coefficients of both lists, `2 c'_(r-2) = c_(r-1) + beta1 c'_(r-1) + c'_(r-1)^2`.
    pub fn top_pairs(&self, tops: &[FieldElement], head_tops: &[FieldElement]) -> Vec<(FieldElement, FieldElement)> {
        let f = &self.field;
        let r = self.r;
        let next = coeff_bounds(&self.half_w, r, r - 2);
        let mut out: Vec<(FieldElement, FieldElement)> = head_tops
            .par_iter()
            .flat_map_iter(|t1| {
                let base = f.add(&f.mul(&f.beta1, t1), &f.mul(t1, t1));
                let next = &next;
                tops.iter().filter_map(move |t| {
                    let num = f.add(t, &base);
                    if num.0.iter().any(|c| c.is_odd()) {
                        return None;
                    }
                    let t2 = FieldElement(num.0.iter().map(|c| c / 2).collect());
                    let (e1, e2) = (f.embed_all(t1), f.embed_all(&t2));
                    let ok = (0..self.mu()).all(|i| {
                        e2[i] >= next.lower[i] - coeffsearch::SLACK && e2[i] <= next.upper[i] + coeffsearch::SLACK
                    }) && (1..self.mu()).all(|i| {
                        let quad = [e2[i], (r - 1) as f64 * e1[i], (r * (r - 1)) as f64 / 2.0];
                        all_real_in(&quad, self.beta[i], 0.0)
                    });
                    ok.then(|| (t1.clone(), t2))
                })
            })
            .collect();
        out.sort();
        out
    }

    /// Inequalities tying a top pair to the constant term `c0'`.
    pub fn pair_links(&self, top: &(Vec<f64>, Vec<f64>), head: &[f64]) -> bool {
        let r = self.r as f64;
        let (e1, e2) = top;
        let eps = coeffsearch::SLACK;
        let non_identity = (1..self.mu()).all(|i| {
            let s = head[i].max(0.0);
            let mut ok = e1[i] >= r * s.powf(1.0 / r) - eps && e2[i] >= binomial(self.r, 2) * s.powf(2.0 / r) - eps;
            if self.r == 4 {
                ok &= e2[i] <= 3.0 * s.sqrt() + 3.0 * self.beta[i] * self.beta[i] + eps;
            }
            ok
        });
        let identity = self.r != 4 || e2[0] >= 2.0 * 3f64.sqrt() * head[0].max(0.0).sqrt() - eps;
        non_identity && identity
    }

    fn beta_powers(&self) -> Vec<FieldElement> {
        let f = &self.field;
        (0..=self.r).map(|k| f.pow(&f.beta1, k)).collect()
    }

    /// `p1` candidates from a full tuple; `None` when an exact relation fails.
    fn complete(
        &self,
        pair: &(FieldElement, FieldElement),
        c1: &FieldElement,
        t: &LinkedTriple,
        bp: &[FieldElement],
    ) -> Result<Option<CandidatePolynomial>, LinkedError> {
        let f = &self.field;
        let r = self.r as usize;
        if r == 3 && &pair.1 != c1 {
            return Ok(None);
        }
        let mut value = f.add(&bp[r], &f.mul(&pair.0, &bp[r - 1]));
        if r > 3 {
            value = f.add(&value, &f.mul(&pair.1, &bp[r - 2]));
        }
        value = f.add(&value, &f.mul(c1, &bp[1]));
        value = f.add(&value, &t.head);
        value = f.sub(&value, &f.scale(&t.tail, self.sign));
        match r {
            3 => Ok(value
                .is_zero()
                .then(|| CandidatePolynomial::new(vec![t.head.clone(), c1.clone(), pair.0.clone()]))),
            4 => Ok(value
                .is_zero()
                .then(|| CandidatePolynomial::new(vec![t.head.clone(), c1.clone(), pair.1.clone(), pair.0.clone()]))),
            5 => {
                let Some(c2) = f.divide(&f.neg(&value), &bp[2])? else {
                    return Ok(None);
                };
                let poly = CandidatePolynomial::new(vec![t.head.clone(), c1.clone(), c2, pair.1.clone(), pair.0.clone()]);
                Ok(self.tail_c1_consistent(&poly, t)?.then_some(poly))
            }
            _ => Ok(None),
        }
    }

    /// `c1'' = (-1)^(r+1) p1'(beta1)` and `c1 = -(c0'' c1' + c0' c1'') / beta1` must respect their bounds.
    fn tail_c1_consistent(&self, poly: &CandidatePolynomial, t: &LinkedTriple) -> Result<bool, LinkedError> {
        let f = &self.field;
        let r = self.r as usize;
        let mut dp = f.scale(&f.pow(&f.beta1, (r - 1) as u32), r as i64);
        for k in 1..r {
            let term = f.mul(&poly.coeffs[k], &f.pow(&f.beta1, (k - 1) as u32));
            dp = f.add(&dp, &f.scale(&term, k as i64));
        }
        let tail_c1 = f.scale(&dp, -self.sign);
        let num = f.neg(&f.add(&f.mul(&t.tail, &poly.coeffs[1]), &f.mul(&t.head, &tail_c1)));
        let Some(c1) = f.divide(&num, &f.beta1)? else {
            return Ok(false);
        };
        let (s0, s2) = (f.embed_all(&t.c0), f.embed_all(&t.tail));
        let (lo, hi) = self.half_c1_range(&s2, false);
        let e = f.embed_all(&tail_c1);
        let c1_max = self.gamma_c1_max(&s0);
        let ec1 = f.embed_all(&c1);
        let eps = coeffsearch::SLACK;
        Ok((0..self.mu()).all(|i| e[i] >= lo[i] - eps && e[i] <= hi[i] + eps && ec1[i] <= c1_max[i] + eps))
    }

    /// Conjugate of `p1` at place `i`, low degree first, monic.
    fn at_place(&self, poly: &CandidatePolynomial, i: usize) -> Vec<f64> {
        poly.at_place(&self.field, i)
    }

    fn derivative_ok(&self, poly: &CandidatePolynomial) -> bool {
        (1..self.mu()).all(|i| {
            let d = derivative(&self.at_place(poly, i), self.r as usize - 3);
            all_real_in(&d, self.beta[i], 0.0)
        })
    }

    fn distribution_ok(&self, poly: &CandidatePolynomial) -> bool {
        let others = (1..self.mu()).all(|i| all_real_in(&self.at_place(poly, i), self.beta[i], 0.0));
        let zs = poly.roots_at(&self.field, 0);
        let complex = zs.iter().filter(|z| z.im.abs() > IM_TOL * (1.0 + z.norm())).count();
        others && complex == 2
    }

    fn identity_reals_ok(&self, poly: &CandidatePolynomial) -> bool {
        poly.roots_at(&self.field, 0)
            .iter()
            .filter(|z| z.im.abs() <= IM_TOL * (1.0 + z.norm()))
            .all(|z| z.re >= self.beta[0] - ROOT_SLACK && z.re <= ROOT_SLACK)
    }

    fn gamma(&self, poly: &CandidatePolynomial) -> Complex64 {
        let g1 = poly
            .roots_at(&self.field, 0)
            .into_iter()
            .max_by(|a, b| a.im.total_cmp(&b.im))
            .unwrap_or_default();
        let g = compose_gamma2p(g1, self.beta[0]);
        if g.im < 0.0 {
            g.conj()
        } else {
            g
        }
    }

    fn reducible(&self, poly: &CandidatePolynomial) -> Result<bool, LinkedError> {
        let mut full = poly.coeffs.clone();
        full.push(self.field.one());
        for k in 1..=poly.degree() / 2 {
            if find_factor(&self.field, &full, k, false)?.is_some() {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn run(&self) -> Result<ChainOutcome, LinkedError> {
        let r = self.r;
        let mut stages = Vec::new();
        let mut push = |stage: &'static str, count: usize| stages.push(StageCount { stage, count });
        let c0s = self.list(&self.gamma_w, 0)?;
        let heads = self.list(&self.half_w, 0)?;
        push("c0", c0s.len());
        push("head_c0", heads.len());
        let linked = self.linked_triples(&c0s, &heads)?;
        push("linked", linked.len());
        let mut triples = Vec::new();
        for t in linked {
            if self.beta_divisible(&t)? {
                triples.push(t);
            }
        }
        push("beta_divisible", triples.len());
        let outcome = |stages, reducible, survivors| ChainOutcome { p: self.field.p, r, stages, reducible, survivors };
        if triples.is_empty() {
            return Ok(outcome(stages, 0, Vec::new()));
        }

        let c1_lists: Vec<Vec<FieldElement>> = triples
            .par_iter()
            .map(|t| self.head_c1_candidates(t))
            .collect::<Result<_, _>>()?;
        push("head_c1", c1_lists.iter().map(Vec::len).sum());

        let tops = self.list(&self.gamma_w, r - 1)?;
        let head_tops = self.list(&self.half_w, r - 1)?;
        push("top", tops.len());
        push("head_top", head_tops.len());
        let pairs = self.top_pairs(&tops, &head_tops);
        push("top_pairs", pairs.len());

        let f = &self.field;
        let pair_emb: Vec<(Vec<f64>, Vec<f64>)> =
            pairs.iter().map(|(a, b)| (f.embed_all(a), f.embed_all(b))).collect();
        let head_emb: Vec<Vec<f64>> = triples.iter().map(|t| f.embed_all(&t.head)).collect();
        let links: Vec<(usize, usize)> = (0..pairs.len())
            .into_par_iter()
            .flat_map_iter(|pi| {
                let pe = &pair_emb[pi];
                let head_emb = &head_emb;
                (0..triples.len()).filter(move |&ti| self.pair_links(pe, &head_emb[ti])).map(move |ti| (pi, ti))
            })
            .collect();
        push("linked_four", links.len());
        push("linked_five", links.iter().map(|&(_, ti)| c1_lists[ti].len()).sum());

        let bp = self.beta_powers();
        let polys: Vec<CandidatePolynomial> = links
            .par_iter()
            .map(|&(pi, ti)| -> Result<Vec<CandidatePolynomial>, LinkedError> {
                let mut out = Vec::new();
                for c1 in &c1_lists[ti] {
                    if let Some(p) = self.complete(&pairs[pi], c1, &triples[ti], &bp)? {
                        out.push(p);
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .flatten()
            .collect();
        push("relation", polys.len());

        let polys: Vec<CandidatePolynomial> = polys.into_par_iter().filter(|p| self.derivative_ok(p)).collect();
        push("derivative", polys.len());
        let polys: Vec<CandidatePolynomial> = polys.into_iter().filter(|p| self.distribution_ok(p)).collect();
        push("distribution", polys.len());
        let mut reducible = 0;
        let mut flagged = Vec::with_capacity(polys.len());
        for p in polys {
            let red = self.reducible(&p)?;
            reducible += red as usize;
            flagged.push((p, red));
        }
        let flagged: Vec<_> = flagged.into_iter().filter(|(p, _)| self.identity_reals_ok(p)).collect();
        push("identity_reals", flagged.len());
        let mut survivors = Vec::new();
        let mut inside = 0;
        for (poly, red) in flagged {
            let gamma = self.gamma(&poly);
            if gamma.im.abs() <= IM_TOL || !inside_contour(&self.bounds, gamma) {
                continue;
            }
            inside += 1;
            if red {
                continue;
            }
            let flags = vec![Filter::RootLocation, Filter::Contour, Filter::Factorization];
            survivors.push(GammaCandidate { p: f.p, q: f.q, r, gamma, poly, flags, source: Source::ViaGamma2p });
        }
        push("contour", inside);
        push("irreducible", survivors.len());
        Ok(outcome(stages, reducible, survivors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn telescoping_is_attained_at_the_extreme() {
        // three numbers in (0, 2) with product 2: extreme point (2, 1, 1) gives e2 = 2 + 2 + 1
        let bound = telescoping(2.0, 2.0, 3);
        assert!(bound >= 5.0 - 1e-12);
    }

    #[test]
    fn derivative_of_quartic() {
        assert_eq!(derivative(&[1.0, 2.0, 3.0, 4.0, 5.0], 2), vec![6.0, 24.0, 60.0]);
    }

    #[test]
    fn real_root_window() {
        assert!(all_real_in(&[0.125, 0.75, 1.0], -1.0, 0.0));
        assert!(!all_real_in(&[1.0, 0.0, 1.0], -1.0, 0.0));
        assert!(!all_real_in(&[-0.25, 0.0, 1.0], -1.0, 0.0));
    }

    #[test]
    fn top_relation_matches_composition() {
        // gamma_k = gamma1_k (gamma1_k - beta) for a quartic with roots -0.1, -0.2, -0.3 +- 0.4i
        let beta = -0.8;
        let zs = [
            Complex64::new(-0.1, 0.0),
            Complex64::new(-0.2, 0.0),
            Complex64::new(-0.3, 0.4),
            Complex64::new(-0.3, -0.4),
        ];
        let p1 = roots::from_roots(&zs);
        let composed: Vec<Complex64> = zs.iter().map(|&z| compose_gamma2p(z, beta)).collect();
        let p = roots::from_roots(&composed);
        let (t, t1, t2) = (p[3].re, p1[3].re, p1[2].re);
        assert!((2.0 * t2 - (t + beta * t1 + t1 * t1)).abs() < 1e-12);
        let p2 = roots::from_roots(&zs.map(|z| beta - z));
        assert!((p[0].re - p1[0].re * p2[0].re).abs() < 1e-12);
    }
}
