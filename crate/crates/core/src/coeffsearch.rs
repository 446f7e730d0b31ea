//! Enumeration of candidate minimal-polynomial coefficients over `L` from per-place bounds.

use crate::field::{FieldElement, FieldSpec};
use crate::geometry::OmegaBounds;
use crate::numtheory::{binomial, prime_power_base};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Outward slack on every interval endpoint.
pub const SLACK: f64 = 1e-9;
pub const DEFAULT_SPACE_CAP: f64 = 1e9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("estimated search space {estimate:.3e} exceeds cap {cap:.3e}")]
    SearchSpaceOverflow { estimate: f64, cap: f64 },
    #[error("unit {0} is not an element of L")]
    UnitNotInField(String),
}

/// Which algebraic integer is enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Route {
    /// `delta = gamma`, real conjugates in `(-beta1 beta2 / 4, 0)`.
    Gamma,
    /// `delta = gamma(2, p)`, real conjugates in `(beta1, 0)`.
    Gamma2p,
}

/// A scaling unit given by a cyclotomic expression evaluated at each place.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum UnitExpr {
    /// `4 sin^2(pi/n)`.
    FourSinSq(u64),
    /// `4 sin^2(pi/a) 4 sin^2(pi/b)`.
    FourSinSqProduct(u64, u64),
    /// `1 + 2cos(2 pi a / b)`.
    OnePlusTwoCos(u64, u64),
}

impl UnitExpr {
    pub fn element(&self, field: &FieldSpec) -> Option<FieldElement> {
        match *self {
            UnitExpr::FourSinSq(n) => field.four_sin_sq(n),
            UnitExpr::FourSinSqProduct(a, b) => Some(field.mul(&field.four_sin_sq(a)?, &field.four_sin_sq(b)?)),
            UnitExpr::OnePlusTwoCos(a, b) => Some(field.add(&field.one(), &field.cos_element(a, b)?)),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            UnitExpr::FourSinSq(n) => format!("4sin^2(pi/{n})"),
            UnitExpr::FourSinSqProduct(a, b) => format!("4sin^2(pi/{a})*4sin^2(pi/{b})"),
            UnitExpr::OnePlusTwoCos(a, b) => format!("1+2cos(2pi*{a}/{b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaChoice {
    pub route: Route,
    pub unit: Option<UnitExpr>,
}

impl DeltaChoice {
    pub const GAMMA: DeltaChoice = DeltaChoice { route: Route::Gamma, unit: None };
    pub const GAMMA2P: DeltaChoice = DeltaChoice { route: Route::Gamma2p, unit: None };

    pub fn over(route: Route, unit: UnitExpr) -> Self {
        DeltaChoice { route, unit: Some(unit) }
    }

    pub fn label(&self) -> String {
        let base = match self.route {
            Route::Gamma => "gamma",
            Route::Gamma2p => "gamma(2,p)",
        };
        match &self.unit {
            Some(u) => format!("{base}/{}", u.label()),
            None => base.to_string(),
        }
    }
}

/// Route used for the reference runs, falling back to the generic rule.
pub fn delta_for(p: u32, q: u32, r: u32) -> DeltaChoice {
    use UnitExpr::*;
    let over_gamma = |u| DeltaChoice::over(Route::Gamma, u);
    match (p, q, r) {
        (42, 42, 2) | (20, 20, 2) | (20, 10, 2) | (18, 9, 2) | (18, 6, 2) | (15, 15, 2) | (14, 14, 2) | (14, 7, 2) => {
            over_gamma(FourSinSq(p as u64))
        }
        (30, 15, 2) | (30, 10, 2) | (24, 12, 2) => over_gamma(FourSinSq(q as u64)),
        (42, 7, 2) => over_gamma(FourSinSqProduct(42, 21)),
        (28, 7, 2) => over_gamma(FourSinSq(28)),
        (16, 8, 2) => over_gamma(OnePlusTwoCos(3, 16)),
        (18, 9, 3) | (14, 7, 3) => over_gamma(FourSinSq(p as u64)),
        (30, 30, 3) | (18, 18, 3) => DeltaChoice::over(Route::Gamma2p, FourSinSq(p as u64)),
        (24, 8, 2) | (22, 11, 2) | (12, 6, _) | (10, 6, _) | (9, 6, 2) | (8, 6, _) | (7, 6, 2) => DeltaChoice::GAMMA,
        _ => default_delta(p, q),
    }
}

/// `p = q` uses `gamma(2,p)`; otherwise divide by `-beta` when that is a unit.
pub fn default_delta(p: u32, q: u32) -> DeltaChoice {
    if p == q {
        DeltaChoice::GAMMA2P
    } else if prime_power_base(p as u64).is_none() {
        DeltaChoice::over(Route::Gamma, UnitExpr::FourSinSq(p as u64))
    } else if prime_power_base(q as u64).is_none() {
        DeltaChoice::over(Route::Gamma, UnitExpr::FourSinSq(q as u64))
    } else {
        DeltaChoice::GAMMA
    }
}

/// Per-place constraints on the conjugates of `delta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Windows {
    /// Closed real interval for every real conjugate at each place (identity included).
    pub real: Vec<(f64, f64)>,
    pub abs_max: f64,
    pub re_lo: f64,
    pub re_hi: f64,
    pub unit_images: Vec<f64>,
}

pub fn windows(field: &FieldSpec, bounds: &OmegaBounds, delta: &DeltaChoice) -> Result<Windows, SearchError> {
    let mu = field.mu();
    let b1 = field.embed_all(&field.beta1);
    let b2 = field.embed_all(&field.beta2);
    let (lo, abs_max, re_lo, re_hi): (Vec<f64>, f64, f64, f64) = match delta.route {
        Route::Gamma => (
            (0..mu).map(|i| -b1[i] * b2[i] / 4.0).collect(),
            bounds.abs_max,
            bounds.re_min,
            bounds.re_max,
        ),
        Route::Gamma2p => (b1.clone(), 4.0, -4.0, b1[0] / 2.0),
    };
    let unit_images = match &delta.unit {
        None => vec![1.0; mu],
        Some(u) => {
            let v = u.element(field).ok_or_else(|| SearchError::UnitNotInField(u.label()))?;
            field.embed_all(&v)
        }
    };
    let real = lo
        .iter()
        .zip(&unit_images)
        .map(|(&l, &v)| {
            let (a, b) = (l / v, 0.0);
            (a.min(b), a.max(b))
        })
        .collect();
    let v0 = unit_images[0];
    let (x, y) = (re_lo / v0, re_hi / v0);
    Ok(Windows { real, abs_max: abs_max / v0.abs(), re_lo: x.min(y), re_hi: x.max(y), unit_images })
}

type Interval = (f64, f64);

fn imul(x: Interval, y: Interval) -> Interval {
    let c = [x.0 * y.0, x.0 * y.1, x.1 * y.0, x.1 * y.1];
    (c.iter().copied().fold(f64::INFINITY, f64::min), c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

fn iadd(x: Interval, y: Interval) -> Interval {
    (x.0 + y.0, x.1 + y.1)
}

/// Range of the `k`-th elementary symmetric function of `n` reals in a window with one endpoint at 0.
pub fn esym_interval(n: u32, k: i64, window: Interval) -> Interval {
    if k == 0 {
        return (1.0, 1.0);
    }
    if k < 0 || k > n as i64 {
        return (0.0, 0.0);
    }
    let l = window.0.abs().max(window.1.abs());
    let m = binomial(n as u64, k as u64) * l.powi(k as i32);
    if window.1 <= 0.0 && k % 2 == 1 {
        (-m, 0.0)
    } else {
        (0.0, m)
    }
}

/// Bounds `I_j <= sigma_i(c_j) <= S_j` at every place.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoeffBox {
    pub j: u32,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

pub fn coeff_bounds(w: &Windows, r: u32, j: u32) -> CoeffBox {
    let k = (r - j) as i64;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let flip = |e: Interval| {
        let (a, b) = (e.0 * sign, e.1 * sign);
        (a.min(b), a.max(b))
    };
    let w0 = w.real[0];
    let ek = |m: i64| esym_interval(r - 2, m, w0);
    let ident = iadd(
        iadd(ek(k), imul((2.0 * w.re_lo, 2.0 * w.re_hi), ek(k - 1))),
        imul((0.0, w.abs_max * w.abs_max), ek(k - 2)),
    );
    let mut lower = Vec::with_capacity(w.real.len());
    let mut upper = Vec::with_capacity(w.real.len());
    let (a, b) = flip(ident);
    lower.push(a);
    upper.push(b);
    for &win in &w.real[1..] {
        let (a, b) = flip(esym_interval(r, k, win));
        lower.push(a);
        upper.push(b);
    }
    CoeffBox { j, lower, upper }
}

/// Sizes of the two enumeration stages.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpaceEstimate {
    pub leading: u64,
    pub trailing: f64,
}

impl SpaceEstimate {
    pub fn total(&self) -> f64 {
        self.leading as f64 * self.trailing
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    pub j: u32,
    pub candidates: Vec<FieldElement>,
    pub space_estimate: SpaceEstimate,
}

fn split_bounds(inv: &[Vec<f64>], lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    inv.iter()
        .map(|row| {
            row.iter().enumerate().fold((0.0, 0.0), |(l, h), (c, &a)| {
                if a > 0.0 {
                    (l + a * lo[c], h + a * hi[c])
                } else {
                    (l + a * hi[c], h + a * lo[c])
                }
            })
        })
        .unzip()
}

fn int_range(lo: f64, hi: f64) -> std::ops::RangeInclusive<i64> {
    (lo - SLACK).ceil() as i64..=(hi + SLACK).floor() as i64
}

fn range_len(r: &std::ops::RangeInclusive<i64>) -> u64 {
    (r.end() - r.start() + 1).max(0) as u64
}

/// Integer vectors `m` with `lower <= A m <= upper` (slack applied), `A` the place-by-power matrix.
pub fn basic_search(field: &FieldSpec, bx: &CoeffBox, cap: f64) -> Result<SearchResult, SearchError> {
    let mu = field.mu();
    let lo: Vec<f64> = bx.lower.iter().map(|x| x - SLACK).collect();
    let hi: Vec<f64> = bx.upper.iter().map(|x| x + SLACK).collect();
    let a = field.vandermonde();
    let accept = |m: &[i64]| {
        a.iter().zip(lo.iter().zip(&hi)).all(|(row, (l, h))| {
            let v: f64 = row.iter().zip(m).map(|(x, &c)| x * c as f64).sum();
            v >= *l && v <= *h
        })
    };
    let (flo, fhi) = split_bounds(field.vandermonde_inverse(), &lo, &hi);
    let lead = int_range(flo[0], fhi[0]);
    let mut out: Vec<Vec<i64>>;
    let estimate;
    if mu == 1 {
        estimate = SpaceEstimate { leading: range_len(&lead), trailing: 1.0 };
        check_cap(estimate, cap)?;
        out = lead.map(|m| vec![m]).filter(|m| accept(m)).collect();
    } else {
        let sub: Vec<Vec<f64>> = a[1..].iter().map(|row| row[1..].to_vec()).collect();
        let sub_inv = crate::dense::inverse(&sub).expect("distinct places give an invertible minor");
        let (slo, shi) = split_bounds(&sub_inv, &lo[1..], &hi[1..]);
        let shift: Vec<f64> = sub_inv.iter().map(|row| row.iter().sum()).collect();
        let trailing: f64 = slo.iter().zip(&shi).map(|(l, h)| range_len(&int_range(*l, *h)) as f64).product();
        estimate = SpaceEstimate { leading: range_len(&lead), trailing };
        check_cap(estimate, cap)?;
        out = lead
            .into_par_iter()
            .flat_map_iter(|m0| {
                let ranges: Vec<_> = (0..mu - 1)
                    .map(|i| int_range(slo[i] - m0 as f64 * shift[i], shi[i] - m0 as f64 * shift[i]))
                    .collect();
                let mut found = Vec::new();
                if ranges.iter().all(|r| range_len(r) > 0) {
                    let mut m = vec![m0; mu];
                    walk(&ranges, 0, &mut m, &accept, &mut found);
                }
                found
            })
            .collect();
    }
    if bx.j == 0 {
        out.retain(|m| m.iter().any(|&c| c != 0));
    }
    out.sort();
    Ok(SearchResult { j: bx.j, candidates: out.into_iter().map(FieldElement).collect(), space_estimate: estimate })
}

fn walk(
    ranges: &[std::ops::RangeInclusive<i64>],
    depth: usize,
    m: &mut Vec<i64>,
    accept: &(impl Fn(&[i64]) -> bool + Sync),
    found: &mut Vec<Vec<i64>>,
) {
    if depth == ranges.len() {
        if accept(m) {
            found.push(m.clone());
        }
        return;
    }
    for v in ranges[depth].clone() {
        m[depth + 1] = v;
        walk(ranges, depth + 1, m, accept, found);
    }
}

fn check_cap(est: SpaceEstimate, cap: f64) -> Result<(), SearchError> {
    if est.total() > cap {
        Err(SearchError::SearchSpaceOverflow { estimate: est.total(), cap })
    } else {
        Ok(())
    }
}

/// Candidate lists for `c_0, ..., c_{r-1}`.
pub fn search_all_coeffs(field: &FieldSpec, w: &Windows, r: u32, cap: f64) -> Result<Vec<SearchResult>, SearchError> {
    (0..r).map(|j| basic_search(field, &coeff_bounds(w, r, j), cap)).collect()
}
