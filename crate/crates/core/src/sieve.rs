//! Closed-form sieves that cut the `(p, q, r)` search down to a finite candidate list.

use crate::field::{degree_of, delta_pq, field_discriminant};
use crate::geometry::omega::{cs, maximize, omega_point};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use thiserror::Error;

/// Largest order considered.
pub const ORDER_CAP: u32 = 120;
pub const MIN_ORDER: u32 = 6;
/// Comparisons are relaxed by this much in log space so borderline triples survive.
pub const KEEP_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SieveError {
    #[error("no tabulated discriminant bound for degree {0}")]
    OutOfRange(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    Norm,
    Discriminant,
    Aspiring,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TripleRecord {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub mu: usize,
    pub stage: Stage,
}

/// One `(p, q)` line of a list with its admissible degrees.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ListRow {
    pub p: u32,
    pub q: u32,
    pub rs: Vec<u32>,
}

/// Groups triples by `(p, q)` in ascending order.
pub fn rows_of(triples: &[TripleRecord]) -> Vec<ListRow> {
    let mut sorted = triples.to_vec();
    sorted.sort();
    let mut rows: Vec<ListRow> = Vec::new();
    for t in sorted {
        match rows.last_mut() {
            Some(row) if row.p == t.p && row.q == t.q => row.rs.push(t.r),
            _ => rows.push(ListRow { p: t.p, q: t.q, rs: vec![t.r] }),
        }
    }
    rows
}

/// Upper bound on `prod_{i<j} (x_i - x_j)^2` for `r` points in `[-1, 1]`.
pub fn schur_m(r: u32) -> BigRational {
    let pw = |k: u32| BigInt::from(k).pow(k);
    let num: BigInt = (2..=r).map(pw).product::<BigInt>() * (2..=r.saturating_sub(2)).map(pw).product::<BigInt>();
    let den: BigInt = (3..=(2 * r).saturating_sub(3)).step_by(2).map(pw).product();
    BigRational::new(num, den)
}

pub fn ln_bigint(x: &BigInt) -> f64 {
    let x = x.abs();
    let bits = x.bits();
    let shift = bits.saturating_sub(60);
    let top: BigInt = &x >> shift;
    crate::exact::bigint_to_f64(&top).ln() + shift as f64 * LN_2
}

pub fn ln_rational(x: &BigRational) -> f64 {
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

fn ln_schur(r: u32) -> f64 {
    if r <= 1 {
        return 0.0;
    }
    ln_rational(&schur_m(r))
}

const DN_TABLE: [f64; 19] = [
    3.0,
    27.0,
    275.0,
    4511.0,
    92779.0,
    2306599.0,
    68856875.0,
    0.11063894e10,
    0.31503776e11,
    0.90315026e12,
    0.25891511e14,
    0.74225785e15,
    0.21279048e17,
    0.61002775e18,
    0.17488275e20,
    0.50135388e21,
    0.14372813e23,
    0.41203981e24,
    0.11812357e26,
];

/// Lower bound for `|disc|` of a degree-`n` field with one complex place.
pub fn dn_lower(n: usize) -> Result<f64, SieveError> {
    if (2..=20).contains(&n) {
        Ok(DN_TABLE[n - 2])
    } else {
        Err(SieveError::OutOfRange(n))
    }
}

/// `ln max{1, D_{r mu} / Delta_L^r}`, using 1 past the table.
fn ln_disc_floor(p: u32, q: u32, r: u32, mu: usize) -> f64 {
    match dn_lower(r as usize * mu) {
        Ok(d) => (d.ln() - r as f64 * field_discriminant(p, q).ln()).max(0.0),
        Err(_) => 0.0,
    }
}

fn pairs() -> Vec<(u32, u32)> {
    (MIN_ORDER..=ORDER_CAP)
        .flat_map(|p| (MIN_ORDER..=p).map(move |q| (p, q)))
        .collect()
}

/// Largest `r` permitted by the norm inequality, if at least 2.
pub fn norm_rmax(p: u32, q: u32) -> Option<u32> {
    let (a, b) = (PI / p as f64, PI / q as f64);
    let mu = degree_of(p, q) as f64;
    let rhs = 4.0 * ((a.cos() + b.cos()) / (a.sin() * b.sin())).ln() / (4.0 / delta_pq(p, q)).ln();
    let rmax = (rhs / mu + KEEP_SLACK).floor() as u32;
    (rmax >= 2).then_some(rmax)
}

/// Every `(p, q, r)` with `2 <= r <= r_max` passing the norm inequality.
pub fn norm_sieve() -> Vec<TripleRecord> {
    let mut out: Vec<TripleRecord> = pairs()
        .into_par_iter()
        .filter_map(|(p, q)| norm_rmax(p, q).map(|rm| (p, q, rm)))
        .flat_map_iter(|(p, q, rm)| {
            let mu = degree_of(p, q);
            (2..=rm).map(move |r| TripleRecord { p, q, r, mu, stage: Stage::Norm })
        })
        .collect();
    out.sort();
    out
}

/// `(p, q, r_max)` rows of the norm list.
pub fn norm_table(norm: &[TripleRecord]) -> Vec<(u32, u32, u32)> {
    rows_of(norm)
        .into_iter()
        .map(|row| (row.p, row.q, *row.rs.iter().max().expect("nonempty row")))
        .collect()
}

/// Log of the left side of the discriminant inequality.
pub fn ln_discriminant_lhs(p: u32, q: u32, r: u32, im_max: f64) -> f64 {
    let (c, s) = cs(p, q);
    let mu = degree_of(p, q) as f64;
    let rf = r as f64;
    let two_s2 = (2.0 * s * s).ln();
    let ln_k1 = 4f64.ln()
        + ln_schur(r - 2)
        + 4.0 * (rf - 2.0) * (4.0 * (1.0 + c).powi(2)).ln()
        + (rf - 2.0) * (rf - 3.0) * two_s2
        + 2.0 * im_max.ln();
    ln_k1 - rf * (rf - 1.0) * two_s2 + mu * rf * (rf - 1.0) * (delta_pq(p, q) / 8.0).ln() + (mu - 1.0) * ln_schur(r)
}

pub fn discriminant_keeps(p: u32, q: u32, r: u32, im_max: f64) -> bool {
    let mu = degree_of(p, q);
    ln_discriminant_lhs(p, q, r, im_max) >= ln_disc_floor(p, q, r, mu) - KEEP_SLACK
}

fn im_max_of(p: u32, q: u32, t_grid: usize) -> f64 {
    maximize(|t| omega_point(p, q, t).im.abs(), t_grid)
}

/// Applies the discriminant inequality to the `r >= 3` part of the norm list.
pub fn discriminant_sieve(norm: &[TripleRecord], t_grid: usize) -> Vec<TripleRecord> {
    let rows = rows_of(norm);
    let mut out: Vec<TripleRecord> = rows
        .par_iter()
        .flat_map_iter(|row| {
            let (p, q) = (row.p, row.q);
            let needs = row.rs.iter().any(|&r| r >= 3);
            let im_max = if needs { im_max_of(p, q, t_grid) } else { 0.0 };
            row.rs
                .iter()
                .filter(move |&&r| r >= 3 && discriminant_keeps(p, q, r, im_max))
                .map(move |&r| TripleRecord { p, q, r, mu: degree_of(p, q), stage: Stage::Discriminant })
                .collect::<Vec<_>>()
        })
        .collect();
    out.sort();
    out
}

/// `max_t |2 Im(w) w^2 (w + 4 s^2)^{2(r-2)}|` along the contour.
pub fn k2_core(p: u32, q: u32, r: u32, t_grid: usize) -> f64 {
    let (_, s) = cs(p, q);
    let e = 2 * r.saturating_sub(2) as i32;
    maximize(
        |t| {
            let w = omega_point(p, q, t);
            (2.0 * w.im * w * w * (w + 4.0 * s * s).powi(e)).norm()
        },
        t_grid,
    )
}

/// Log of the left side of the balancing inequality.
pub fn ln_balance_lhs(p: u32, q: u32, r: u32, k2_max: f64) -> f64 {
    let (_, s) = cs(p, q);
    let mu = degree_of(p, q) as f64;
    let rf = r as f64;
    let ln_r = 2.0 * mu * (delta_pq(p, q) / 4.0).ln() - 2.0 * (4.0 * s * s).ln();
    let ln_k2 = if r > 2 {
        0.5 * ln_schur(r - 1) + (rf - 1.0) * (rf - 2.0) / 2.0 * (2.0 * s * s).ln() + k2_max.ln()
    } else {
        k2_max.ln()
    };
    ln_k2 + rf * (rf + 1.0) / 4.0 * ln_r + (mu - 1.0) / 2.0 * (ln_schur(r + 1) - rf * (rf + 1.0) * LN_2)
}

pub fn balance_keeps(p: u32, q: u32, r: u32, t_grid: usize) -> bool {
    let mu = degree_of(p, q);
    let lhs = ln_balance_lhs(p, q, r, k2_core(p, q, r, t_grid));
    lhs >= 0.5 * ln_disc_floor(p, q, r, mu) - KEEP_SLACK
}

/// Balancing inequality on the discriminant list plus every `r = 2` norm pair.
pub fn balance_sieve(disc: &[TripleRecord], norm: &[TripleRecord], t_grid: usize) -> Vec<TripleRecord> {
    let mut input: Vec<(u32, u32, u32)> = norm.iter().filter(|t| t.r == 2).map(|t| (t.p, t.q, 2)).collect();
    input.extend(disc.iter().map(|t| (t.p, t.q, t.r)));
    let mut out: Vec<TripleRecord> = input
        .into_par_iter()
        .filter(|&(p, q, r)| balance_keeps(p, q, r, t_grid))
        .map(|(p, q, r)| TripleRecord { p, q, r, mu: degree_of(p, q), stage: Stage::Aspiring })
        .collect();
    out.sort();
    out
}

/// All three lists in order.
pub struct SieveLists {
    pub norm: Vec<TripleRecord>,
    pub discriminant: Vec<TripleRecord>,
    pub aspiring: Vec<TripleRecord>,
}

pub fn run_sieves(t_grid: usize) -> SieveLists {
    let norm = norm_sieve();
    let discriminant = discriminant_sieve(&norm, t_grid);
    let aspiring = balance_sieve(&discriminant, &norm, t_grid);
    SieveLists { norm, discriminant, aspiring }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn schur_values() {
        assert_eq!(schur_m(3), BigRational::from_integer(BigInt::from(4)));
        assert_eq!(schur_m(4), BigRational::new(BigInt::from(110592), BigInt::from(84375)));
        assert!(schur_m(1).is_one());
        assert!((ln_rational(&schur_m(3)) - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ln_of_huge_integers() {
        let x = BigInt::from(3).pow(500);
        assert!((ln_bigint(&x) - 500.0 * 3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn dn_table() {
        assert_eq!(dn_lower(6), Ok(92779.0));
        assert_eq!(dn_lower(8), Ok(68856875.0));
        assert_eq!(dn_lower(2), Ok(3.0));
        assert_eq!(dn_lower(21), Err(SieveError::OutOfRange(21)));
        assert!(DN_TABLE.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm_rmax(6, 6), Some(5));
        assert_eq!(norm_rmax(7, 7), Some(33));
        assert_eq!(norm_table(&norm_sieve()).len(), 86);
    }
}
