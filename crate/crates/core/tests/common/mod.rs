//! Property checks shared by the property tests and the acceptance harness.
#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use std::f64::consts::PI;
use twogen::field::{degree_of, delta_pq, FieldElement, FieldSpec};
use twogen::geometry::normalize_generators;
use twogen::invariants::{golden_rows, RESIDUAL_TOL};
use twogen::pipeline::reference;
use twogen::polyfilter::{factorization_test, poly_mul};
use twogen::roots;
use twogen::sieve::schur_m;

pub const HOMOMORPHISM_TOL: f64 = 1e-10;
pub const ROUNDTRIP_TOL: f64 = 1e-9;
pub const NORM_PRODUCT_TOL: f64 = 1e-10;

pub fn runner(cases: u32) -> TestRunner {
    let cfg = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

pub fn aspiring_pairs() -> Vec<(u32, u32)> {
    reference().aspiring_list.iter().map(|(p, q, _)| (*p, *q)).collect()
}

fn element(mu: usize, span: i64) -> impl Strategy<Value = FieldElement> {
    prop::collection::vec(-span..=span, mu).prop_map(FieldElement)
}

fn field_and_pair(span: i64) -> impl Strategy<Value = (usize, FieldElement, FieldElement)> {
    let pairs = aspiring_pairs();
    (0..pairs.len()).prop_flat_map(move |i| {
        let mu = degree_of(pairs[i].0, pairs[i].1);
        (Just(i), element(mu, span), element(mu, span))
    })
}

/// Addition and multiplication commute with every real embedding.
pub fn homomorphism(cases: u32) -> Result<(), String> {
    let fields: Vec<FieldSpec> = aspiring_pairs().iter().map(|&(p, q)| FieldSpec::new(p, q).unwrap()).collect();
    runner(cases)
        .run(&field_and_pair(30), |(i, x, y)| {
            let f = &fields[i];
            let (s, m) = (f.add(&x, &y), f.mul(&x, &y));
            for k in 0..f.mu() {
                let (a, b) = (f.embed(&x, k), f.embed(&y, k));
                let add_err = (f.embed(&s, k) - a - b).abs();
                let mul_err = (f.embed(&m, k) - a * b).abs();
                prop_assert!(add_err <= HOMOMORPHISM_TOL * (1.0 + a.abs() + b.abs()), "sum at place {k}: {add_err:e}");
                prop_assert!(mul_err <= HOMOMORPHISM_TOL * (1.0 + (a * b).abs()), "product at place {k}: {mul_err:e}");
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// The product of the conjugates of `beta1 beta2` is `delta_pq^mu`.
pub fn norm_product_identity() -> Result<(), String> {
    for (p, q) in aspiring_pairs() {
        let f = FieldSpec::new(p, q).map_err(|e| e.to_string())?;
        let b = f.mul(&f.beta1, &f.beta2);
        let prod: f64 = (0..f.mu()).map(|k| f.embed(&b, k)).product();
        let want = delta_pq(p, q).powi(f.mu() as i32);
        let rel = (prod - want).abs() / want;
        if rel >= NORM_PRODUCT_TOL {
            return Err(format!("({p},{q}): {prod} vs {want}"));
        }
    }
    Ok(())
}

/// No sampled configuration in `[-1, 1]^r` beats the closed-form maximum of the squared Vandermonde.
pub fn schur_dominates(cases: u32) -> Result<(), String> {
    for r in 3..=5u32 {
        let bound = twogen::sieve::ln_rational(&schur_m(r)).exp();
        let best = std::cell::Cell::new(0.0f64);
        runner(cases)
            .run(&prop::collection::vec(-1.0f64..=1.0, r as usize), |xs| {
                let mut v = 1.0;
                for i in 0..xs.len() {
                    for j in i + 1..xs.len() {
                        v *= (xs[i] - xs[j]).powi(2);
                    }
                }
                best.set(best.get().max(v));
                prop_assert!(v <= bound * (1.0 + 1e-12), "r = {r}: {v} > {bound}");
                Ok(())
            })
            .map_err(|e| e.to_string())?;
        if best.get() <= 0.0 {
            return Err(format!("r = {r}: no samples"));
        }
    }
    Ok(())
}

/// `gamma -> (w, f, g) -> tr[f,g] - 2` returns `gamma`, and `w` solves the defining relation.
pub fn gamma_roundtrip(cases: u32) -> Result<(), String> {
    let pairs = aspiring_pairs();
    let strat = (0..pairs.len(), -4.0f64..8.0, 0.05f64..8.0);
    runner(cases)
        .run(&strat, |(i, re, im)| {
            let (p, q) = pairs[i];
            let gamma = Complex64::new(re, im);
            let pair = normalize_generators(p, q, gamma).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let scale = 1.0 + gamma.norm();
            let back = pair.gamma();
            prop_assert!((back - gamma).norm() <= ROUNDTRIP_TOL * scale, "commutator {back} vs {gamma}");
            let (sp, sq) = ((PI / p as f64).sin(), (PI / q as f64).sin());
            let from_w = (pair.w - pair.w.inv()).powi(2) * (sp * sp * sq * sq);
            prop_assert!((from_w - gamma).norm() <= ROUNDTRIP_TOL * scale, "w relation {from_w} vs {gamma}");
            for (m, n) in [(pair.f, p), (pair.g, q)] {
                prop_assert!((m.det() - 1.0).norm() <= ROUNDTRIP_TOL);
                prop_assert!((m.trace() - 2.0 * (PI / n as f64).cos()).norm() <= ROUNDTRIP_TOL);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn int_divides(num: &[i64], den: &[i64]) -> bool {
    let mut rem: Vec<i128> = num.iter().map(|&c| c as i128).collect();
    let d = den.len() - 1;
    for top in (d..rem.len()).rev() {
        let c = rem[top];
        for (j, &b) in den.iter().enumerate() {
            rem[top - d + j] -= c * b as i128;
        }
    }
    rem[..d].iter().all(|&c| c == 0)
}

/// Whether a monic integer quartic has a monic integer quadratic divisor, by exhaustive search.
pub fn has_quadratic_divisor(m: &[i64]) -> bool {
    let bound = 1 + m.iter().map(|c| c.abs()).max().unwrap_or(0);
    let cs: Vec<i64> = if m[0] == 0 {
        (-bound * bound..=bound * bound).collect()
    } else {
        (1..=m[0].abs()).filter(|c| m[0] % c == 0).flat_map(|c| [c, -c]).collect()
    };
    cs.iter()
        .any(|&c| (-2 * bound..=2 * bound).any(|b| int_divides(m, &[c, b, 1])))
}

fn separated(f: &FieldSpec, m: &[FieldElement]) -> bool {
    (0..f.mu()).all(|k| {
        let conj: Vec<Complex64> = m.iter().map(|c| Complex64::new(f.embed(c, k), 0.0)).collect();
        let zs = roots::roots(&conj);
        zs.iter()
            .enumerate()
            .all(|(i, a)| zs[i + 1..].iter().all(|b| (a - b).norm() > 1e-3))
    })
}

/// The factorization test agrees with exhaustive divisor search over `Q` and finds planted factors over larger fields.
pub fn factorization_oracle(cases: u32) -> Result<(), String> {
    let half = cases / 2;
    let rational = FieldSpec::new(6, 6).map_err(|e| e.to_string())?;
    let quartic = prop_oneof![
        prop::collection::vec(-8i64..=8, 4),
        (-5i64..=5, -5i64..=5, -5i64..=5, -5i64..=5).prop_map(|(a, b, c, d)| vec![a * c, a * d + b * c, a + c + b * d, b + d]),
    ];
    runner(half)
        .run(&quartic, |low| {
            let mut m = low.clone();
            m.push(1);
            let lifted: Vec<FieldElement> = m.iter().map(|&c| rational.from_int(c)).collect();
            prop_assume!(separated(&rational, &lifted));
            let got = factorization_test(&rational, &lifted).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(got.is_some(), has_quadratic_divisor(&m), "quartic {:?}", m);
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    let pairs = aspiring_pairs();
    let fields: Vec<FieldSpec> = pairs.iter().map(|&(p, q)| FieldSpec::new(p, q).unwrap()).collect();
    let planted = (0..pairs.len()).prop_flat_map(|i| {
        let mu = degree_of(pairs[i].0, pairs[i].1);
        (Just(i), prop::collection::vec(element(mu, 3), 4))
    });
    runner(cases - half)
        .run(&planted, |(i, cs)| {
            let f = &fields[i];
            let a = vec![cs[0].clone(), cs[1].clone(), f.one()];
            let b = vec![cs[2].clone(), cs[3].clone(), f.one()];
            let m = poly_mul(f, &a, &b);
            prop_assume!(separated(f, &m));
            let got = factorization_test(f, &m).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(got.is_some(), "missed planted factor over ({},{})", f.p, f.q);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Every printed reference polynomial vanishes at its printed parameter to print precision.
pub fn golden_residuals() -> Result<(), String> {
    for row in golden_rows() {
        let r = row.residual().map_err(|e| e.to_string())?;
        if r >= RESIDUAL_TOL {
            return Err(format!("row {}: residual {r:e}", row.index));
        }
    }
    Ok(())
}
