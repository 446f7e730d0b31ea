//! Certificates that `<f, g>` splits as the free product `Z_p * Z_q`.

use super::mobius::{isometric_circles, normalize_generators, Circle, Mobius, MobiusPair};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

pub const CIRCLE_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    ProvedFree,
    Inconclusive,
}

/// Which combination pattern produced a certificate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Certificate {
    Lens,
    FordDisks { swapped: bool },
    Cells { chart: (f64, f64), rounds: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FreeOutcome {
    pub verdict: Verdict,
    pub level: u8,
    pub certificate: Option<Certificate>,
}

/// Generalized disk: a closed disk or the closed exterior of one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Disk(Circle),
    Exterior(Circle),
}

impl Region {
    pub fn disjoint(&self, other: &Region) -> bool {
        use Region::*;
        match (self, other) {
            (Disk(a), Disk(b)) => (a.center - b.center).norm() > a.radius + b.radius + CIRCLE_MARGIN,
            (Disk(a), Exterior(b)) | (Exterior(b), Disk(a)) => {
                (a.center - b.center).norm() + a.radius < b.radius - CIRCLE_MARGIN
            }
            (Exterior(_), Exterior(_)) => false,
        }
    }
}

/// Image of the closed disk under `m`; `None` when the pole lies on the boundary.
pub fn disk_image(m: &Mobius, disk: &Circle) -> Option<Region> {
    let (c, r) = (disk.center, disk.radius);
    let w = m.c * c + m.d;
    let den = w.norm_sqr() - m.c.norm_sqr() * r * r;
    if den.abs() < 1e-14 * (1.0 + w.norm_sqr()) {
        return None;
    }
    let center = ((m.a * c + m.b) * w.conj() - m.a * m.c.conj() * r * r) / den;
    let radius = r * m.det().norm() / den.abs();
    let circle = Circle { center, radius };
    Some(if den > 0.0 { Region::Disk(circle) } else { Region::Exterior(circle) })
}

fn powers(m: &Mobius, order: u32) -> Vec<Mobius> {
    let mut out = Vec::with_capacity(order as usize);
    let mut acc = *m;
    for _ in 1..order {
        out.push(acc);
        acc = acc.compose(m);
    }
    out
}

/// Level 1: the pair of lenses bounded by the isometric circles separate.
pub fn lens_test(pair: &MobiusPair) -> bool {
    let (p, q) = (pair.p as f64, pair.q as f64);
    let i = Complex64::i();
    let lhs = (i * pair.w / (PI / q).tan() + i / (PI / p).tan()).norm() + pair.w.norm() / (PI / q).sin();
    lhs <= 1.0 / (PI / p).sin() - CIRCLE_MARGIN
}

fn ford_disks(h: &Mobius, order: u32) -> Option<Vec<Circle>> {
    powers(h, order)
        .iter()
        .map(|m| isometric_circles(m).ok().map(|(c, _)| c))
        .collect()
}

/// Every power of `moving` sends the union of Ford disks of `fixed` off itself.
fn ford_pingpong(moving: &Mobius, move_order: u32, fixed: &Mobius, fixed_order: u32) -> bool {
    let Some(disks) = ford_disks(fixed, fixed_order) else {
        return false;
    };
    powers(moving, move_order).iter().all(|m| {
        disks.iter().all(|d| match disk_image(m, d) {
            Some(img) => disks.iter().all(|e| img.disjoint(&Region::Disk(*e))),
            None => false,
        })
    })
}

/// Level 2: Ford-disk ping-pong in either orientation.
pub fn ford_test(pair: &MobiusPair) -> Option<Certificate> {
    if ford_pingpong(&pair.f, pair.p, &pair.g, pair.q) {
        Some(Certificate::FordDisks { swapped: false })
    } else if ford_pingpong(&pair.g, pair.q, &pair.f, pair.p) {
        Some(Certificate::FordDisks { swapped: true })
    } else {
        None
    }
}

/// Cell grid for the invariant-set search, in chart coordinates.
#[derive(Clone, Debug)]
pub struct CellGrid {
    pub half_width: f64,
    pub cells: usize,
    pub max_rounds: usize,
    /// Points sent to infinity by the chart `z -> 1/(z - z0)`.
    pub charts: Vec<Complex64>,
}

impl Default for CellGrid {
    fn default() -> Self {
        let c = Complex64::new;
        CellGrid {
            half_width: 3.0,
            cells: 256,
            max_rounds: 60,
            charts: vec![
                c(0.5, 0.5),
                c(0.5, -0.5),
                c(-0.5, 0.5),
                c(-0.5, -0.5),
                c(0.0, 0.5),
                c(0.0, -0.5),
                c(0.3, 0.0),
                c(-0.3, 0.0),
                c(0.7, 0.2),
                c(0.2, 0.7),
                c(0.2, -0.7),
                c(0.7, -0.2),
            ],
        }
    }
}

struct Cells<'a> {
    grid: &'a CellGrid,
    step: f64,
    reach: f64,
}

impl Cells<'_> {
    fn center(&self, idx: usize) -> Complex64 {
        let (i, j) = (idx / self.grid.cells, idx % self.grid.cells);
        let r = self.grid.half_width;
        Complex64::new(-r + self.step * (i as f64 + 0.5), -r + self.step * (j as f64 + 0.5))
    }

    fn index(&self, x: f64) -> Option<usize> {
        let k = ((x + self.grid.half_width) / self.step).floor();
        (k >= 0.0 && (k as usize) < self.grid.cells).then_some(k as usize)
    }

    /// Marks every cell meeting the disk; `false` if the disk leaves the grid.
    fn mark(&self, disk: &Circle, out: &mut [bool]) -> bool {
        let r = disk.radius + self.reach;
        let c = disk.center;
        let (Some(i0), Some(i1), Some(j0), Some(j1)) = (
            self.index(c.re - r),
            self.index(c.re + r),
            self.index(c.im - r),
            self.index(c.im + r),
        ) else {
            return false;
        };
        for i in i0..=i1 {
            for j in j0..=j1 {
                let idx = i * self.grid.cells + j;
                if (self.center(idx) - c).norm() <= r {
                    out[idx] = true;
                }
            }
        }
        true
    }

    fn images(&self, from: &[bool], maps: &[Mobius], into: &mut [bool]) -> bool {
        for (idx, _) in from.iter().enumerate().filter(|(_, &b)| b) {
            let cell = Circle { center: self.center(idx), radius: self.reach };
            for m in maps {
                match disk_image(m, &cell) {
                    Some(Region::Disk(d)) if self.mark(&d, into) => {}
                    _ => return false,
                }
            }
        }
        true
    }
}

/// Grows `X1 ⊇ f^k(X2)` and `X2 ⊇ g^j(X1)` from a seed until stable; disjoint stable sets certify freeness.
fn cell_pingpong(f: &Mobius, p: u32, g: &Mobius, q: u32, grid: &CellGrid) -> Option<usize> {
    let step = 2.0 * grid.half_width / grid.cells as f64;
    let cells = Cells { grid, step, reach: step / 2f64.sqrt() * (1.0 + 1e-9) + CIRCLE_MARGIN };
    let fs = powers(f, p);
    let gs = powers(g, q);
    let n2 = grid.cells * grid.cells;
    let mut x1 = vec![false; n2];
    for z in fs.iter().filter_map(Mobius::image_of_infinity) {
        if let (Some(i), Some(j)) = (cells.index(z.re), cells.index(z.im)) {
            x1[i * grid.cells + j] = true;
        }
    }
    if !x1.iter().any(|&b| b) {
        return None;
    }
    let mut x2 = vec![false; n2];
    for round in 0..grid.max_rounds {
        let mut n2_set = x2.clone();
        if !cells.images(&x1, &gs, &mut n2_set) {
            return None;
        }
        let mut n1_set = x1.clone();
        if !cells.images(&n2_set, &fs, &mut n1_set) {
            return None;
        }
        if n1_set.iter().zip(&n2_set).any(|(a, b)| *a && *b) {
            return None;
        }
        if n1_set == x1 && n2_set == x2 {
            return Some(round);
        }
        x1 = n1_set;
        x2 = n2_set;
    }
    None
}

/// Level 3: invariant cell sets for ping-pong, tried in each chart.
pub fn cell_test(pair: &MobiusPair, grid: &CellGrid) -> Option<Certificate> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    grid.charts.iter().find_map(|&z0| {
        let chart = Mobius::new(zero, one, one, -z0);
        let back = chart.inverse();
        let conj = |m: &Mobius| chart.compose(m).compose(&back);
        let (f, g) = (conj(&pair.f), conj(&pair.g));
        cell_pingpong(&f, pair.p, &g, pair.q, grid)
            .map(|rounds| Certificate::Cells { chart: (z0.re, z0.im), rounds })
    })
}

/// Runs the tests up to `level`; a certificate at a lower level is kept.
pub fn free_test(p: u32, q: u32, gamma: Complex64, level: u8) -> FreeOutcome {
    let inconclusive = FreeOutcome { verdict: Verdict::Inconclusive, level, certificate: None };
    let Ok(pair) = normalize_generators(p, q, gamma) else {
        return inconclusive;
    };
    let proved = |lvl: u8, c: Certificate| FreeOutcome {
        verdict: Verdict::ProvedFree,
        level: lvl,
        certificate: Some(c),
    };
    if level >= 1 && lens_test(&pair) {
        return proved(1, Certificate::Lens);
    }
    if level >= 2 {
        if let Some(c) = ford_test(&pair) {
            return proved(2, c);
        }
    }
    if level >= 3 {
        if let Some(c) = cell_test(&pair, &CellGrid::default()) {
            return proved(3, c);
        }
    }
    inconclusive
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_image_of_inversion() {
        let m = Mobius::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        let img = disk_image(&m, &Circle { center: Complex64::new(3.0, 0.0), radius: 1.0 }).unwrap();
        match img {
            Region::Disk(c) => {
                assert!((c.center.re - 0.375).abs() < 1e-12 && (c.radius - 0.125).abs() < 1e-12)
            }
            _ => panic!("expected disk"),
        }
        let img = disk_image(&m, &Circle { center: Complex64::new(0.0, 0.0), radius: 0.5 }).unwrap();
        assert!(matches!(img, Region::Exterior(c) if (c.radius - 2.0).abs() < 1e-12));
    }

    #[test]
    fn lens_separates_far_parameter() {
        let out = free_test(3, 3, Complex64::new(-4.0, 4.0), 1);
        assert_eq!(out.verdict, Verdict::ProvedFree);
        assert_eq!(out.certificate, Some(Certificate::Lens));
    }

    #[test]
    fn certificates_persist_across_levels() {
        let g = Complex64::new(-4.0, 4.0);
        for lvl in 1..=3 {
            assert_eq!(free_test(3, 3, g, lvl).verdict, Verdict::ProvedFree);
        }
    }
}
