//! Stroke-only SVG of isometric circles and their images, one layer per group element.

use super::free::{disk_image, Region};
use super::mobius::{isometric_circles, Circle, Mobius, MobiusPair};
use num_complex::Complex64;
use std::fmt::Write;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Layer {
    pub label: String,
    pub circles: Vec<Circle>,
}

fn powers(m: &Mobius, order: u32) -> Vec<Mobius> {
    (1..order).map(|k| m.pow(k)).collect()
}

/// Ford circles of both generators and the images of `g`'s circles under powers of `f`.
pub fn layers(pair: &MobiusPair) -> Vec<Layer> {
    let circles_of = |ms: &[Mobius]| -> Vec<Circle> {
        ms.iter()
            .filter_map(|m| isometric_circles(m).ok())
            .flat_map(|(a, b)| [a, b])
            .collect()
    };
    let fp = powers(&pair.f, pair.p);
    let gp = powers(&pair.g, pair.q);
    let mut out = vec![
        Layer { label: "f".into(), circles: circles_of(&fp) },
        Layer { label: "g".into(), circles: circles_of(&gp) },
    ];
    let base = circles_of(&gp[..1]);
    for (k, m) in fp.iter().enumerate() {
        let circles = base
            .iter()
            .filter_map(|c| match disk_image(m, c) {
                Some(Region::Disk(d)) | Some(Region::Exterior(d)) => Some(d),
                None => None,
            })
            .collect();
        out.push(Layer { label: format!("f^{}(I(g))", k + 1), circles });
    }
    out
}

pub fn render(layers: &[Layer]) -> String {
    let finite: Vec<&Circle> = layers
        .iter()
        .flat_map(|l| &l.circles)
        .filter(|c| c.radius.is_finite() && c.radius < 1e3)
        .collect();
    let (mut x0, mut y0, mut x1, mut y1) = (-1.0f64, -1.0f64, 1.0f64, 1.0f64);
    for c in &finite {
        x0 = x0.min(c.center.re - c.radius);
        x1 = x1.max(c.center.re + c.radius);
        y0 = y0.min(-c.center.im - c.radius);
        y1 = y1.max(-c.center.im + c.radius);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0);
    let (w, h) = (x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let stroke = w.max(h) / 800.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="800" height="{}">"#,
        x0 - pad,
        y0 - pad,
        w,
        h,
        (800.0 * h / w).round()
    );
    for (i, layer) in layers.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<g id="layer{i}" stroke="{color}" fill="none" stroke-width="{stroke}"><title>{}</title>"#,
            layer.label
        );
        for c in &layer.circles {
            let _ = writeln!(
                s,
                r#"<circle cx="{}" cy="{}" r="{}"/>"#,
                c.center.re, -c.center.im, c.radius
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

/// Open polylines, one layer each, with `y` flipped so the upper half plane is up.
pub fn render_paths(paths: &[(String, Vec<Complex64>)]) -> String {
    let pts = paths.iter().flat_map(|(_, v)| v);
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for z in pts {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(-z.im);
        y1 = y1.max(-z.im);
    }
    if x0 > x1 {
        (x0, y0, x1, y1) = (-1.0, -1.0, 1.0, 1.0);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-9);
    let (w, h) = (x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let stroke = w.max(h) / 800.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="800" height="{}">"#,
        x0 - pad,
        y0 - pad,
        w,
        h,
        (800.0 * h / w).round()
    );
    for (i, (label, pts)) in paths.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|z| format!("{},{}", z.re, -z.im)).collect();
        let _ = writeln!(
            s,
            r#"<g id="layer{i}" stroke="{color}" fill="none" stroke-width="{stroke}"><title>{label}</title>"#
        );
        let _ = writeln!(s, r#"<polyline points="{}"/>"#, coords.join(" "));
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::normalize_generators;

    #[test]
    fn renders_all_layers() {
        let pair = normalize_generators(6, 6, Complex64::new(-1.0, 1.0)).unwrap();
        let ls = layers(&pair);
        assert_eq!(ls.len(), 2 + 5);
        let svg = render(&ls);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<g ").count(), 7);
        assert!(!svg.contains("fill=\"#"));
    }

    #[test]
    fn polylines() {
        let pts = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 2.0)];
        let svg = render_paths(&[("a".into(), pts.clone()), ("b".into(), pts)]);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("1,-2"));
    }
}
