//! SVG pictures of domains and paths.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::lattice::LatticeDomain;

/// The boundary with the positive arc drawn bold and the negative arc dashed,
/// the start and end edges marked, and an optional path on top.
pub fn render(domain: &LatticeDomain, path: Option<&[Complex64]>) -> String {
    let poly = domain.polygon();
    let (mut lo, mut hi) = (poly[0], poly[0]);
    for z in &poly {
        lo = Complex64::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = Complex64::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    let margin = 1.0;
    let (w, h) = (hi.re - lo.re + 2.0 * margin, hi.im - lo.im + 2.0 * margin);
    let scale = (800.0 / w).min(800.0 / h);
    // SVG has y pointing down.
    let map = |z: Complex64| ((z.re - lo.re + margin) * scale, (hi.im - z.im + margin) * scale);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.1}" height="{:.1}" viewBox="0 0 {:.1} {:.1}">"#,
        w * scale,
        h * scale,
        w * scale,
        h * scale
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let cycle = domain.boundary_cycle();
    let n = cycle.len();
    for i in 0..n {
        let (u, v) = (cycle[i], cycle[(i + 1) % n]);
        let (x1, y1) = map(u.embed());
        let (x2, y2) = map(v.embed());
        let (hu, hv) = (domain.h0(u), domain.h0(v));
        let style = match (hu, hv) {
            (Some(1), Some(1)) => r#"stroke="black" stroke-width="3""#,
            (Some(0), Some(0)) => r#"stroke="black" stroke-width="1" stroke-dasharray="4 3""#,
            _ => r#"stroke="red" stroke-width="2""#,
        };
        let _ = writeln!(s, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" {style}/>"#);
    }
    for (m, colour) in [(domain.v_start(), "green"), (domain.v_end(), "blue")] {
        let (x, y) = map(m.position());
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="{colour}"/>"#, 0.3 * scale);
    }
    if let Some(path) = path {
        let pts: Vec<String> = path
            .iter()
            .map(|&z| {
                let (x, y) = map(z);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="orange" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bold_and_dashed_arcs() {
        let d = LatticeDomain::build_box(8, 4, 3).unwrap();
        let svg = render(&d, Some(&[d.v_start().position(), d.v_end().position()]));
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(r#"stroke-width="3""#));
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("<polyline"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
