use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::decomposition::{Certificate, DecompositionNode, NodeContent, SplitRecord};
use crate::exceptional::realize_points;
use crate::geometry::Triangle;
use crate::point::Point;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;

const FILL_ANALYTIC: &str = "#e3eefa";
const FILL_SINGLETON: &str = "#fbe3c0";
const FILL_SHRINK: &str = "#f4b8b8";

/// Maps plane coordinates onto the canvas, y pointing up.
struct View {
    x0: f64,
    y1: f64,
    scale: f64,
}

impl View {
    fn fit(t: &Triangle) -> View {
        let v = t.to_complex();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for z in v {
            x0 = x0.min(z.re);
            x1 = x1.max(z.re);
            y0 = y0.min(z.im);
            y1 = y1.max(z.im);
        }
        let extent = (x1 - x0).max(y1 - y0);
        View { x0, y1, scale: (SIZE - 2.0 * MARGIN) / extent }
    }

    fn map(&self, z: Complex64) -> (f64, f64) {
        (MARGIN + (z.re - self.x0) * self.scale, MARGIN + (self.y1 - z.im) * self.scale)
    }

    fn point(&self, p: &Point) -> (f64, f64) {
        self.map(p.to_complex())
    }
}

fn polygon(out: &mut String, view: &View, t: &Triangle, fill: &str) {
    let pts: Vec<String> = t
        .to_complex()
        .iter()
        .map(|&z| {
            let (x, y) = view.map(z);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    let _ = writeln!(
        out,
        r##"  <polygon points="{}" fill="{fill}" stroke="#333333" stroke-width="0.8"/>"##,
        pts.join(" ")
    );
}

fn dashed(out: &mut String, view: &View, a: &Point, b: &Point) {
    let ((x1, y1), (x2, y2)) = (view.point(a), view.point(b));
    let _ = writeln!(
        out,
        r##"  <line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="#1f4e9c" stroke-width="1" stroke-dasharray="5,3"/>"##
    );
}

fn leaves(out: &mut String, view: &View, n: &DecompositionNode) {
    match &n.content {
        NodeContent::Analytic => polygon(out, view, &n.triangle, FILL_ANALYTIC),
        NodeContent::Singleton { .. } => polygon(out, view, &n.triangle, FILL_SINGLETON),
        NodeContent::Shrink { .. } => polygon(out, view, &n.triangle, FILL_SHRINK),
        NodeContent::Internal { children, .. } => {
            for c in children {
                leaves(out, view, c);
            }
        }
    }
}

fn split_lines(out: &mut String, view: &View, n: &DecompositionNode) {
    let NodeContent::Internal { split, children } = &n.content else {
        return;
    };
    let t = &n.triangle;
    match split {
        SplitRecord::TwoPointSplit { apex, edge_point, .. } | SplitRecord::InteriorSplit { apex, edge_point, .. } => {
            dashed(out, view, t.vertex(*apex), edge_point)
        }
        SplitRecord::EdgeSplit { point, edge } => dashed(out, view, point, t.vertex((*edge + 1) % 3 + 1)),
        SplitRecord::VertexShrink { vertex, w2, w3, .. } => {
            dashed(out, view, w2, w3);
            dashed(out, view, w2, t.vertex((*vertex + 1) % 3 + 1));
        }
    }
    for c in children {
        split_lines(out, view, c);
    }
}

/// SVG text of a certificate: leaves filled by kind, split segments dashed,
/// exceptional points as dots. Identical input gives identical bytes.
pub fn svg_string(c: &Certificate) -> String {
    let view = View::fit(&c.root.triangle);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r##"  <rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(out, r#"  <g id="leaves">"#);
    leaves(&mut out, &view, &c.root);
    let _ = writeln!(out, "  </g>\n  <g id=\"splits\">");
    split_lines(&mut out, &view, &c.root);
    let _ = writeln!(out, "  </g>\n  <g id=\"points\">");
    let limits = c.root.restricted_set.limits();
    for p in realize_points(&c.root.restricted_set, &c.root.triangle, c.resolution) {
        let (x, y) = view.point(&p);
        let r = if limits.contains(&p) { 3.5 } else { 2.0 };
        let _ = writeln!(out, r##"    <circle cx="{x:.3}" cy="{y:.3}" r="{r}" fill="#b01818"/>"##);
    }
    let _ = writeln!(out, "  </g>");
    // the outer boundary on top
    let _ = writeln!(out, r#"  <g id="outline">"#);
    polygon(&mut out, &view, &c.root.triangle, "none");
    let _ = writeln!(out, "  </g>\n</svg>");
    out
}

pub fn render_svg(c: &Certificate, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, svg_string(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{decompose, BoundMode};
    use crate::exceptional::ExceptionalSet;

    fn t() -> Triangle {
        Triangle::new(Point::int(0, 0), Point::int(4, 0), Point::int(0, 4)).unwrap()
    }

    #[test]
    fn analytic_certificate_is_one_outline() {
        let c = decompose(&t(), &ExceptionalSet::empty(), 1e-10, 1.0, BoundMode::Rigorous).unwrap();
        let s = svg_string(&c);
        assert_eq!(s.matches("<polygon").count(), 2);
        assert_eq!(s.matches("<line").count(), 0);
        assert_eq!(s.matches("<circle").count(), 0);
    }

    #[test]
    fn two_points_give_one_cevian() {
        let x = ExceptionalSet::finite(vec![Point::int(1, 1), Point::int(1, 2)]);
        let c = decompose(&t(), &x, 1e-10, 1.0, BoundMode::Rigorous).unwrap();
        let s = svg_string(&c);
        assert_eq!(s.matches("<line").count(), 1);
        assert_eq!(s.matches(FILL_SINGLETON).count(), 2);
        assert_eq!(s.matches("<circle").count(), 2);
        assert_eq!(s, svg_string(&c));
    }
}
