//! Exact predicates and constructions on points, lines, segments and triangles.
//!
//! Every predicate on [`Point`] is decided in exact rational arithmetic. The
//! only floating-point entry points are [`orientation_of`] on mixed backings and
//! [`locate_point_approx`], which snaps near-boundary queries within
//! [`GEO_SNAP_RELATIVE`] times the triangle diameter.

use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::point::{rational_to_f64, sign, ComplexPoint, Point, Rational};

/// Snap tolerance for float-backed location queries, relative to the diameter.
pub const GEO_SNAP_RELATIVE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("triangle vertices {0:?}, {1:?}, {2:?} are collinear")]
    DegenerateTriangle(Point, Point, Point),
    #[error("line needs two distinct points, got {0:?} twice")]
    DegenerateLine(Point),
    #[error("segment endpoints coincide at {0:?}")]
    DegenerateSegment(Point),
    #[error("segment [{0:?}, {1:?}] lies on the line")]
    CollinearOverlap(Point, Point),
}

/// Sign of the cross product `(b - a) x (c - a)`: +1 counter-clockwise,
/// 0 collinear, -1 clockwise.
pub fn orientation(a: &Point, b: &Point, c: &Point) -> i8 {
    sign(&orient_value(a, b, c))
}

/// Twice the signed area of `(a, b, c)`.
pub fn orient_value(a: &Point, b: &Point, c: &Point) -> Rational {
    b.sub(a).cross(&c.sub(a))
}

/// Orientation for tagged points; exact when all three are exact.
pub fn orientation_of(a: &ComplexPoint, b: &ComplexPoint, c: &ComplexPoint) -> i8 {
    match (a, b, c) {
        (ComplexPoint::Exact(a), ComplexPoint::Exact(b), ComplexPoint::Exact(c)) => {
            orientation(a, b, c)
        }
        _ => {
            let (a, b, c) = (a.to_complex(), b.to_complex(), c.to_complex());
            let v = (b - a).re * (c - a).im - (b - a).im * (c - a).re;
            if v > 0.0 {
                1
            } else if v < 0.0 {
                -1
            } else {
                0
            }
        }
    }
}

pub fn midpoint(a: &Point, b: &Point) -> Point {
    a.midpoint(b)
}

/// Exact squared distance from `p` to the closed segment `[a, b]`.
pub fn segment_dist_sqr(p: &Point, a: &Point, b: &Point) -> Rational {
    let ab = b.sub(a);
    let len2 = ab.norm_sqr();
    if len2.is_zero() {
        return p.dist_sqr(a);
    }
    let s = p.sub(a).dot(&ab) / &len2;
    if !s.is_positive() {
        p.dist_sqr(a)
    } else if s >= Rational::one() {
        p.dist_sqr(b)
    } else {
        p.dist_sqr(&a.lerp(b, &s))
    }
}

/// Whether `p` lies on the closed segment `[a, b]`.
pub fn on_segment(p: &Point, a: &Point, b: &Point) -> bool {
    if orientation(a, b, p) != 0 {
        return false;
    }
    let ap = p.sub(a);
    let ab = b.sub(a);
    let d = ap.dot(&ab);
    !d.is_negative() && d <= ab.norm_sqr()
}

/// An infinite line through two distinct points.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Line {
    p: Point,
    q: Point,
}

impl Line {
    pub fn new(p: Point, q: Point) -> Result<Self, GeometryError> {
        if p == q {
            return Err(GeometryError::DegenerateLine(p));
        }
        Ok(Line { p, q })
    }

    pub fn p(&self) -> &Point {
        &self.p
    }

    pub fn q(&self) -> &Point {
        &self.q
    }

    /// Which side of the line `x` is on.
    pub fn side(&self, x: &Point) -> i8 {
        orientation(&self.p, &self.q, x)
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.side(x) == 0
    }
}

impl fmt::Debug for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Line[{:?} -> {:?}]", self.p, self.q)
    }
}

/// Intersection of a line with the closed segment `[a, b]`.
///
/// `None` when both endpoints lie strictly on the same side.
pub fn line_segment_intersection(
    l: &Line,
    a: &Point,
    b: &Point,
) -> Result<Option<Point>, GeometryError> {
    if a == b {
        return Err(GeometryError::DegenerateSegment(a.clone()));
    }
    let da = orient_value(&l.p, &l.q, a);
    let db = orient_value(&l.p, &l.q, b);
    match (sign(&da), sign(&db)) {
        (0, 0) => Err(GeometryError::CollinearOverlap(a.clone(), b.clone())),
        (0, _) => Ok(Some(a.clone())),
        (_, 0) => Ok(Some(b.clone())),
        (sa, sb) if sa == sb => Ok(None),
        _ => {
            let s = &da / (&da - &db);
            Ok(Some(a.lerp(b, &s)))
        }
    }
}

/// Where a query point sits relative to a closed triangle.
///
/// Edge `e` joins vertex `e` to vertex `e % 3 + 1`; indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointLocation {
    Outside,
    Interior,
    OnEdge(u8),
    AtVertex(u8),
}

impl PointLocation {
    pub fn is_inside(self) -> bool {
        !matches!(self, PointLocation::Outside)
    }
}

/// A non-degenerate triangle, normalised to counter-clockwise order.
///
/// Clockwise input is fixed by swapping the second and third vertices; the
/// swap is recorded.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triangle {
    vertices: [Point; 3],
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    swapped: bool,
}

impl Triangle {
    pub fn new(v1: Point, v2: Point, v3: Point) -> Result<Self, GeometryError> {
        match orientation(&v1, &v2, &v3) {
            0 => Err(GeometryError::DegenerateTriangle(v1, v2, v3)),
            1 => Ok(Triangle { vertices: [v1, v2, v3], swapped: false }),
            _ => Ok(Triangle { vertices: [v1, v3, v2], swapped: true }),
        }
    }

    pub fn from_array(v: [Point; 3]) -> Result<Self, GeometryError> {
        let [a, b, c] = v;
        Triangle::new(a, b, c)
    }

    pub fn vertices(&self) -> &[Point; 3] {
        &self.vertices
    }

    /// Vertex by 1-based index.
    pub fn vertex(&self, index: u8) -> &Point {
        &self.vertices[(index as usize - 1) % 3]
    }

    /// True when construction reversed the given vertex order.
    pub fn was_swapped(&self) -> bool {
        self.swapped
    }

    /// Endpoints of edge `e` (1-based), in boundary order.
    pub fn edge(&self, e: u8) -> (&Point, &Point) {
        let i = (e as usize - 1) % 3;
        (&self.vertices[i], &self.vertices[(i + 1) % 3])
    }

    /// Directed boundary edges in counter-clockwise order.
    pub fn directed_edges(&self) -> [(Point, Point); 3] {
        let [a, b, c] = &self.vertices;
        [(a.clone(), b.clone()), (b.clone(), c.clone()), (c.clone(), a.clone())]
    }

    /// Exact area.
    pub fn area(&self) -> Rational {
        let [a, b, c] = &self.vertices;
        orient_value(a, b, c) / Rational::from_integer(2.into())
    }

    /// Sum of the three edge lengths.
    pub fn perimeter(&self) -> f64 {
        let [a, b, c] = &self.vertices;
        a.dist(b) + b.dist(c) + c.dist(a)
    }

    /// Longest edge length.
    pub fn diameter(&self) -> f64 {
        let [a, b, c] = &self.vertices;
        a.dist(b).max(b.dist(c)).max(c.dist(a))
    }

    pub fn centroid(&self) -> Point {
        let [a, b, c] = &self.vertices;
        a.add(b).add(c).scale(&crate::point::ratio(1, 3))
    }

    pub fn contains(&self, p: &Point) -> bool {
        locate_point(self, p).is_inside()
    }

    pub fn has_vertex(&self, p: &Point) -> Option<u8> {
        self.vertices.iter().position(|v| v == p).map(|i| i as u8 + 1)
    }

    /// Exact squared distance from `p` to the closed region (0 inside).
    pub fn dist_sqr(&self, p: &Point) -> Rational {
        if self.contains(p) {
            Rational::zero()
        } else {
            self.boundary_dist_sqr(p)
        }
    }

    /// Exact squared distance from `p` to the boundary.
    pub fn boundary_dist_sqr(&self, p: &Point) -> Rational {
        (1..=3)
            .map(|e| {
                let (a, b) = self.edge(e);
                segment_dist_sqr(p, a, b)
            })
            .min()
            .expect("three edges")
    }

    pub fn to_complex(&self) -> [Complex64; 3] {
        let [a, b, c] = &self.vertices;
        [a.to_complex(), b.to_complex(), c.to_complex()]
    }
}

impl fmt::Debug for Triangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = &self.vertices;
        write!(f, "△[{a:?}, {b:?}, {c:?}]")
    }
}

fn classify(signs: [i8; 3]) -> PointLocation {
    if signs.iter().any(|&s| s < 0) {
        return PointLocation::Outside;
    }
    let zeros: Vec<usize> = (0..3).filter(|&i| signs[i] == 0).collect();
    match zeros.as_slice() {
        [] => PointLocation::Interior,
        [e] => PointLocation::OnEdge(*e as u8 + 1),
        // edges e and e+1 meet at vertex e+1
        [0, 1] => PointLocation::AtVertex(2),
        [1, 2] => PointLocation::AtVertex(3),
        [0, 2] => PointLocation::AtVertex(1),
        _ => unreachable!("non-degenerate triangle has no point on all three edge lines"),
    }
}

/// Exact classification of `p` against the closed triangle.
pub fn locate_point(t: &Triangle, p: &Point) -> PointLocation {
    let [a, b, c] = &t.vertices;
    classify([orientation(a, b, p), orientation(b, c, p), orientation(c, a, p)])
}

/// Float classification with a snap band of `GEO_SNAP_RELATIVE * diameter`.
///
/// Meant for ad-hoc queries only; the decomposition engine never uses it.
pub fn locate_point_approx(t: &Triangle, p: Complex64) -> PointLocation {
    let delta = GEO_SNAP_RELATIVE * t.diameter();
    let v = t.to_complex();
    for (i, vi) in v.iter().enumerate() {
        if (p - vi).norm() <= delta {
            return PointLocation::AtVertex(i as u8 + 1);
        }
    }
    let mut signs = [0i8; 3];
    for i in 0..3 {
        let a = v[i];
        let b = v[(i + 1) % 3];
        let e = b - a;
        let d = (e.re * (p - a).im - e.im * (p - a).re) / e.norm();
        signs[i] = if d.abs() <= delta {
            0
        } else if d > 0.0 {
            1
        } else {
            -1
        };
    }
    classify(signs)
}

/// Smallest vertex index (1-based) not lying on `l`.
pub fn choose_off_line_vertex(t: &Triangle, l: &Line) -> u8 {
    (1..=3)
        .find(|&i| !l.contains(t.vertex(i)))
        .expect("a line holds at most two vertices of a non-degenerate triangle")
}

/// Perimeter of a triangle.
pub fn perimeter(t: &Triangle) -> f64 {
    t.perimeter()
}

/// Convert an exact squared length to a float length.
pub fn sqrt_len(r: &Rational) -> f64 {
    rational_to_f64(r).sqrt()
}
