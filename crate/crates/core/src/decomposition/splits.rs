//! The four triangle constructions used by the decomposition.

use num_traits::{One, Signed};

use super::{DecomposeError, SplitRecord};
use crate::geometry::{
    choose_off_line_vertex, line_segment_intersection, locate_point, midpoint, Line,
    PointLocation, Triangle,
};
use crate::point::{Point, Rational};

/// Result of a cut along a cevian `[apex, edge_point]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CevianSplit {
    pub edge_point: Point,
    pub children: [Triangle; 2],
    pub record: SplitRecord,
}

/// Result of cutting off the corner at a vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkSplit {
    pub corner: Triangle,
    pub outer1: Triangle,
    pub outer2: Triangle,
    pub record: SplitRecord,
}

/// `(apex, next, after)` vertices for a 1-based apex index.
fn rotated(t: &Triangle, apex: u8) -> (&Point, &Point, &Point) {
    (t.vertex(apex), t.vertex(apex % 3 + 1), t.vertex((apex + 1) % 3 + 1))
}

fn cevian_children(t: &Triangle, apex: u8, w: &Point) -> Result<[Triangle; 2], DecomposeError> {
    let (z1, z2, z3) = rotated(t, apex);
    Ok([
        Triangle::new(z1.clone(), z2.clone(), w.clone())?,
        Triangle::new(z1.clone(), w.clone(), z3.clone())?,
    ])
}

/// Separate two points of a triangle by the line through a vertex off the
/// line `wi wj` and the midpoint of `wi` and `wj`.
pub fn split_by_two_points(t: &Triangle, wi: &Point, wj: &Point) -> Result<CevianSplit, DecomposeError> {
    if wi == wj {
        return Err(DecomposeError::DegenerateInput(format!("split points coincide at {wi:?}")));
    }
    for w in [wi, wj] {
        if !t.contains(w) {
            return Err(DecomposeError::PointOutside(w.clone()));
        }
    }
    let through_points = Line::new(wi.clone(), wj.clone())?;
    let apex = choose_off_line_vertex(t, &through_points);
    let v = midpoint(wi, wj);
    let (z1, z2, z3) = rotated(t, apex);
    let cut = Line::new(z1.clone(), v.clone())?;
    let w = line_segment_intersection(&cut, z2, z3)?
        .ok_or_else(|| DecomposeError::Internal("cut line misses the opposite edge".into()))?;

    let (si, sj) = (cut.side(wi), cut.side(wj));
    if si == 0 || sj == 0 || si == sj {
        return Err(DecomposeError::Internal(format!(
            "cut through {v:?} does not strictly separate {wi:?} and {wj:?}"
        )));
    }

    let children = cevian_children(t, apex, &w)?;
    Ok(CevianSplit {
        edge_point: w.clone(),
        children,
        record: SplitRecord::TwoPointSplit {
            wi: wi.clone(),
            wj: wj.clone(),
            midpoint: v,
            apex,
            edge_point: w,
        },
    })
}

/// Cut off the corner at vertex `vertex` with the similar triangle of ratio
/// `shrink`, leaving two outer triangles.
pub fn shrink_at_vertex(t: &Triangle, vertex: u8, shrink: &Rational) -> Result<ShrinkSplit, DecomposeError> {
    if !(shrink.is_positive() && *shrink < Rational::one()) {
        return Err(DecomposeError::InvalidShrink(shrink.to_string()));
    }
    let (z1, z2, z3) = rotated(t, vertex);
    let w2 = z1.lerp(z2, shrink);
    let w3 = z1.lerp(z3, shrink);
    Ok(ShrinkSplit {
        corner: Triangle::new(z1.clone(), w2.clone(), w3.clone())?,
        outer1: Triangle::new(w2.clone(), w3.clone(), z3.clone())?,
        outer2: Triangle::new(w2.clone(), z2.clone(), z3.clone())?,
        record: SplitRecord::VertexShrink { vertex, t: shrink.clone(), w2, w3 },
    })
}

/// Split through a point strictly inside an edge and the opposite vertex.
pub fn split_at_edge_point(t: &Triangle, w: &Point) -> Result<CevianSplit, DecomposeError> {
    let edge = match locate_point(t, w) {
        PointLocation::OnEdge(e) => e,
        _ => return Err(DecomposeError::NotOnEdge(w.clone())),
    };
    // edge e runs from vertex e to vertex e+1; the apex is the third vertex
    let (ze, zn, zo) = rotated(t, edge);
    let children = [
        Triangle::new(w.clone(), zn.clone(), zo.clone())?,
        Triangle::new(w.clone(), zo.clone(), ze.clone())?,
    ];
    Ok(CevianSplit {
        edge_point: w.clone(),
        children,
        record: SplitRecord::EdgeSplit { point: w.clone(), edge },
    })
}

/// Split along the cevian from vertex 1 through an interior point.
pub fn split_at_interior_point(t: &Triangle, w: &Point) -> Result<CevianSplit, DecomposeError> {
    if locate_point(t, w) != PointLocation::Interior {
        return Err(DecomposeError::NotInterior(w.clone()));
    }
    let apex = 1;
    let (z1, z2, z3) = rotated(t, apex);
    let ray = Line::new(z1.clone(), w.clone())?;
    let w_edge = line_segment_intersection(&ray, z2, z3)?
        .ok_or_else(|| DecomposeError::Internal("cevian misses the opposite edge".into()))?;
    let children = cevian_children(t, apex, &w_edge)?;
    Ok(CevianSplit {
        edge_point: w_edge.clone(),
        children,
        record: SplitRecord::InteriorSplit { point: w.clone(), apex, edge_point: w_edge },
    })
}
