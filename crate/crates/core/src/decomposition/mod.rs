//! Recursive decomposition of a triangle against an exceptional set.
//!
//! The recursion mirrors the induction behind the vanishing theorems:
//!
//! * no exceptional point left: analytic leaf;
//! * a single isolated point: singleton leaf (removable singularity);
//! * two or more isolated points, or two or more limit points: cut along the
//!   line through a vertex and the midpoint of the two lexicographically
//!   smallest such points, which separates them strictly;
//! * one limit point: interior points are moved onto an edge, edge points
//!   onto a vertex, and at a vertex the corner of relative size `t` is cut off.
//!   The corner becomes a shrink leaf whose boundary integral is bounded by
//!   `m · t · perimeter`; the two outer triangles hold finitely many points.
//!
//! Every recursion step strictly decreases the measure
//! `(limit points, phase of the single limit, isolated points)` and the engine
//! checks this at runtime.

mod splits;
mod verify;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::exceptional::{characteristic_system, restrict_to_triangle, CharacteristicSystem, ExceptionalSet};
use crate::geometry::{locate_point, on_segment, segment_dist_sqr, GeometryError, PointLocation, Triangle};
use crate::point::{rational_str, rational_to_f64, ratio, Point, Rational};

pub use splits::{
    shrink_at_vertex, split_at_edge_point, split_at_interior_point, split_by_two_points, CevianSplit,
    ShrinkSplit,
};
pub use verify::{verify_certificate, Violation, ViolationKind};

/// Upper bound on halvings when choosing the shrink parameter.
const MAX_SHRINK_HALVINGS: u32 = 2000;

/// Upper bound on perturbations of the shrink parameter.
const MAX_SHRINK_ATTEMPTS: i64 = 2000;

/// Relative resolution at which certificates sample cluster members.
pub const CERTIFICATE_RESOLUTION_RELATIVE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecomposeError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("point {0:?} is not in the closed triangle")]
    PointOutside(Point),
    #[error("point {0:?} is not strictly inside an edge")]
    NotOnEdge(Point),
    #[error("point {0:?} is not interior")]
    NotInterior(Point),
    #[error("shrink parameter {0} is not in (0, 1)")]
    InvalidShrink(String),
    #[error("epsilon budget must be positive and finite, got {0}")]
    BudgetUnderflow(f64),
    #[error("sup bound must be nonnegative and finite, got {0}")]
    InvalidBound(f64),
    #[error("no admissible shrink parameter found at {0:?}")]
    ShrinkExhausted(Triangle),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// How the sup bound `m` behind the shrink leaves was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    Rigorous,
    Empirical,
}

/// The construction used at an internal node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitRecord {
    TwoPointSplit { wi: Point, wj: Point, midpoint: Point, apex: u8, edge_point: Point },
    EdgeSplit { point: Point, edge: u8 },
    InteriorSplit { point: Point, apex: u8, edge_point: Point },
    VertexShrink {
        vertex: u8,
        #[serde(with = "rational_str")]
        t: Rational,
        w2: Point,
        w3: Point,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeContent {
    Analytic,
    Singleton {
        point: Point,
    },
    /// Corner cut off at a limit point; `epsilon = (bound_m · perimeter of the
    /// parent) · t` bounds its boundary integral.
    Shrink {
        #[serde(with = "rational_str")]
        t: Rational,
        bound_m: f64,
        epsilon: f64,
    },
    Internal {
        split: SplitRecord,
        children: Vec<DecompositionNode>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionNode {
    pub triangle: Triangle,
    pub restricted_set: ExceptionalSet,
    pub cs: CharacteristicSystem,
    pub content: NodeContent,
}

impl DecompositionNode {
    pub fn is_leaf(&self) -> bool {
        !matches!(self.content, NodeContent::Internal { .. })
    }

    pub fn children(&self) -> &[DecompositionNode] {
        match &self.content {
            NodeContent::Internal { children, .. } => children,
            _ => &[],
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a DecompositionNode)) {
        visit(self);
        for c in self.children() {
            c.walk(visit);
        }
    }

    /// Number of nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(DecompositionNode::depth).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub root: DecompositionNode,
    pub epsilon_target: f64,
    pub epsilon_total: f64,
    pub m_bound: f64,
    pub m_mode: BoundMode,
    /// Members closer than this to their limit are not sampled by the verifier.
    pub resolution: f64,
}

/// Leaf and node counts of a certificate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub analytic_leaves: usize,
    pub singleton_leaves: usize,
    pub shrink_leaves: usize,
    pub internal_nodes: usize,
    pub depth: usize,
}

impl Certificate {
    pub fn summary(&self) -> CertificateSummary {
        let mut s = CertificateSummary { depth: self.root.depth(), ..Default::default() };
        self.root.walk(&mut |n| match n.content {
            NodeContent::Analytic => s.analytic_leaves += 1,
            NodeContent::Singleton { .. } => s.singleton_leaves += 1,
            NodeContent::Shrink { .. } => s.shrink_leaves += 1,
            NodeContent::Internal { .. } => s.internal_nodes += 1,
        });
        s
    }

    /// Distinct isolated points handled anywhere in the tree.
    pub fn handled_point_count(&self) -> usize {
        let mut seen: Vec<Point> = Vec::new();
        self.root.walk(&mut |n| {
            for p in &n.restricted_set.isolated {
                if !seen.contains(p) {
                    seen.push(p.clone());
                }
            }
        });
        seen.len()
    }

    /// Canonical JSON text.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialises")
    }
}

/// Recursion measure; compared lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Measure {
    limits: usize,
    phase: u8,
    isolated: usize,
}

impl Measure {
    fn of(t: &Triangle, y: &ExceptionalSet) -> Self {
        let phase = match y.clusters.as_slice() {
            [only] => match locate_point(t, &only.limit) {
                PointLocation::Interior => 2,
                PointLocation::OnEdge(_) => 1,
                _ => 0,
            },
            _ => 0,
        };
        Measure { limits: y.clusters.len(), phase, isolated: y.isolated.len() }
    }
}

/// Decompose `t` against `x`, budgeting `epsilon_target` across shrink leaves.
///
/// `m_bound` must dominate `|f|` on the closed triangle for the certificate's
/// bound to apply to `f`.
pub fn decompose(
    t: &Triangle,
    x: &ExceptionalSet,
    epsilon_target: f64,
    m_bound: f64,
    m_mode: BoundMode,
) -> Result<Certificate, DecomposeError> {
    if !(epsilon_target > 0.0 && epsilon_target.is_finite()) {
        return Err(DecomposeError::BudgetUnderflow(epsilon_target));
    }
    if !(m_bound >= 0.0 && m_bound.is_finite()) {
        return Err(DecomposeError::InvalidBound(m_bound));
    }
    let engine = Engine { m_bound };
    let y = restrict_to_triangle(x, t);
    let root = engine.build(t.clone(), y, epsilon_target, None)?;
    let mut epsilon_total = 0.0;
    root.walk(&mut |n| {
        if let NodeContent::Shrink { epsilon, .. } = n.content {
            epsilon_total += epsilon;
        }
    });
    Ok(Certificate {
        root,
        epsilon_target,
        epsilon_total,
        m_bound,
        m_mode,
        resolution: CERTIFICATE_RESOLUTION_RELATIVE * t.diameter(),
    })
}

struct Engine {
    m_bound: f64,
}

impl Engine {
    fn build(
        &self,
        t: Triangle,
        y: ExceptionalSet,
        budget: f64,
        parent: Option<Measure>,
    ) -> Result<DecompositionNode, DecomposeError> {
        let measure = Measure::of(&t, &y);
        if let Some(p) = parent {
            if measure >= p {
                return Err(DecomposeError::Internal(format!(
                    "recursion measure did not decrease: {p:?} -> {measure:?} at {t:?}"
                )));
            }
        }
        let cs = characteristic_system(&y);
        let leaf = |content| Ok(DecompositionNode { triangle: t.clone(), restricted_set: y.clone(), cs, content });

        match cs {
            CharacteristicSystem::Empty => leaf(NodeContent::Analytic),
            CharacteristicSystem::System { k: 0, n: 1 } => {
                leaf(NodeContent::Singleton { point: y.isolated[0].clone() })
            }
            CharacteristicSystem::System { k: 0, .. } => {
                // isolated points are kept in lexicographic order
                let split = split_by_two_points(&t, &y.isolated[0], &y.isolated[1])?;
                self.cevian(t, y, cs, split, budget, measure)
            }
            CharacteristicSystem::System { n, .. } if n >= 2 => {
                let mut limits = y.limits();
                limits.sort_by(Point::lex_cmp);
                let split = split_by_two_points(&t, &limits[0], &limits[1])?;
                self.cevian(t, y, cs, split, budget, measure)
            }
            CharacteristicSystem::System { .. } => {
                let w = y.clusters[0].limit.clone();
                match locate_point(&t, &w) {
                    PointLocation::Interior => {
                        let split = split_at_interior_point(&t, &w)?;
                        self.cevian(t, y, cs, split, budget, measure)
                    }
                    PointLocation::OnEdge(_) => {
                        let split = split_at_edge_point(&t, &w)?;
                        self.cevian(t, y, cs, split, budget, measure)
                    }
                    PointLocation::AtVertex(v) => self.shrink(t, y, cs, v, budget, measure),
                    PointLocation::Outside => Err(DecomposeError::Internal(
                        "restricted set has a limit outside its triangle".into(),
                    )),
                }
            }
        }
    }

    fn cevian(
        &self,
        t: Triangle,
        y: ExceptionalSet,
        cs: CharacteristicSystem,
        split: CevianSplit,
        budget: f64,
        measure: Measure,
    ) -> Result<DecompositionNode, DecomposeError> {
        let restricted: Vec<(Triangle, ExceptionalSet)> = split
            .children
            .into_iter()
            .map(|c| {
                let yc = restrict_to_triangle(&y, &c);
                (c, yc)
            })
            .collect();
        // budget follows the limit points; a limit on the cut is counted twice
        let total_limits: usize = restricted.iter().map(|(_, yc)| yc.clusters.len()).sum();
        let children = restricted
            .into_iter()
            .map(|(c, yc)| {
                let share = if total_limits == 0 {
                    0.0
                } else {
                    budget * yc.clusters.len() as f64 / total_limits as f64
                };
                self.build(c, yc, share, Some(measure))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DecompositionNode {
            triangle: t,
            restricted_set: y,
            cs,
            content: NodeContent::Internal { split: split.record, children },
        })
    }

    fn shrink(
        &self,
        t: Triangle,
        y: ExceptionalSet,
        cs: CharacteristicSystem,
        vertex: u8,
        budget: f64,
        measure: Measure,
    ) -> Result<DecompositionNode, DecomposeError> {
        if !(budget > 0.0 && budget.is_finite()) {
            return Err(DecomposeError::BudgetUnderflow(budget));
        }
        let mp = self.m_bound * t.perimeter();
        let (mut shrink, mut shrink_f) = (ratio(1, 2), 0.5f64);
        let mut halvings = 0;
        // the corners are nested, so the isolated points can be cleared first
        while mp * shrink_f > budget || corner_holds_isolated(&t, vertex, &shrink, &y)? {
            shrink *= ratio(1, 2);
            shrink_f *= 0.5;
            halvings += 1;
            if halvings > MAX_SHRINK_HALVINGS {
                return Err(DecomposeError::ShrinkExhausted(t));
            }
        }
        // perturb along t0 * 2 / (i + 2) until no point sits on a cut
        let base = shrink;
        let mut attempt = 0i64;
        let (split, shrink) = loop {
            let candidate = &base * ratio(2, attempt + 2);
            let split = shrink_at_vertex(&t, vertex, &candidate)?;
            if shrink_is_admissible(&split, &y) {
                break (split, candidate);
            }
            attempt += 1;
            if attempt > MAX_SHRINK_ATTEMPTS {
                return Err(DecomposeError::ShrinkExhausted(t));
            }
        };
        let shrink_f = rational_to_f64(&shrink);

        let corner_set = restrict_to_triangle(&y, &split.corner);
        let corner = DecompositionNode {
            cs: characteristic_system(&corner_set),
            triangle: split.corner.clone(),
            restricted_set: corner_set,
            content: NodeContent::Shrink { t: shrink, bound_m: self.m_bound, epsilon: mp * shrink_f },
        };
        let mut children = vec![corner];
        for outer in [split.outer1, split.outer2] {
            let yo = restrict_to_triangle(&y, &outer);
            children.push(self.build(outer, yo, 0.0, Some(measure))?);
        }
        Ok(DecompositionNode {
            triangle: t,
            restricted_set: y,
            cs,
            content: NodeContent::Internal { split: split.record, children },
        })
    }
}

fn corner_holds_isolated(
    t: &Triangle,
    vertex: u8,
    shrink: &Rational,
    y: &ExceptionalSet,
) -> Result<bool, DecomposeError> {
    if y.isolated.is_empty() {
        return Ok(false);
    }
    let corner = shrink_at_vertex(t, vertex, shrink)?.corner;
    Ok(y.isolated.iter().any(|p| corner.contains(p)))
}

/// The corner must hold nothing but the vertex cluster, and no cluster member
/// may sit on the two new internal edges. Isolated points on the outer cut are
/// allowed: they simply belong to both outer triangles.
fn shrink_is_admissible(split: &ShrinkSplit, y: &ExceptionalSet) -> bool {
    if y.isolated.iter().any(|p| split.corner.contains(p)) {
        return false;
    }
    let (w2, w3) = match &split.record {
        SplitRecord::VertexShrink { w2, w3, .. } => (w2, w3),
        _ => unreachable!(),
    };
    // the third vertex of outer1 other than w2, w3
    let z3 = split
        .outer1
        .vertices()
        .iter()
        .find(|v| *v != w2 && *v != w3)
        .expect("outer1 has a third vertex");
    let cuts = [(w2, w3), (w2, z3)];
    for c in &y.clusters {
        let reach = cuts
            .iter()
            .map(|(a, b)| segment_dist_sqr(&c.limit, a, b))
            .min()
            .expect("two cuts");
        if reach.is_zero() {
            return false;
        }
        let hit = c
            .members_at_least(&reach)
            .iter()
            .any(|(_, p)| cuts.iter().any(|(a, b)| on_segment(p, a, b)));
        if hit {
            return false;
        }
    }
    true
}
