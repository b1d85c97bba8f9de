//! Independent re-check of a decomposition certificate.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{
    shrink_at_vertex, split_at_edge_point, split_at_interior_point, split_by_two_points,
    Certificate, CevianSplit, DecompositionNode, NodeContent, SplitRecord,
};
use crate::exceptional::{characteristic_system, realize_points, restrict_to_triangle, CharacteristicSystem, ExceptionalSet};
use crate::geometry::{on_segment, Triangle};
use crate::point::{rational_to_f64, Point, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Children do not tile the parent.
    TilingViolation,
    /// Wrong number or kind of children for the recorded split.
    StructureViolation,
    /// Children do not reproduce the recorded construction.
    SplitMismatch,
    /// A sampled point of the parent lies in no child.
    CoverageViolation,
    /// Stored restricted set or characteristic system is wrong.
    RestrictionMismatch,
    /// Leaf kind does not match its restricted set.
    LeafKindViolation,
    /// A shrink leaf's bound does not recompute.
    BoundMismatch,
    /// `epsilon_total` is not the leaf sum or exceeds the target.
    EpsilonMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Child indices from the root, e.g. `root/1/0`.
    pub path: String,
    pub detail: String,
}

struct Checker<'a> {
    cert: &'a Certificate,
    out: Vec<Violation>,
    epsilon_sum: f64,
}

/// Data a shrink leaf needs from its parent.
struct ShrinkContext {
    t: Rational,
    parent_perimeter: f64,
}

impl Checker<'_> {
    fn report(&mut self, kind: ViolationKind, path: &str, detail: impl Into<String>) {
        self.out.push(Violation { kind, path: path.to_string(), detail: detail.into() });
    }

    fn node(&mut self, n: &DecompositionNode, expected: &ExceptionalSet, path: &str, shrink: Option<&ShrinkContext>) {
        if !n.triangle.area().is_positive() {
            self.report(ViolationKind::TilingViolation, path, "triangle is degenerate or clockwise");
            return;
        }
        if &n.restricted_set != expected {
            self.report(ViolationKind::RestrictionMismatch, path, "restricted set differs from recomputation");
        }
        if n.cs != characteristic_system(&n.restricted_set) {
            self.report(ViolationKind::RestrictionMismatch, path, format!("stored system {} is wrong", n.cs));
        }

        match &n.content {
            NodeContent::Analytic => {
                if !n.restricted_set.is_empty() {
                    self.report(ViolationKind::LeafKindViolation, path, "analytic leaf with exceptional points");
                }
            }
            NodeContent::Singleton { point } => {
                let ok = n.cs == CharacteristicSystem::System { k: 0, n: 1 }
                    && n.restricted_set.isolated.first() == Some(point);
                if !ok {
                    self.report(ViolationKind::LeafKindViolation, path, "singleton leaf without exactly its point");
                }
            }
            NodeContent::Shrink { t, bound_m, epsilon } => self.shrink_leaf(n, t, *bound_m, *epsilon, path, shrink),
            NodeContent::Internal { split, children } => self.internal(n, split, children, path),
        }
    }

    fn shrink_leaf(
        &mut self,
        n: &DecompositionNode,
        t: &Rational,
        bound_m: f64,
        epsilon: f64,
        path: &str,
        ctx: Option<&ShrinkContext>,
    ) {
        self.epsilon_sum += epsilon;
        let y = &n.restricted_set;
        let vertex_cluster =
            y.isolated.is_empty() && y.clusters.len() == 1 && n.triangle.has_vertex(&y.clusters[0].limit).is_some();
        if !vertex_cluster {
            self.report(ViolationKind::LeafKindViolation, path, "shrink leaf without a single vertex cluster");
        }
        let Some(ctx) = ctx else {
            self.report(ViolationKind::StructureViolation, path, "shrink leaf outside a vertex shrink");
            return;
        };
        if &ctx.t != t {
            self.report(ViolationKind::BoundMismatch, path, format!("leaf t {t} differs from split t {}", ctx.t));
        }
        if bound_m != self.cert.m_bound {
            self.report(
                ViolationKind::BoundMismatch,
                path,
                format!("leaf m {bound_m} differs from certificate m {}", self.cert.m_bound),
            );
        }
        let recomputed = bound_m * ctx.parent_perimeter * rational_to_f64(t);
        if recomputed != epsilon {
            self.report(
                ViolationKind::BoundMismatch,
                path,
                format!("epsilon {epsilon} but m·t·perimeter = {recomputed}"),
            );
        }
    }

    fn internal(&mut self, n: &DecompositionNode, split: &SplitRecord, children: &[DecompositionNode], path: &str) {
        let want = match split {
            SplitRecord::VertexShrink { .. } => 3,
            _ => 2,
        };
        if children.len() != want {
            self.report(
                ViolationKind::StructureViolation,
                path,
                format!("{} children for a split that makes {want}", children.len()),
            );
        }

        match recompute(&n.triangle, split) {
            Ok((record, triangles)) => {
                let stored: Vec<&Triangle> = children.iter().map(|c| &c.triangle).collect();
                if &record != split || stored != triangles.iter().collect::<Vec<_>>() {
                    self.report(ViolationKind::SplitMismatch, path, "children differ from the recorded construction");
                }
            }
            Err(e) => self.report(ViolationKind::SplitMismatch, path, format!("construction fails: {e}")),
        }

        let kids: Vec<&Triangle> = children.iter().map(|c| &c.triangle).collect();
        if let Err(detail) = tiles(&n.triangle, &kids) {
            self.report(ViolationKind::TilingViolation, path, detail);
        }

        for p in realize_points(&n.restricted_set, &n.triangle, self.cert.resolution) {
            if !kids.iter().any(|k| k.contains(&p)) {
                self.report(ViolationKind::CoverageViolation, path, format!("{p:?} is in no child"));
            }
        }

        let ctx = match split {
            SplitRecord::VertexShrink { t, .. } => {
                if !matches!(children.first().map(|c| &c.content), Some(NodeContent::Shrink { .. })) {
                    self.report(ViolationKind::StructureViolation, path, "first child of a vertex shrink is not a shrink leaf");
                }
                Some(ShrinkContext { t: t.clone(), parent_perimeter: n.triangle.perimeter() })
            }
            _ => None,
        };
        for (i, child) in children.iter().enumerate() {
            let expected = restrict_to_triangle(&n.restricted_set, &child.triangle);
            let child_ctx = if i == 0 { ctx.as_ref() } else { None };
            self.node(child, &expected, &format!("{path}/{i}"), child_ctx);
        }
    }
}

fn recompute(t: &Triangle, split: &SplitRecord) -> Result<(SplitRecord, Vec<Triangle>), super::DecomposeError> {
    let cevian = |s: CevianSplit| (s.record, s.children.to_vec());
    Ok(match split {
        SplitRecord::TwoPointSplit { wi, wj, .. } => cevian(split_by_two_points(t, wi, wj)?),
        SplitRecord::EdgeSplit { point, .. } => cevian(split_at_edge_point(t, point)?),
        SplitRecord::InteriorSplit { point, .. } => cevian(split_at_interior_point(t, point)?),
        SplitRecord::VertexShrink { vertex, t: s, .. } => {
            let r = shrink_at_vertex(t, *vertex, s)?;
            (r.record, vec![r.corner, r.outer1, r.outer2])
        }
    })
}

/// Exact tiling test: children inside the parent, areas summing to the
/// parent's, and every child edge either shared with an oppositely oriented
/// child edge or running along the parent boundary in its direction.
fn tiles(parent: &Triangle, children: &[&Triangle]) -> Result<(), String> {
    for c in children {
        if let Some(v) = c.vertices().iter().find(|v| !parent.contains(v)) {
            return Err(format!("child vertex {v:?} outside parent"));
        }
    }
    let area: Rational = children.iter().map(|c| c.area()).fold(Rational::zero(), |a, b| a + b);
    if area != parent.area() {
        return Err(format!("child areas sum to {area}, parent area is {}", parent.area()));
    }

    let edges: Vec<(Point, Point)> = children.iter().flat_map(|c| c.directed_edges()).collect();
    let boundary = parent.directed_edges();
    let mut used = vec![false; edges.len()];
    for i in 0..edges.len() {
        if used[i] {
            continue;
        }
        let (p, q) = &edges[i];
        let twin = (0..edges.len()).find(|&j| j != i && !used[j] && edges[j].0 == *q && edges[j].1 == *p);
        if let Some(j) = twin {
            used[i] = true;
            used[j] = true;
            continue;
        }
        let on_boundary = boundary.iter().any(|(a, b)| {
            on_segment(p, a, b) && on_segment(q, a, b) && q.sub(p).dot(&b.sub(a)).is_positive()
        });
        if !on_boundary {
            return Err(format!("edge {p:?} -> {q:?} is unmatched"));
        }
        used[i] = true;
    }
    Ok(())
}

/// Check a certificate against the set it was built for. An empty result
/// means every check passed.
pub fn verify_certificate(c: &Certificate, x: &ExceptionalSet) -> Vec<Violation> {
    let mut checker = Checker { cert: c, out: Vec::new(), epsilon_sum: 0.0 };
    let expected = restrict_to_triangle(x, &c.root.triangle);
    checker.node(&c.root, &expected, "root", None);

    let sum = checker.epsilon_sum;
    if sum != c.epsilon_total {
        checker.report(
            ViolationKind::EpsilonMismatch,
            "root",
            format!("epsilon_total {} but leaves sum to {sum}", c.epsilon_total),
        );
    }
    if c.epsilon_total > c.epsilon_target {
        checker.report(
            ViolationKind::EpsilonMismatch,
            "root",
            format!("epsilon_total {} exceeds target {}", c.epsilon_total, c.epsilon_target),
        );
    }
    checker.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{decompose, BoundMode};
    use crate::exceptional::Cluster;
    use crate::point::ratio;

    fn t4() -> Triangle {
        Triangle::new(Point::int(0, 0), Point::int(4, 0), Point::int(0, 4)).unwrap()
    }

    fn cluster_set() -> ExceptionalSet {
        ExceptionalSet {
            isolated: vec![Point::int(3, 0)],
            clusters: vec![Cluster::new(t4().centroid(), ratio(1, 2), vec![Point::frac((1, 2), (1, 4))])],
        }
    }

    fn kinds(v: &[Violation]) -> Vec<ViolationKind> {
        v.iter().map(|v| v.kind).collect()
    }

    #[test]
    fn perturbed_vertex_breaks_tiling() {
        let x = cluster_set();
        let mut c = decompose(&t4(), &x, 1e-10, 2.0, BoundMode::Rigorous).unwrap();
        if let NodeContent::Internal { children, .. } = &mut c.root.content {
            let [a, b, v] = children[0].triangle.vertices().clone();
            let moved = v.add(&Point::frac((1, 7), (0, 1)));
            children[0].triangle = Triangle::new(a, b, moved).unwrap();
        }
        assert!(kinds(&verify_certificate(&c, &x)).contains(&ViolationKind::TilingViolation));
    }

    #[test]
    fn wrong_epsilon_is_bound_mismatch() {
        let x = cluster_set();
        let mut c = decompose(&t4(), &x, 1e-10, 2.0, BoundMode::Rigorous).unwrap();
        fn corrupt(n: &mut DecompositionNode) -> bool {
            match &mut n.content {
                NodeContent::Shrink { epsilon, .. } => {
                    *epsilon *= 1.5;
                    true
                }
                NodeContent::Internal { children, .. } => children.iter_mut().any(corrupt),
                _ => false,
            }
        }
        assert!(corrupt(&mut c.root));
        assert!(kinds(&verify_certificate(&c, &x)).contains(&ViolationKind::BoundMismatch));
    }

    #[test]
    fn dropped_child_is_structure_violation() {
        let x = cluster_set();
        let mut c = decompose(&t4(), &x, 1e-10, 2.0, BoundMode::Rigorous).unwrap();
        if let NodeContent::Internal { children, .. } = &mut c.root.content {
            children.pop();
        }
        let k = kinds(&verify_certificate(&c, &x));
        assert!(k.contains(&ViolationKind::StructureViolation));
        assert!(k.contains(&ViolationKind::TilingViolation));
    }

    #[test]
    fn wrong_leaf_kind_is_reported() {
        let x = ExceptionalSet::finite(vec![Point::int(1, 1), Point::int(2, 1)]);
        let mut c = decompose(&t4(), &x, 1e-10, 2.0, BoundMode::Rigorous).unwrap();
        c.root.content = NodeContent::Analytic;
        assert!(kinds(&verify_certificate(&c, &x)).contains(&ViolationKind::LeafKindViolation));
    }

    #[test]
    fn tiling_accepts_splits() {
        let s = split_by_two_points(&t4(), &Point::int(1, 1), &Point::int(1, 2)).unwrap();
        assert!(tiles(&t4(), &[&s.children[0], &s.children[1]]).is_ok());
        assert!(tiles(&t4(), &[&s.children[0]]).is_err());
        let r = shrink_at_vertex(&t4(), 2, &ratio(1, 3)).unwrap();
        assert!(tiles(&t4(), &[&r.corner, &r.outer1, &r.outer2]).is_ok());
    }
}
