//! Countable closed exceptional sets: finitely many isolated points together
//! with finitely many geometric clusters converging to limit points.
//!
//! A cluster with limit `l`, ratio `ρ` and offsets `u_1..u_d` has members
//! `member(k) = l + ρ^⌊k/d⌋ · u_{(k mod d)+1}`, minus a finite set of excluded
//! indices. Cantor–Bendixson rank is therefore at most 1: the derived set of an
//! [`ExceptionalSet`] is its finite set of cluster limits.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::geometry::{locate_point, orient_value, PointLocation, Triangle};
use crate::point::{rational_str, rational_to_f64, Point, Rational};

/// Number of leading members compared explicitly when bounding disks overlap.
pub const K_CHECK: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SetError {
    #[error("cluster {cluster}: ratio {ratio} is not in (0, 1)")]
    RatioOutOfRange { cluster: usize, ratio: String },
    #[error("cluster {cluster}: offset list is empty")]
    EmptyOffsets { cluster: usize },
    #[error("cluster {cluster}: offset {offset} is zero")]
    ZeroOffset { cluster: usize, offset: usize },
    #[error("cluster {cluster}: offsets {first} and {second} generate coinciding members")]
    CoincidentMembers { cluster: usize, first: usize, second: usize },
    #[error("point {0:?} occurs twice")]
    DuplicatePoint(Point),
    #[error("{0} and {1} may share points (bounding disks overlap beyond the checked prefix)")]
    OverlapUndecided(String, String),
}

/// A geometric sequence of points converging to `limit`, together with it.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub limit: Point,
    #[serde(with = "rational_str")]
    pub ratio: Rational,
    pub offsets: Vec<Point>,
    /// Member indices removed from the sequence.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub excluded: BTreeSet<u64>,
}

impl fmt::Debug for Cluster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cluster(limit={:?}, ρ={}, offsets={:?}", self.limit, self.ratio, self.offsets)?;
        if !self.excluded.is_empty() {
            write!(f, ", excluded={:?}", self.excluded)?;
        }
        write!(f, ")")
    }
}

impl Cluster {
    pub fn new(limit: Point, ratio: Rational, offsets: Vec<Point>) -> Self {
        Cluster { limit, ratio, offsets, excluded: BTreeSet::new() }
    }

    pub fn degree(&self) -> u64 {
        self.offsets.len() as u64
    }

    /// `ρ^level`.
    pub fn scale_at(&self, level: u64) -> Rational {
        num_traits::pow(self.ratio.clone(), level as usize)
    }

    /// Member `k`, ignoring exclusions.
    pub fn member(&self, k: u64) -> Point {
        let d = self.degree();
        let level = k / d;
        let offset = &self.offsets[(k % d) as usize];
        self.limit.add(&offset.scale(&self.scale_at(level)))
    }

    pub fn is_excluded(&self, k: u64) -> bool {
        self.excluded.contains(&k)
    }

    /// Squared radius of the closed disk around `limit` holding every member.
    pub fn radius_sqr(&self) -> Rational {
        self.offsets.iter().map(Point::norm_sqr).max().unwrap_or_else(Rational::zero)
    }

    /// Visit non-excluded members `(index, point, squared distance to limit)`
    /// level by level while `keep_level(ρ^{2·level} · max|u|²)` holds.
    fn for_each_member_while(
        &self,
        mut keep_level: impl FnMut(&Rational) -> bool,
        mut visit: impl FnMut(u64, Point, Rational),
    ) {
        let d = self.degree();
        let r2 = self.radius_sqr();
        let rho2 = &self.ratio * &self.ratio;
        let mut scale = Rational::one();
        let mut scale2 = Rational::one();
        let mut level = 0u64;
        while keep_level(&(&scale2 * &r2)) {
            for (j, u) in self.offsets.iter().enumerate() {
                let k = level * d + j as u64;
                if self.is_excluded(k) {
                    continue;
                }
                let dist2 = &scale2 * u.norm_sqr();
                visit(k, self.limit.add(&u.scale(&scale)), dist2);
            }
            scale = &scale * &self.ratio;
            scale2 = &scale2 * &rho2;
            level += 1;
        }
    }

    /// Non-excluded members at squared distance at least `min_dist_sqr` from
    /// the limit. Finite for positive thresholds.
    pub fn members_at_least(&self, min_dist_sqr: &Rational) -> Vec<(u64, Point)> {
        assert!(min_dist_sqr.is_positive(), "threshold must be positive");
        let mut out = Vec::new();
        self.for_each_member_while(
            |level_r2| level_r2 >= min_dist_sqr,
            |k, p, d2| {
                if &d2 >= min_dist_sqr {
                    out.push((k, p));
                }
            },
        );
        out
    }

    /// The first `count` non-excluded members.
    pub fn leading_members(&self, count: u64) -> Vec<Point> {
        let d = self.degree();
        let mut out = Vec::new();
        let mut k = 0u64;
        // exclusions are finite, so this terminates
        while (out.len() as u64) < count {
            if !self.is_excluded(k) {
                out.push(self.member(k));
            }
            k += 1;
            debug_assert!(k < count + self.excluded.len() as u64 + d);
        }
        out
    }
}

/// A closed countable subset of the plane of Cantor–Bendixson rank ≤ 1.
#[derive(Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionalSet {
    #[serde(default)]
    pub isolated: Vec<Point>,
    #[serde(default)]
    pub clusters: Vec<Cluster>,
}

impl fmt::Debug for ExceptionalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExceptionalSet")
            .field("isolated", &self.isolated)
            .field("clusters", &self.clusters)
            .finish()
    }
}

/// The pair `(k, n)`: the `k`-th derived set is finite with `n` points and the
/// next one is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharacteristicSystem {
    Empty,
    System { k: u8, n: usize },
}

impl CharacteristicSystem {
    pub fn k(&self) -> Option<u8> {
        match self {
            CharacteristicSystem::Empty => None,
            CharacteristicSystem::System { k, .. } => Some(*k),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            CharacteristicSystem::Empty => 0,
            CharacteristicSystem::System { n, .. } => *n,
        }
    }
}

impl fmt::Display for CharacteristicSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CharacteristicSystem::Empty => write!(f, "empty"),
            CharacteristicSystem::System { k, n } => write!(f, "({k},{n})"),
        }
    }
}

impl ExceptionalSet {
    pub fn empty() -> Self {
        ExceptionalSet::default()
    }

    pub fn finite(points: Vec<Point>) -> Self {
        ExceptionalSet { isolated: points, clusters: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.isolated.is_empty() && self.clusters.is_empty()
    }

    pub fn limits(&self) -> Vec<Point> {
        self.clusters.iter().map(|c| c.limit.clone()).collect()
    }

    /// Check the well-formedness invariants.
    pub fn validate(&self) -> Result<(), SetError> {
        for (ci, c) in self.clusters.iter().enumerate() {
            validate_cluster(ci, c)?;
        }

        let mut seen = BTreeSet::new();
        for p in self.isolated.iter().chain(self.clusters.iter().map(|c| &c.limit)) {
            if !seen.insert(LexKey(p.clone())) {
                return Err(SetError::DuplicatePoint(p.clone()));
            }
        }

        let shapes: Vec<ClusterShape> = self.clusters.iter().map(ClusterShape::new).collect();
        for (i, a) in shapes.iter().enumerate() {
            for (j, b) in shapes.iter().enumerate().skip(i + 1) {
                if !a.disjoint_from(b) {
                    return Err(SetError::OverlapUndecided(
                        format!("cluster {i}"),
                        format!("cluster {j}"),
                    ));
                }
            }
            for (pi, p) in self.isolated.iter().enumerate() {
                if !a.avoids_point(p) {
                    return Err(SetError::OverlapUndecided(
                        format!("cluster {i}"),
                        format!("isolated point {pi}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn validate_cluster(ci: usize, c: &Cluster) -> Result<(), SetError> {
    if !(c.ratio.is_positive() && c.ratio < Rational::one()) {
        return Err(SetError::RatioOutOfRange { cluster: ci, ratio: c.ratio.to_string() });
    }
    if c.offsets.is_empty() {
        return Err(SetError::EmptyOffsets { cluster: ci });
    }
    for (oi, u) in c.offsets.iter().enumerate() {
        if u.is_zero() {
            return Err(SetError::ZeroOffset { cluster: ci, offset: oi });
        }
    }
    // ρ^a u_i = ρ^b u_j needs u_j a positive multiple of u_i by a power of ρ
    for (i, ui) in c.offsets.iter().enumerate() {
        for (j, uj) in c.offsets.iter().enumerate().skip(i + 1) {
            if !ui.cross(uj).is_zero() || !ui.dot(uj).is_positive() {
                continue;
            }
            let factor = ui.dot(uj) / ui.norm_sqr();
            if is_integer_power(&factor, &c.ratio) {
                return Err(SetError::CoincidentMembers { cluster: ci, first: i, second: j });
            }
        }
    }
    Ok(())
}

/// Whether `x = base^e` for some integer `e`, with `0 < base < 1` and `x > 0`.
fn is_integer_power(x: &Rational, base: &Rational) -> bool {
    let inv = base.recip();
    let mut v = if x >= &Rational::one() { x.clone() } else { x.recip() };
    while v > Rational::one() {
        v = &v / &inv;
    }
    v == Rational::one()
}

/// Explicit prefix of a cluster plus a disk covering the remaining tail.
struct ClusterShape {
    limit: Point,
    radius_sqr: Rational,
    prefix: Vec<Point>,
    tail_radius_sqr: Rational,
}

impl ClusterShape {
    fn new(c: &Cluster) -> Self {
        let d = c.degree();
        let levels = K_CHECK.div_ceil(d);
        let prefix = (0..levels * d)
            .filter(|k| !c.is_excluded(*k))
            .map(|k| c.member(k))
            .collect();
        let s = c.scale_at(levels);
        ClusterShape {
            limit: c.limit.clone(),
            radius_sqr: c.radius_sqr(),
            prefix,
            tail_radius_sqr: &s * &s * c.radius_sqr(),
        }
    }

    fn disk_contains(&self, r2: &Rational, p: &Point) -> bool {
        &p.dist_sqr(&self.limit) <= r2
    }

    fn avoids_point(&self, p: &Point) -> bool {
        if !self.disk_contains(&self.radius_sqr, p) {
            return true;
        }
        *p != self.limit
            && !self.prefix.contains(p)
            && !self.disk_contains(&self.tail_radius_sqr, p)
    }

    fn disjoint_from(&self, other: &ClusterShape) -> bool {
        if disks_disjoint(&self.limit, &self.radius_sqr, &other.limit, &other.radius_sqr) {
            return true;
        }
        let explicit_a = self.prefix.iter().chain(std::iter::once(&self.limit));
        let explicit_b: Vec<&Point> =
            other.prefix.iter().chain(std::iter::once(&other.limit)).collect();
        for p in explicit_a {
            if explicit_b.contains(&p) || other.disk_contains(&other.tail_radius_sqr, p) {
                return false;
            }
        }
        explicit_b.iter().all(|p| !self.disk_contains(&self.tail_radius_sqr, p))
            && disks_disjoint(
                &self.limit,
                &self.tail_radius_sqr,
                &other.limit,
                &other.tail_radius_sqr,
            )
    }
}

/// Exact test `|c1 - c2| > r1 + r2` for closed disks given squared radii.
fn disks_disjoint(c1: &Point, r1_sqr: &Rational, c2: &Point, r2_sqr: &Rational) -> bool {
    let d2 = c1.dist_sqr(c2);
    let gap = &d2 - r1_sqr - r2_sqr;
    if !gap.is_positive() {
        return false;
    }
    let four = Rational::from_integer(4.into());
    &gap * &gap > four * r1_sqr * r2_sqr
}

#[derive(PartialEq, Eq)]
struct LexKey(Point);

impl PartialOrd for LexKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LexKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.lex_cmp(&other.0)
    }
}

/// First Cantor–Bendixson derivative: the set of limit points.
pub fn cb_derivative(x: &ExceptionalSet) -> ExceptionalSet {
    ExceptionalSet::finite(x.limits())
}

/// Characteristic system of a rank ≤ 1 set.
pub fn characteristic_system(x: &ExceptionalSet) -> CharacteristicSystem {
    if !x.clusters.is_empty() {
        CharacteristicSystem::System { k: 1, n: x.clusters.len() }
    } else if !x.isolated.is_empty() {
        CharacteristicSystem::System { k: 0, n: x.isolated.len() }
    } else {
        CharacteristicSystem::Empty
    }
}

/// Squared distance from `p` to the line through `a` and `b`.
fn line_dist_sqr(p: &Point, a: &Point, b: &Point) -> Rational {
    let o = orient_value(a, b, p);
    &o * &o / b.sub(a).norm_sqr()
}

/// Intersection with a closed triangle, decided exactly.
///
/// Isolated points of the result are sorted lexicographically, which makes
/// restriction idempotent.
pub fn restrict_to_triangle(x: &ExceptionalSet, t: &Triangle) -> ExceptionalSet {
    let mut isolated: Vec<Point> = x.isolated.iter().filter(|p| t.contains(p)).cloned().collect();
    let mut clusters = Vec::new();
    for c in &x.clusters {
        match restrict_cluster(c, t) {
            ClusterRestriction::Finite(points) => isolated.extend(points),
            ClusterRestriction::Cluster(kept, extra) => {
                isolated.extend(extra);
                clusters.push(kept);
            }
        }
    }
    isolated.sort_by(Point::lex_cmp);
    ExceptionalSet { isolated, clusters }
}

enum ClusterRestriction {
    /// Only finitely many members remain (possibly with the limit).
    Finite(Vec<Point>),
    /// A cluster survives; the vector holds early members of dropped directions.
    Cluster(Cluster, Vec<Point>),
}

fn restrict_cluster(c: &Cluster, t: &Triangle) -> ClusterRestriction {
    let loc = locate_point(t, &c.limit);

    if loc == PointLocation::Outside {
        let d2 = t.dist_sqr(&c.limit);
        let mut inside = Vec::new();
        c.for_each_member_while(
            |level_r2| level_r2 >= &d2,
            |_, p, dist2| {
                if dist2 >= d2 && t.contains(&p) {
                    inside.push(p);
                }
            },
        );
        return ClusterRestriction::Finite(inside);
    }

    // Edges through the limit decide the tail; the others are at positive
    // distance `d2` from it.
    let [a, b, cc] = t.vertices();
    let edges = [(a, b), (b, cc), (cc, a)];
    let incident: Vec<usize> = match loc {
        PointLocation::Interior => vec![],
        PointLocation::OnEdge(e) => vec![e as usize - 1],
        PointLocation::AtVertex(v) => vec![(v as usize + 1) % 3, v as usize - 1],
        PointLocation::Outside => unreachable!(),
    };
    let d2 = (0..3)
        .filter(|i| !incident.contains(i))
        .map(|i| line_dist_sqr(&c.limit, edges[i].0, edges[i].1))
        .min()
        .expect("at least one non-incident edge");

    let inward: Vec<bool> = c
        .offsets
        .iter()
        .map(|u| {
            let q = c.limit.add(u);
            incident.iter().all(|&i| orient_value(edges[i].0, edges[i].1, &q) >= Rational::zero())
        })
        .collect();

    // early members (within the prefix not governed by the tail rule)
    let mut outside_kept: Vec<u64> = Vec::new();
    let mut inside_dropped: Vec<Point> = Vec::new();
    c.for_each_member_while(
        |level_r2| level_r2 >= &d2,
        |k, p, dist2| {
            if dist2 < d2 {
                return;
            }
            let j = (k % c.degree()) as usize;
            let inside = t.contains(&p);
            if inward[j] && !inside {
                outside_kept.push(k);
            } else if !inward[j] && inside {
                inside_dropped.push(p);
            }
        },
    );

    if !inward.iter().any(|&w| w) {
        inside_dropped.push(c.limit.clone());
        return ClusterRestriction::Finite(inside_dropped);
    }

    let d_old = c.degree();
    let kept_dirs: Vec<usize> = (0..c.offsets.len()).filter(|&j| inward[j]).collect();
    let d_new = kept_dirs.len() as u64;
    let remap = |k: u64| -> Option<u64> {
        let j = (k % d_old) as usize;
        kept_dirs.iter().position(|&kj| kj == j).map(|pos| (k / d_old) * d_new + pos as u64)
    };
    let excluded = c
        .excluded
        .iter()
        .copied()
        .chain(outside_kept)
        .filter_map(remap)
        .collect();
    let kept = Cluster {
        limit: c.limit.clone(),
        ratio: c.ratio.clone(),
        offsets: kept_dirs.iter().map(|&j| c.offsets[j].clone()).collect(),
        excluded,
    };
    ClusterRestriction::Cluster(kept, inside_dropped)
}

/// A finite sample of the set for plotting and pointwise checks: isolated
/// points, limits, and members at distance ≥ `resolution` from their limit.
pub fn realize_points(x: &ExceptionalSet, region: &Triangle, resolution: f64) -> Vec<Point> {
    assert!(resolution > 0.0, "resolution must be positive");
    let res2 = resolution * resolution;
    let mut out: Vec<Point> = x.isolated.iter().filter(|p| region.contains(p)).cloned().collect();
    for c in &x.clusters {
        if region.contains(&c.limit) {
            out.push(c.limit.clone());
        }
        c.for_each_member_while(
            |level_r2| rational_to_f64(level_r2) >= res2,
            |_, p, dist2| {
                if rational_to_f64(&dist2) >= res2 && region.contains(&p) {
                    out.push(p);
                }
            },
        );
    }
    out
}
