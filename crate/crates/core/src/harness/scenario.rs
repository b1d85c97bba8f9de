use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decomposition::BoundMode;
use crate::exceptional::{restrict_to_triangle, ExceptionalSet, SetError};
use crate::functions::{residue_expectation, sup_bound, Family, FunctionSpec};
use crate::geometry::{locate_point, PointLocation, Triangle};
use crate::point::{ratio, Point, Rational};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-12;
pub const DEFAULT_ASSERTION_TOL: f64 = 1e-9;
pub const DEFAULT_EPSILON_TARGET: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Vanishing,
    TilingIdentity,
    ShrinkIdentity,
    CertifiedBound,
    ResidueControl,
    /// `n = 0` stands for the empty system.
    CharacteristicSystemExpect { k: u8, n: usize },
}

impl Check {
    pub fn label(&self) -> String {
        match self {
            Check::Vanishing => "vanishing".into(),
            Check::TilingIdentity => "tiling_identity".into(),
            Check::ShrinkIdentity => "shrink_identity".into(),
            Check::CertifiedBound => "certified_bound".into(),
            Check::ResidueControl => "residue_control".into(),
            Check::CharacteristicSystemExpect { k, n } => format!("characteristic_system_expect({k},{n})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_quadrature")]
    pub quadrature: f64,
    #[serde(default = "default_assertion")]
    pub assertion: f64,
}

fn default_quadrature() -> f64 {
    DEFAULT_QUADRATURE_TOL
}

fn default_assertion() -> f64 {
    DEFAULT_ASSERTION_TOL
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON_TARGET
}

fn default_mode() -> BoundMode {
    BoundMode::Rigorous
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { quadrature: DEFAULT_QUADRATURE_TOL, assertion: DEFAULT_ASSERTION_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub triangle: [Point; 3],
    #[serde(default)]
    pub exceptional_set: ExceptionalSet,
    pub function: FunctionSpec,
    #[serde(default)]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_epsilon")]
    pub epsilon_target: f64,
    #[serde(default)]
    pub seed: u64,
    /// Source of the sup bound behind shrink leaves.
    #[serde(default = "default_mode")]
    pub m_mode: BoundMode,
}

/// A scenario problem, located by a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
pub struct ValidationError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

fn invalid(path: impl Into<String>, message: impl fmt::Display) -> ValidationError {
    ValidationError { path: path.into(), message: message.to_string() }
}

/// Parse JSON text into a `T`, reporting the field path of the first error.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, ValidationError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        invalid(path, e.into_inner())
    })
}

/// Read and validate a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ValidationError> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid("", format!("{}: {e}", path.display())))?;
    let s: Scenario = parse_json(&text)?;
    s.validate()?;
    Ok(s)
}

/// The ambient open set: the bounding box of the triangle inflated by 10% of
/// its extent on every side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ambient {
    min: Point,
    max: Point,
}

impl Ambient {
    pub fn around(t: &Triangle) -> Ambient {
        let v = t.vertices();
        let lo = |f: fn(&Point) -> &Rational| v.iter().map(f).min().expect("three vertices").clone();
        let hi = |f: fn(&Point) -> &Rational| v.iter().map(f).max().expect("three vertices").clone();
        let (x0, x1) = (lo(|p| &p.re), hi(|p| &p.re));
        let (y0, y1) = (lo(|p| &p.im), hi(|p| &p.im));
        let mx = (&x1 - &x0) * ratio(1, 10);
        let my = (&y1 - &y0) * ratio(1, 10);
        Ambient { min: Point::new(&x0 - &mx, &y0 - &my), max: Point::new(x1 + mx, y1 + my) }
    }

    /// Strict containment, since the ambient set is open.
    pub fn contains(&self, p: &Point) -> bool {
        self.min.re < p.re && p.re < self.max.re && self.min.im < p.im && p.im < self.max.im
    }
}

fn set_error_path(e: &SetError) -> String {
    match e {
        SetError::RatioOutOfRange { cluster, .. } => format!("exceptional_set.clusters[{cluster}].ratio"),
        SetError::EmptyOffsets { cluster } => format!("exceptional_set.clusters[{cluster}].offsets"),
        SetError::ZeroOffset { cluster, offset } => format!("exceptional_set.clusters[{cluster}].offsets[{offset}]"),
        SetError::CoincidentMembers { cluster, .. } => format!("exceptional_set.clusters[{cluster}]"),
        SetError::DuplicatePoint(_) | SetError::OverlapUndecided(..) => "exceptional_set".into(),
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, ValidationError> {
        let s: Scenario = parse_json(text)?;
        s.validate()?;
        Ok(s)
    }

    /// The normalised (counter-clockwise) triangle.
    pub fn triangle(&self) -> Result<Triangle, ValidationError> {
        Triangle::from_array(self.triangle.clone()).map_err(|e| invalid("triangle", e))
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        let t = self.triangle()?;

        let x = &self.exceptional_set;
        x.validate().map_err(|e| invalid(set_error_path(&e), e))?;
        let u = Ambient::around(&t);
        for (i, p) in x.isolated.iter().enumerate() {
            if !u.contains(p) {
                return Err(invalid(format!("exceptional_set.isolated[{i}]"), "outside the ambient box"));
            }
        }
        // members lie on segments from the limit to limit + offset, and the box is convex
        for (i, c) in x.clusters.iter().enumerate() {
            if !u.contains(&c.limit) {
                return Err(invalid(format!("exceptional_set.clusters[{i}].limit"), "outside the ambient box"));
            }
            if let Some(j) = c.offsets.iter().position(|o| !u.contains(&c.limit.add(o))) {
                return Err(invalid(
                    format!("exceptional_set.clusters[{i}].offsets[{j}]"),
                    "cluster leaves the ambient box",
                ));
            }
        }

        self.function.validate().map_err(|e| invalid("function", e))?;
        if let Some(bb) = &self.function.bound_box {
            if !bb.contains_triangle(&t) {
                return Err(invalid("function.bound_box", "does not cover the triangle"));
            }
        }
        self.check_function_params(&t)?;

        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.tolerances.quadrature) {
            return Err(invalid("tolerances.quadrature", "must be positive and finite"));
        }
        if !positive(self.tolerances.assertion) {
            return Err(invalid("tolerances.assertion", "must be positive and finite"));
        }
        if !positive(self.epsilon_target) {
            return Err(invalid("epsilon_target", "must be positive and finite"));
        }

        let restricted = restrict_to_triangle(x, &t);
        if !restricted.clusters.is_empty() && self.m_mode == BoundMode::Rigorous {
            // shrink leaves need a finite bound
            if let Err(e) = sup_bound(&self.function, &t) {
                return Err(invalid("function", format!("no finite sup bound on the triangle: {e}")));
            }
        }
        for (i, check) in self.checks.iter().enumerate() {
            self.check_is_applicable(i, check, &t, &restricted)?;
        }
        Ok(())
    }

    fn check_function_params(&self, t: &Triangle) -> Result<(), ValidationError> {
        let u = Ambient::around(t);
        match &self.function.family {
            Family::DiffQuotient { anchors, .. } if anchors.is_empty() => {
                Err(invalid("function.anchors", "must not be empty"))
            }
            Family::ClusterSum { clusters, .. } => {
                let set = ExceptionalSet { isolated: vec![], clusters: clusters.clone() };
                set.validate().map_err(|e| invalid("function.clusters", e))?;
                if let Some(i) = clusters.iter().position(|c| !u.contains(&c.limit)) {
                    return Err(invalid(format!("function.clusters[{i}].limit"), "outside the ambient box"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn check_is_applicable(
        &self,
        i: usize,
        check: &Check,
        t: &Triangle,
        restricted: &ExceptionalSet,
    ) -> Result<(), ValidationError> {
        let path = format!("checks[{i}]");
        match check {
            Check::ResidueControl => {
                let Some(a) = self.function.pole_anchor() else {
                    return Err(invalid(path, "residue_control needs the pole family"));
                };
                if residue_expectation(t, a).is_none() {
                    return Err(invalid(path, "pole lies on the triangle boundary"));
                }
            }
            Check::ShrinkIdentity => {
                if vertex_cluster(t, restricted).is_none() {
                    return Err(invalid(path, "shrink_identity needs a single cluster at a triangle vertex"));
                }
                if let Err(e) = sup_bound(&self.function, t) {
                    return Err(invalid(path, format!("shrink_identity needs a finite sup bound: {e}")));
                }
            }
            Check::CharacteristicSystemExpect { k, n } => {
                let x = &self.exceptional_set;
                let consistent = match k {
                    0 => !x.clusters.is_empty() || *n <= x.isolated.len(),
                    1 => *n >= 1 && *n <= x.clusters.len(),
                    _ => false,
                };
                if !consistent {
                    return Err(invalid(path, format!("expectation ({k},{n}) cannot hold for this set")));
                }
            }
            Check::Vanishing | Check::TilingIdentity | Check::CertifiedBound => {}
        }
        Ok(())
    }
}

/// The vertex (1-based) carrying the only cluster of `y`, when `y` is exactly
/// one cluster sitting at a vertex of `t`.
pub fn vertex_cluster(t: &Triangle, y: &ExceptionalSet) -> Option<u8> {
    if !y.isolated.is_empty() || y.clusters.len() != 1 {
        return None;
    }
    match locate_point(t, &y.clusters[0].limit) {
        PointLocation::AtVertex(v) => Some(v),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_POINTS: &str = r#"{
        "schema_version": 1,
        "name": "two-points",
        "triangle": [["0","0"],["1","0"],["0","1"]],
        "exceptional_set": {"isolated": [["1/4","1/4"],["1/3","1/5"]]},
        "function": {"family":"diff_quotient","base":"exp","anchors":[["1/4","1/4"],["1/3","1/5"]]},
        "checks": ["vanishing", "tiling_identity", {"characteristic_system_expect": {"k":0,"n":2}}]
    }"#;

    #[test]
    fn parses_with_defaults() {
        let s = Scenario::from_json(TWO_POINTS).unwrap();
        assert_eq!(s.tolerances, Tolerances::default());
        assert_eq!(s.epsilon_target, 1e-10);
        assert_eq!(s.m_mode, BoundMode::Rigorous);
        assert_eq!(s.checks[2], Check::CharacteristicSystemExpect { k: 0, n: 2 });
        let back: Scenario = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    fn error_path(text: &str) -> String {
        Scenario::from_json(text).unwrap_err().path
    }

    #[test]
    fn errors_carry_field_paths() {
        let bad_coord = TWO_POINTS.replace(r#"["1/3","1/5"]]}"#, r#"["1/3","x"]]}"#);
        assert_eq!(error_path(&bad_coord), "exceptional_set.isolated[1]");
        let degenerate = TWO_POINTS.replace(r#"["0","1"]],"#, r#"["2","0"]],"#);
        assert_eq!(error_path(&degenerate), "triangle");
        let far = TWO_POINTS.replace(r#"["1/3","1/5"]]}"#, r#"["3","1/5"]]}"#);
        assert_eq!(error_path(&far), "exceptional_set.isolated[1]");
        let version = TWO_POINTS.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert_eq!(error_path(&version), "schema_version");
        let expect = TWO_POINTS.replace(r#""k":0,"n":2"#, r#""k":1,"n":1"#);
        assert_eq!(error_path(&expect), "checks[2]");
        let residue = TWO_POINTS.replace(r#""vanishing","#, r#""residue_control","#);
        assert_eq!(error_path(&residue), "checks[0]");
        let tol = TWO_POINTS.replace(r#""checks""#, r#""tolerances": {"assertion": -1}, "checks""#);
        assert_eq!(error_path(&tol), "tolerances.assertion");
    }

    #[test]
    fn ambient_box_is_open_and_inflated() {
        let t = Triangle::new(Point::int(0, 0), Point::int(10, 0), Point::int(0, 10)).unwrap();
        let u = Ambient::around(&t);
        assert!(u.contains(&Point::frac((-99, 100), (0, 1))));
        assert!(!u.contains(&Point::int(-1, 0)));
        assert!(u.contains(&Point::frac((1099, 100), (1099, 100))));
    }
}
