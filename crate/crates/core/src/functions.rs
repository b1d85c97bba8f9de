//! Test functions for the contour checks.
//!
//! `DiffQuotient` and `ClusterSum` are continuous everywhere and analytic off
//! their anchors, so they meet the hypotheses of the vanishing theorems.
//! `Pole` and `AbsValue` deliberately break them and serve as controls.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exceptional::Cluster;
use crate::geometry::{locate_point, PointLocation, Triangle};
use crate::point::{rational_to_f64, Point};

/// Default number of cluster terms summed by `ClusterSum` (indices `0..=48`).
pub const DEFAULT_K_MAX: usize = 48;

/// Relative radius of the Taylor branch used near a difference-quotient anchor.
pub const DELTA_EVAL_RELATIVE: f64 = 1e-6;

// relative slack on rigorous bounds, covering float rounding and the
// second-order branch near anchors
const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FunctionError {
    #[error("function is not finite at {0}")]
    NonFinite(Complex64),
    #[error("function is unbounded on the region (pole at {0:?})")]
    Unbounded(Point),
    #[error("region is not inside the function's bound box")]
    OutsideBoundBox,
    #[error("polynomial needs at least one coefficient")]
    EmptyPolynomial,
}

/// Entire base function `g` of the difference-quotient families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseFunction {
    Exp,
    Sin,
    Cube,
}

impl BaseFunction {
    pub fn value(self, z: Complex64) -> Complex64 {
        match self {
            BaseFunction::Exp => z.exp(),
            BaseFunction::Sin => z.sin(),
            BaseFunction::Cube => z * z * z,
        }
    }

    pub fn derivative(self, z: Complex64) -> Complex64 {
        match self {
            BaseFunction::Exp => z.exp(),
            BaseFunction::Sin => z.cos(),
            BaseFunction::Cube => 3.0 * z * z,
        }
    }

    pub fn second_derivative(self, z: Complex64) -> Complex64 {
        match self {
            BaseFunction::Exp => z.exp(),
            BaseFunction::Sin => -z.sin(),
            BaseFunction::Cube => 6.0 * z,
        }
    }

    /// Upper bound of `|g'|` over a closed rectangle.
    fn derivative_envelope(self, rect: &Rect) -> f64 {
        match self {
            // |e^z| = e^{Re z}
            BaseFunction::Exp => rect.x1.exp(),
            // |cos(x+iy)|² = cos²x + sinh²y ≤ cosh²y
            BaseFunction::Sin => rect.y0.abs().max(rect.y1.abs()).cosh(),
            BaseFunction::Cube => 3.0 * rect.max_modulus().powi(2),
        }
    }
}

/// Axis-aligned box on which a family's bound is guaranteed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundBox {
    pub min: Point,
    pub max: Point,
}

impl BoundBox {
    pub fn contains_triangle(&self, t: &Triangle) -> bool {
        t.vertices().iter().all(|v| {
            v.re >= self.min.re && v.re <= self.max.re && v.im >= self.min.im && v.im <= self.max.im
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    fn around(points: impl IntoIterator<Item = Complex64>) -> Rect {
        let mut r = Rect {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for z in points {
            r.x0 = r.x0.min(z.re);
            r.x1 = r.x1.max(z.re);
            r.y0 = r.y0.min(z.im);
            r.y1 = r.y1.max(z.im);
        }
        // outward rounding for the rational -> float conversion
        let pad = |v: f64| 1e-12 * (1.0 + v.abs());
        r.x0 -= pad(r.x0);
        r.x1 += pad(r.x1);
        r.y0 -= pad(r.y0);
        r.y1 += pad(r.y1);
        r
    }

    fn max_modulus(&self) -> f64 {
        [(self.x0, self.y0), (self.x0, self.y1), (self.x1, self.y0), (self.x1, self.y1)]
            .iter()
            .map(|&(x, y)| x.hypot(y))
            .fold(0.0, f64::max)
    }
}

/// A test function family with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `Σ_a (g(z) - g(a)) / (z - a)`, with value `g'(a)` at `a`.
    DiffQuotient { base: BaseFunction, anchors: Vec<Point> },
    /// `Σ_clusters Σ_{k=0..=k_max} 2^{-k} (g(z) - g(a_k)) / (z - a_k)` over cluster members.
    ClusterSum {
        base: BaseFunction,
        clusters: Vec<Cluster>,
        #[serde(default = "default_k_max")]
        k_max: usize,
    },
    /// `1 / (z - a)`.
    Pole { anchor: Point },
    /// `Σ c_j z^j` with coefficients given as `[re, im]`.
    Polynomial { coefficients: Vec<[f64; 2]> },
    /// `|z - a|`.
    AbsValue { anchor: Point },
}

fn default_k_max() -> usize {
    DEFAULT_K_MAX
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_box: Option<BoundBox>,
}

impl From<Family> for FunctionSpec {
    fn from(family: Family) -> Self {
        FunctionSpec { family, bound_box: None }
    }
}

/// One difference-quotient term with its Taylor data.
#[derive(Debug, Clone)]
pub struct Anchor {
    at: Complex64,
    weight: f64,
    g: Complex64,
    dg: Complex64,
    d2g: Complex64,
    delta: f64,
}

impl Anchor {
    fn new(base: BaseFunction, at: Complex64, weight: f64) -> Self {
        Anchor {
            at,
            weight,
            g: base.value(at),
            dg: base.derivative(at),
            d2g: base.second_derivative(at),
            delta: DELTA_EVAL_RELATIVE * (at.norm() + 1.0),
        }
    }
}

/// Precomputed evaluator for a [`FunctionSpec`].
#[derive(Debug, Clone)]
pub enum Evaluator {
    Quotients { base: BaseFunction, anchors: Vec<Anchor> },
    Pole(Complex64),
    Polynomial(Vec<Complex64>),
    AbsValue(Complex64),
}

impl Evaluator {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Evaluator::Quotients { base, anchors } => {
                // base values at z are shared by all terms of the plain branch
                let gz = base.value(z);
                anchors
                    .iter()
                    .map(|a| {
                        let h = z - a.at;
                        let q = if h.norm() < a.delta {
                            a.dg + a.d2g * h * 0.5
                        } else {
                            (gz - a.g) / h
                        };
                        q * a.weight
                    })
                    .sum()
            }
            Evaluator::Pole(a) => 1.0 / (z - a),
            Evaluator::Polynomial(c) => c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &ci| acc * z + ci),
            Evaluator::AbsValue(a) => Complex64::new((z - a).norm(), 0.0),
        }
    }
}

impl FunctionSpec {
    pub fn evaluator(&self) -> Evaluator {
        match &self.family {
            Family::DiffQuotient { base, anchors } => Evaluator::Quotients {
                base: *base,
                anchors: anchors.iter().map(|a| Anchor::new(*base, a.to_complex(), 1.0)).collect(),
            },
            Family::ClusterSum { base, clusters, k_max } => {
                let mut anchors = Vec::new();
                for c in clusters {
                    let mut w = 1.0;
                    for k in 0..=*k_max as u64 {
                        anchors.push(Anchor::new(*base, c.member(k).to_complex(), w));
                        w *= 0.5;
                    }
                }
                Evaluator::Quotients { base: *base, anchors }
            }
            Family::Pole { anchor } => Evaluator::Pole(anchor.to_complex()),
            Family::Polynomial { coefficients } => Evaluator::Polynomial(
                coefficients.iter().map(|c| Complex64::new(c[0], c[1])).collect(),
            ),
            Family::AbsValue { anchor } => Evaluator::AbsValue(anchor.to_complex()),
        }
    }

    /// Whether the family satisfies the theorem hypotheses (continuous,
    /// analytic off its anchors).
    pub fn satisfies_hypotheses(&self) -> bool {
        matches!(
            self.family,
            Family::DiffQuotient { .. } | Family::ClusterSum { .. } | Family::Polynomial { .. }
        )
    }

    /// Pole anchor, if this is the `Pole` family.
    pub fn pole_anchor(&self) -> Option<&Point> {
        match &self.family {
            Family::Pole { anchor } => Some(anchor),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), FunctionError> {
        match &self.family {
            Family::Polynomial { coefficients } if coefficients.is_empty() => {
                Err(FunctionError::EmptyPolynomial)
            }
            _ => Ok(()),
        }
    }
}

/// Evaluate the function at `z`.
pub fn evaluate(spec: &FunctionSpec, z: Complex64) -> Result<Complex64, FunctionError> {
    let v = spec.evaluator().eval(z);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(FunctionError::NonFinite(z))
    }
}

/// Rigorous upper bound for `sup |f|` over the closed triangle.
pub fn sup_bound(spec: &FunctionSpec, region: &Triangle) -> Result<f64, FunctionError> {
    if let Some(bb) = &spec.bound_box {
        if !bb.contains_triangle(region) {
            return Err(FunctionError::OutsideBoundBox);
        }
    }
    let corners = region.to_complex();
    let bound = match &spec.family {
        Family::DiffQuotient { base, anchors } => anchors
            .iter()
            .map(|a| {
                let rect = Rect::around(corners.iter().copied().chain([a.to_complex()]));
                base.derivative_envelope(&rect)
            })
            .sum(),
        Family::ClusterSum { base, clusters, .. } => clusters
            .iter()
            .map(|c| {
                let l = c.limit.to_complex();
                let r = rational_to_f64(&c.radius_sqr()).sqrt() * (1.0 + 1e-12);
                let disk_box = [l + Complex64::new(r, r), l - Complex64::new(r, r)];
                let rect = Rect::around(corners.iter().copied().chain(disk_box));
                // Σ 2^{-k} < 2
                2.0 * base.derivative_envelope(&rect)
            })
            .sum(),
        Family::Pole { anchor } => {
            if locate_point(region, anchor) != PointLocation::Outside {
                return Err(FunctionError::Unbounded(anchor.clone()));
            }
            1.0 / rational_to_f64(&region.dist_sqr(anchor)).sqrt()
        }
        Family::Polynomial { coefficients } => {
            let r = Rect::around(corners).max_modulus();
            coefficients.iter().rev().fold(0.0, |acc, c| acc * r + c[0].hypot(c[1]))
        }
        Family::AbsValue { anchor } => {
            let a = anchor.to_complex();
            corners.iter().map(|v| (v - a).norm()).fold(0.0, f64::max)
        }
    };
    Ok(bound * (1.0 + BOUND_SLACK))
}

/// Sample-based estimate of `sup |f|`: a barycentric lattice with `per_side`
/// subdivisions per edge, inflated by 10%. Not rigorous.
pub fn empirical_sup(spec: &FunctionSpec, region: &Triangle, per_side: usize) -> f64 {
    let ev = spec.evaluator();
    let [a, b, c] = region.to_complex();
    let n = per_side.max(1);
    let mut best: f64 = 0.0;
    for i in 0..=n {
        for j in 0..=(n - i) {
            let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
            let z = a + (b - a) * s + (c - a) * t;
            let v = ev.eval(z).norm();
            if v.is_finite() {
                best = best.max(v);
            } else {
                return f64::INFINITY;
            }
        }
    }
    1.1 * best
}

/// `2πi` times the winding number of the boundary of `t` around `p`: `2πi`
/// for interior points, `0` outside, `None` on the boundary.
pub fn residue_expectation(t: &Triangle, p: &Point) -> Option<Complex64> {
    match locate_point(t, p) {
        PointLocation::Interior => Some(Complex64::new(0.0, 2.0 * PI)),
        PointLocation::Outside => Some(Complex64::new(0.0, 0.0)),
        _ => None,
    }
}
