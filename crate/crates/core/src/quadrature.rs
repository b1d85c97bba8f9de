//! Adaptive complex line integration along straight segments and closed
//! polygonal contours.
//!
//! Each piece of a segment is integrated with the 7-point Gauss rule and its
//! 15-point Kronrod extension; the difference between the two nested orders is
//! the local error estimate. Pieces whose estimate exceeds their share of the
//! tolerance are bisected, up to [`MAX_BISECTION_DEPTH`] times.

use num_complex::Complex64;

use crate::geometry::Triangle;
use crate::point::ComplexPoint;

/// Maximum number of bisections applied to any piece of a segment.
pub const MAX_BISECTION_DEPTH: u32 = 40;

// Positive Kronrod abscissae on [-1, 1]; odd indices are the Gauss nodes.
// Constants are kept at their published precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Roundoff floor factor applied to the absolute integrand mass of a piece.
const ROUNDOFF_FACTOR: f64 = 50.0 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("integrand is not finite at node {node}")]
    NonFiniteEvaluation { node: Complex64 },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("contour needs at least two vertices, got {0}")]
    TooFewVertices(usize),
    #[error("consecutive contour vertices {0} and {1} coincide")]
    RepeatedVertex(usize, usize),
}

/// Outcome of a numerical line integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: Complex64,
    /// A-posteriori estimate of `|true - value|`; not a rigorous enclosure.
    pub error_estimate: f64,
    pub function_evals: usize,
    /// False when the estimate exceeds the tolerance, e.g. after the bisection
    /// budget ran out or roundoff stalled refinement.
    pub converged: bool,
}

impl IntegralResult {
    fn zero() -> Self {
        IntegralResult {
            value: Complex64::new(0.0, 0.0),
            error_estimate: 0.0,
            function_evals: 0,
            converged: true,
        }
    }
}

struct Piece {
    kronrod: Complex64,
    gauss: Complex64,
    abs_mass: f64,
}

fn eval<F>(f: &F, z: Complex64) -> Result<Complex64, QuadratureError>
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    let v = f(z);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(QuadratureError::NonFiniteEvaluation { node: z })
    }
}

fn gauss_kronrod_15<F>(f: &F, za: Complex64, zb: Complex64) -> Result<Piece, QuadratureError>
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    let center = (za + zb) * 0.5;
    let half = (zb - za) * 0.5;

    let f_center = eval(f, center)?;
    let mut kronrod = f_center * WGK[7];
    let mut gauss = f_center * WG[3];
    let mut abs_sum = f_center.norm() * WGK[7];

    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dz = half * x;
        let f1 = eval(f, center - dz)?;
        let f2 = eval(f, center + dz)?;
        kronrod += (f1 + f2) * wk;
        abs_sum += (f1.norm() + f2.norm()) * wk;
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }

    Ok(Piece {
        kronrod: kronrod * half,
        gauss: gauss * half,
        abs_mass: abs_sum * half.norm(),
    })
}

/// Integrate `f` along the straight segment from `a` to `b`, parametrised as
/// `z(s) = (1 - s) a + s b`.
///
/// Converged results satisfy `error_estimate <= tol`.
pub fn integrate_segment<F>(
    f: &F,
    a: Complex64,
    b: Complex64,
    tol: f64,
) -> Result<IntegralResult, QuadratureError>
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(QuadratureError::InvalidTolerance(tol));
    }
    if a == b {
        return Ok(IntegralResult::zero());
    }
    let total_len = (b - a).norm();
    let mut out = IntegralResult::zero();
    let mut exhausted = false;
    refine(f, a, b, tol, total_len, 0, &mut out, &mut exhausted)?;
    out.converged = !exhausted && out.error_estimate <= tol;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn refine<F>(
    f: &F,
    za: Complex64,
    zb: Complex64,
    tol: f64,
    total_len: f64,
    depth: u32,
    out: &mut IntegralResult,
    exhausted: &mut bool,
) -> Result<(), QuadratureError>
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    let piece = gauss_kronrod_15(f, za, zb)?;
    out.function_evals += 15;

    let diff = (piece.kronrod - piece.gauss).norm();
    let floor = ROUNDOFF_FACTOR * piece.abs_mass;
    let budget = tol * (zb - za).norm() / total_len;

    // roundoff-limited pieces cannot improve under bisection
    if diff <= budget || diff <= floor {
        out.value += piece.kronrod;
        out.error_estimate += diff.max(floor);
        return Ok(());
    }
    if depth >= MAX_BISECTION_DEPTH {
        *exhausted = true;
        out.value += piece.kronrod;
        out.error_estimate += diff;
        return Ok(());
    }
    let mid = (za + zb) * 0.5;
    refine(f, za, mid, tol, total_len, depth + 1, out, exhausted)?;
    refine(f, mid, zb, tol, total_len, depth + 1, out, exhausted)
}

/// A polygonal path; closed contours store each vertex once.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalContour {
    vertices: Vec<ComplexPoint>,
    closed: bool,
}

impl PolygonalContour {
    pub fn new(vertices: Vec<ComplexPoint>, closed: bool) -> Result<Self, QuadratureError> {
        if vertices.len() < 2 {
            return Err(QuadratureError::TooFewVertices(vertices.len()));
        }
        let n = vertices.len();
        let pairs = if closed { n } else { n - 1 };
        for i in 0..pairs {
            let j = (i + 1) % n;
            if vertices[i] == vertices[j] {
                return Err(QuadratureError::RepeatedVertex(i, j));
            }
        }
        Ok(PolygonalContour { vertices, closed })
    }

    /// The closed boundary `[v1, v2, v3, v1]` of a triangle.
    pub fn triangle_boundary(t: &Triangle) -> Self {
        PolygonalContour {
            vertices: t.vertices().iter().cloned().map(ComplexPoint::Exact).collect(),
            closed: true,
        }
    }

    pub fn vertices(&self) -> &[ComplexPoint] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Directed edges, including the closing edge of a closed contour.
    pub fn edges(&self) -> Vec<(Complex64, Complex64)> {
        let pts: Vec<Complex64> = self.vertices.iter().map(ComplexPoint::to_complex).collect();
        let n = pts.len();
        let count = if self.closed { n } else { n - 1 };
        (0..count).map(|i| (pts[i], pts[(i + 1) % n])).collect()
    }

    pub fn length(&self) -> f64 {
        self.edges().iter().map(|(a, b)| (b - a).norm()).sum()
    }
}

/// Integrate `f` around a polygonal contour, splitting `tol` evenly across edges.
pub fn integrate_contour<F>(
    f: &F,
    contour: &PolygonalContour,
    tol: f64,
) -> Result<IntegralResult, QuadratureError>
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(QuadratureError::InvalidTolerance(tol));
    }
    let edges = contour.edges();
    let edge_tol = tol / edges.len() as f64;
    let mut total = IntegralResult::zero();
    for (a, b) in edges {
        let r = integrate_segment(f, a, b, edge_tol)?;
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        total.function_evals += r.function_evals;
        total.converged &= r.converged;
    }
    total.converged &= total.error_estimate <= tol;
    Ok(total)
}

/// Integral of `f` around the counter-clockwise boundary of `t`.
pub fn integrate_triangle<F>(f: &F, t: &Triangle, tol: f64) -> Result<IntegralResult, QuadratureError>
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    integrate_contour(f, &PolygonalContour::triangle_boundary(t), tol)
}

/// Total variation `∮ |f| |dz|` around a contour, the quantity dominated by the
/// ML estimate.
pub fn contour_abs_mass<F>(
    f: &F,
    contour: &PolygonalContour,
    tol: f64,
) -> Result<IntegralResult, QuadratureError>
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    let abs_f = |z: Complex64| Complex64::new(f(z).norm(), 0.0);
    let edges = contour.edges();
    let edge_tol = tol / edges.len() as f64;
    let mut total = IntegralResult::zero();
    for (a, b) in edges {
        // a real nonnegative integrand along a straight edge integrates to
        // |b - a| times its mean, so the modulus is the |dz| integral
        let r = integrate_segment(&abs_f, a, b, edge_tol)?;
        total.value += Complex64::new(r.value.norm(), 0.0);
        total.error_estimate += r.error_estimate;
        total.function_evals += r.function_evals;
        total.converged &= r.converged;
    }
    Ok(total)
}

/// The ML inequality bound `m * length`.
pub fn ml_bound(m: f64, length: f64) -> f64 {
    debug_assert!(m >= 0.0 && length >= 0.0);
    m * length
}
