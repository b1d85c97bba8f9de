use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::report::{CertificateReport, CheckResult, Report, Sample};
use super::scenario::{vertex_cluster, Check, Scenario, ValidationError};
use crate::decomposition::{decompose, shrink_at_vertex, verify_certificate, BoundMode, Certificate, DecompositionNode};
use crate::exceptional::{characteristic_system, restrict_to_triangle, CharacteristicSystem};
use crate::functions::{empirical_sup, residue_expectation, sup_bound, FunctionSpec};
use crate::geometry::Triangle;
use crate::point::{ratio, rational_to_f64};
use crate::quadrature::{contour_abs_mass, integrate_triangle, IntegralResult, PolygonalContour};

/// Shrink parameters exercised by `shrink_identity`.
pub const SHRINK_PARAMETERS: [(i64, i64); 3] = [(1, 2), (1, 10), (1, 100)];
/// Minimum fitted decay exponent of the corner integrals.
pub const MIN_DECAY_EXPONENT: f64 = 0.9;
/// Extra seeded sub-triangles tested by `vanishing`.
pub const RANDOM_SUBTRIANGLES: usize = 3;
/// Lattice resolution for empirical sup bounds.
pub const EMPIRICAL_PER_SIDE: usize = 64;

/// Command-line overrides of scenario fields.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub quadrature_tol: Option<f64>,
    pub epsilon_target: Option<f64>,
    /// Record wall-clock time in the report.
    pub timing: bool,
}

/// A finished scenario: its report and, when decomposition succeeded, the
/// certificate.
#[derive(Debug, Clone)]
pub struct Run {
    pub report: Report,
    pub certificate: Option<Certificate>,
}

struct Context<'a> {
    scenario: &'a Scenario,
    triangle: Triangle,
    f: Box<dyn Fn(Complex64) -> Complex64 + Sync + 'a>,
    tol_q: f64,
    tol_a: f64,
}

impl Context<'_> {
    fn integrate(&self, t: &Triangle) -> Result<IntegralResult, String> {
        integrate_triangle(&*self.f, t, self.tol_q).map_err(|e| e.to_string())
    }
}

/// The sup bound used for shrink leaves, or `None` when the function has no
/// finite bound on `t`.
pub fn bound_for(spec: &FunctionSpec, t: &Triangle, mode: BoundMode) -> Option<f64> {
    match mode {
        BoundMode::Rigorous => sup_bound(spec, t).ok(),
        BoundMode::Empirical => Some(empirical_sup(spec, t, EMPIRICAL_PER_SIDE)).filter(|m| m.is_finite()),
    }
}

/// Build the certificate of a scenario at the given epsilon target.
pub fn certify(s: &Scenario, t: &Triangle, epsilon_target: f64) -> Result<Certificate, String> {
    let restricted = restrict_to_triangle(&s.exceptional_set, t);
    let m = match bound_for(&s.function, t, s.m_mode) {
        Some(m) => m,
        // no shrink leaves will be built, so the bound is never used
        None if restricted.clusters.is_empty() => 0.0,
        None => return Err("function has no finite sup bound on the triangle".into()),
    };
    decompose(t, &s.exceptional_set, epsilon_target, m, s.m_mode).map_err(|e| e.to_string())
}

/// Validate and execute a scenario. Check failures are report data; only
/// validation problems are errors.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<Run, ValidationError> {
    let start = Instant::now();
    s.validate()?;
    let positive = |v: f64| v > 0.0 && v.is_finite();
    let tol_q = opts.quadrature_tol.unwrap_or(s.tolerances.quadrature);
    if !positive(tol_q) {
        return Err(ValidationError { path: "tolerances.quadrature".into(), message: "must be positive".into() });
    }
    let epsilon_target = opts.epsilon_target.unwrap_or(s.epsilon_target);
    if !positive(epsilon_target) {
        return Err(ValidationError { path: "epsilon_target".into(), message: "must be positive".into() });
    }
    let triangle = s.triangle()?;
    let ev = s.function.evaluator();
    let cx = Context {
        scenario: s,
        triangle: triangle.clone(),
        f: Box::new(move |z| ev.eval(z)),
        tol_q,
        tol_a: s.tolerances.assertion,
    };

    let (certificate, certificate_error) = match certify(s, &triangle, epsilon_target) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e)),
    };
    let violations = certificate.as_ref().map(|c| verify_certificate(c, &s.exceptional_set));
    let root = cx.integrate(&triangle);

    let checks: Vec<CheckResult> = s
        .checks
        .iter()
        .map(|check| {
            let label = check.label();
            match check {
                Check::Vanishing => vanishing(&cx, &root, label),
                Check::TilingIdentity => match &certificate {
                    Some(c) => tiling_identity(&cx, c, label),
                    None => CheckResult::failed(label, "no certificate"),
                },
                Check::ShrinkIdentity => shrink_identity(&cx, &root, label),
                Check::CertifiedBound => match (&certificate, &violations) {
                    (Some(c), Some(v)) => certified_bound(c, v.len(), &root, label),
                    _ => CheckResult::failed(label, "no certificate"),
                },
                Check::ResidueControl => residue_control(&cx, &root, label),
                Check::CharacteristicSystemExpect { k, n } => cs_expect(&cx, *k, *n, label),
            }
        })
        .collect();

    let certificate_report = certificate.as_ref().map(|c| CertificateReport {
        summary: c.summary(),
        epsilon_total: c.epsilon_total,
        epsilon_target: c.epsilon_target,
        m_bound: c.m_bound,
        m_mode: c.m_mode,
        characteristic_system: c.root.cs.to_string(),
        violations: violations.clone().unwrap_or_default(),
    });
    let passed = checks.iter().all(|c| c.passed)
        && certificate_error.is_none()
        && violations.as_ref().is_some_and(|v| v.is_empty());
    let report = Report {
        name: s.name.clone(),
        tool_version: crate::VERSION.to_string(),
        seed: s.seed,
        passed,
        checks,
        certificate: certificate_report,
        certificate_error,
        timing_ms: opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    };
    Ok(Run { report, certificate })
}

/// A seeded triangle inside `t` with small-denominator barycentric vertices.
pub fn random_subtriangle(t: &Triangle, rng: &mut impl Rng) -> Triangle {
    let [a, b, c] = t.vertices();
    loop {
        let mut pick = || {
            let w: [i64; 3] = [rng.gen_range(0..=16), rng.gen_range(0..=16), rng.gen_range(0..=16)];
            let sum = w.iter().sum::<i64>().max(1);
            a.scale(&ratio(w[0], sum)).add(&b.scale(&ratio(w[1], sum))).add(&c.scale(&ratio(w[2], sum)))
        };
        let (p, q, r) = (pick(), pick(), pick());
        // convex combinations stay inside; only degeneracy needs a retry
        if let Ok(sub) = Triangle::new(p, q, r) {
            return sub;
        }
    }
}

fn vanishing(cx: &Context, root: &Result<IntegralResult, String>, label: String) -> CheckResult {
    let r = match root {
        Ok(r) => r,
        Err(e) => return CheckResult::failed(label, e.clone()),
    };
    let mut samples = vec![Sample::new("root", r.value.norm(), cx.tol_a + r.error_estimate)];
    let mut rng = ChaCha8Rng::seed_from_u64(cx.scenario.seed);
    for i in 0..RANDOM_SUBTRIANGLES {
        let sub = random_subtriangle(&cx.triangle, &mut rng);
        match cx.integrate(&sub) {
            Ok(r) => samples.push(Sample::new(format!("random[{i}]"), r.value.norm(), cx.tol_a + r.error_estimate)),
            Err(e) => return CheckResult::failed(label, format!("random[{i}]: {e}")),
        }
    }
    CheckResult::from_samples(label, samples)
}

/// `|∮parent - Σ∮children|` against the summed error estimates, for every
/// internal node. Labels are node paths.
pub fn tiling_residuals<F>(f: &F, c: &Certificate, tol: f64) -> Result<Vec<Sample>, String>
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    fn visit<F: Fn(Complex64) -> Complex64 + ?Sized>(
        f: &F,
        n: &DecompositionNode,
        path: String,
        tol: f64,
        out: &mut Vec<Sample>,
    ) -> Result<IntegralResult, String> {
        let own = integrate_triangle(f, &n.triangle, tol).map_err(|e| format!("{path}: {e}"))?;
        if !n.is_leaf() {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut err = own.error_estimate;
            for (i, child) in n.children().iter().enumerate() {
                let r = visit(f, child, format!("{path}/{i}"), tol, out)?;
                sum += r.value;
                err += r.error_estimate;
            }
            out.push(Sample::new(path, (own.value - sum).norm(), err));
        }
        Ok(own)
    }
    let mut out = Vec::new();
    visit(f, &c.root, "root".into(), tol, &mut out)?;
    Ok(out)
}

fn tiling_identity(cx: &Context, c: &Certificate, label: String) -> CheckResult {
    match tiling_residuals(&*cx.f, c, cx.tol_q) {
        Ok(samples) if samples.is_empty() => CheckResult {
            passed: true,
            ..CheckResult::failed(label, "no internal nodes")
        },
        Ok(samples) => {
            let nodes = samples.len();
            let mut r = CheckResult::from_samples(label, samples);
            // keep the report small: only failing nodes are listed
            r.samples.retain(|s| !s.passed);
            r.with_detail(format!("{nodes} internal nodes"))
        }
        Err(e) => CheckResult::failed(label, e),
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fitted_exponent(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

fn shrink_identity(cx: &Context, root: &Result<IntegralResult, String>, label: String) -> CheckResult {
    let parent = match root {
        Ok(r) => r,
        Err(e) => return CheckResult::failed(label, e.clone()),
    };
    let t = &cx.triangle;
    let restricted = restrict_to_triangle(&cx.scenario.exceptional_set, t);
    let (Some(vertex), Ok(m)) = (vertex_cluster(t, &restricted), sup_bound(&cx.scenario.function, t)) else {
        return CheckResult::failed(label, "not a vertex cluster with a finite bound");
    };
    let perimeter = t.perimeter();
    let mut samples = Vec::new();
    let (mut ts, mut masses) = (Vec::new(), Vec::new());
    for (p, q) in SHRINK_PARAMETERS {
        let s = ratio(p, q);
        let tf = rational_to_f64(&s);
        let corner = match shrink_at_vertex(t, vertex, &s) {
            Ok(split) => split.corner,
            Err(e) => return CheckResult::failed(label, e.to_string()),
        };
        let ci = match cx.integrate(&corner) {
            Ok(r) => r,
            Err(e) => return CheckResult::failed(label, e),
        };
        let mass = match contour_abs_mass(&*cx.f, &PolygonalContour::triangle_boundary(&corner), cx.tol_q) {
            Ok(r) => r,
            Err(e) => return CheckResult::failed(label, e.to_string()),
        };
        let tag = format!("t={p}/{q}");
        let residual = (parent.value - ci.value).norm();
        samples.push(Sample::new(
            format!("identity {tag}"),
            residual,
            cx.tol_a + parent.error_estimate + ci.error_estimate,
        ));
        samples.push(Sample::new(format!("ml {tag}"), ci.value.norm(), m * tf * perimeter + cx.tol_a));
        samples.push(Sample::new(
            format!("mass {tag}"),
            ci.value.norm(),
            mass.value.re + mass.error_estimate + ci.error_estimate,
        ));
        ts.push(tf);
        masses.push(mass.value.re);
    }
    if masses.iter().all(|&m| m > 0.0) {
        samples.push(Sample::at_least("decay exponent", fitted_exponent(&ts, &masses), MIN_DECAY_EXPONENT));
    }
    CheckResult::from_samples(label, samples)
}

fn certified_bound(c: &Certificate, violations: usize, root: &Result<IntegralResult, String>, label: String) -> CheckResult {
    let r = match root {
        Ok(r) => r,
        Err(e) => return CheckResult::failed(label, e.clone()),
    };
    if violations > 0 {
        return CheckResult::failed(label, format!("certificate has {violations} violations"));
    }
    CheckResult::from_samples(
        label,
        vec![
            Sample::new("epsilon_total", c.epsilon_total, c.epsilon_target),
            Sample::new("root", r.value.norm(), c.epsilon_total + r.error_estimate),
        ],
    )
}

fn residue_control(cx: &Context, root: &Result<IntegralResult, String>, label: String) -> CheckResult {
    let r = match root {
        Ok(r) => r,
        Err(e) => return CheckResult::failed(label, e.clone()),
    };
    let expected = cx
        .scenario
        .function
        .pole_anchor()
        .and_then(|a| residue_expectation(&cx.triangle, a));
    match expected {
        Some(w) => CheckResult::from_samples(label, vec![Sample::new("residue", (r.value - w).norm(), cx.tol_a + r.error_estimate)])
            .with_detail(format!("expected {}{:+}i", w.re, w.im)),
        None => CheckResult::failed(label, "no pole off the boundary"),
    }
}

fn cs_expect(cx: &Context, k: u8, n: usize, label: String) -> CheckResult {
    let computed = characteristic_system(&restrict_to_triangle(&cx.scenario.exceptional_set, &cx.triangle));
    let expected = if n == 0 { CharacteristicSystem::Empty } else { CharacteristicSystem::System { k, n } };
    CheckResult {
        passed: computed == expected,
        ..CheckResult::failed(label, format!("computed {computed}, expected {expected}"))
    }
}
