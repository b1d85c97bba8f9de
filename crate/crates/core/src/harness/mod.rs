//! Scenario files, their execution, reports and SVG output.

mod report;
mod run;
mod scenario;
mod suite;
mod svg;

pub use report::{CertificateReport, CheckResult, Report, Sample, SuiteReport};
pub use run::{
    bound_for, certify, fitted_exponent, random_subtriangle, run_scenario, tiling_residuals, Run, RunOptions,
    MIN_DECAY_EXPONENT, RANDOM_SUBTRIANGLES, SHRINK_PARAMETERS,
};
pub use scenario::{
    load_scenario, parse_json, vertex_cluster, Ambient, Check, Scenario, Tolerances, ValidationError,
    DEFAULT_ASSERTION_TOL, DEFAULT_EPSILON_TARGET, DEFAULT_QUADRATURE_TOL, SCHEMA_VERSION,
};
pub use suite::{default_jobs, discover_scenarios, run_suite, SuiteError, JOBS_ENV};
pub use svg::{render_svg, svg_string};
