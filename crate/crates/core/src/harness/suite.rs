use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::report::SuiteReport;
use super::run::{run_scenario, RunOptions};
use super::scenario::{load_scenario, ValidationError};

/// Environment variable consulted for the default number of suite workers.
pub const JOBS_ENV: &str = "GOURSAT_JOBS";

/// A validation failure of one scenario file in a suite.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{}: {error}", file.display())]
pub struct SuiteError {
    pub file: PathBuf,
    pub error: ValidationError,
}

/// `*.json` files directly inside `dir`, sorted by path.
pub fn discover_scenarios(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Default worker count: the environment variable when set, else the number
/// of available CPUs.
pub fn default_jobs() -> usize {
    std::env::var(JOBS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Validate every scenario, then run them on up to `jobs` threads. The first
/// invalid file, in path order, aborts the suite.
pub fn run_suite(paths: &[PathBuf], jobs: usize, opts: &RunOptions) -> Result<SuiteReport, SuiteError> {
    let mut sorted = paths.to_vec();
    sorted.sort();
    let scenarios = sorted
        .iter()
        .map(|p| load_scenario(p).map_err(|error| SuiteError { file: p.clone(), error }))
        .collect::<Result<Vec<_>, _>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    let runs = pool.install(|| {
        scenarios
            .par_iter()
            .zip(sorted.par_iter())
            .map(|(s, p)| {
                run_scenario(s, opts).map(|r| r.report).map_err(|error| SuiteError { file: p.clone(), error })
            })
            .collect::<Vec<_>>()
    });
    let reports = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(SuiteReport::from_reports(reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_suite_passes() {
        let r = run_suite(&[], 2, &RunOptions::default()).unwrap();
        assert!(r.passed);
        assert_eq!(r.scenarios, 0);
    }

    #[test]
    fn invalid_file_is_reported_with_path() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, r#"{"schema_version": 1, "name": "x"}"#).unwrap();
        let err = run_suite(std::slice::from_ref(&bad), 1, &RunOptions::default()).unwrap_err();
        assert_eq!(err.file, bad);
        assert!(discover_scenarios(dir.path()).unwrap() == vec![bad]);
    }
}
