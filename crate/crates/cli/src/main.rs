use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use goursat::exceptional::{characteristic_system, ExceptionalSet};
use goursat::harness::{
    default_jobs, discover_scenarios, load_scenario, parse_json, render_svg, run_scenario, run_suite, RunOptions,
    JOBS_ENV,
};
use goursat::quadrature::integrate_triangle;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "goursat", version, about = "Run contour-integral scenarios against exceptional sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and print its verdicts.
    Run {
        scenario: PathBuf,
        /// Quadrature tolerance, overriding the scenario's.
        #[arg(long)]
        tol: Option<f64>,
        /// Epsilon target for the certificate, overriding the scenario's.
        #[arg(long)]
        eps: Option<f64>,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write an SVG of the decomposition here.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Write the certificate JSON here.
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Record wall-clock time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Run every `*.json` scenario in a directory.
    Suite {
        dir: PathBuf,
        /// Worker threads; defaults to the CPU count.
        #[arg(long, env = JOBS_ENV)]
        jobs: Option<usize>,
        /// Write the aggregate JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the characteristic system of an exceptional set.
    Classify { set: PathBuf },
    /// Print the raw boundary integral of a scenario's function.
    Integrate {
        scenario: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Exit status of a command; every error maps to the validation status.
fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Run { scenario, tol, eps, report, svg, certificate, timing } => {
            let s = load_scenario(&scenario).with_context(|| scenario.display().to_string())?;
            let opts = RunOptions { quadrature_tol: tol, epsilon_target: eps, timing };
            let run = run_scenario(&s, &opts)?;
            print!("{}", run.report.to_text());
            if let Some(p) = report {
                write_file(&p, &run.report.to_json())?;
            }
            if let Some(c) = &run.certificate {
                if let Some(p) = svg {
                    render_svg(c, &p).with_context(|| format!("writing {}", p.display()))?;
                }
                if let Some(p) = certificate {
                    write_file(&p, &c.to_json())?;
                }
            }
            Ok(if run.report.passed { 0 } else { EXIT_CHECK_FAILED })
        }
        Command::Suite { dir, jobs, report } => {
            let paths = discover_scenarios(&dir).with_context(|| format!("reading {}", dir.display()))?;
            let jobs = jobs.filter(|&n| n > 0).unwrap_or_else(default_jobs);
            let suite = run_suite(&paths, jobs, &RunOptions::default())?;
            for r in &suite.reports {
                print!("{}", r.to_text());
            }
            println!("{} scenarios, {} failed", suite.scenarios, suite.failed.len());
            if let Some(p) = report {
                write_file(&p, &suite.to_json())?;
            }
            Ok(suite.exit_code() as u8)
        }
        Command::Classify { set } => {
            let text = std::fs::read_to_string(&set).with_context(|| format!("reading {}", set.display()))?;
            let x: ExceptionalSet = parse_json(&text)?;
            x.validate()?;
            println!("{}", characteristic_system(&x));
            Ok(0)
        }
        Command::Integrate { scenario, tol } => {
            let s = load_scenario(&scenario).with_context(|| scenario.display().to_string())?;
            let t = s.triangle()?;
            let ev = s.function.evaluator();
            let r = integrate_triangle(&|z| ev.eval(z), &t, tol.unwrap_or(s.tolerances.quadrature))?;
            let out = serde_json::json!({
                "re": r.value.re,
                "im": r.value.im,
                "abs": r.value.norm(),
                "error_estimate": r.error_estimate,
                "function_evals": r.function_evals,
                "converged": r.converged,
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("json"));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
