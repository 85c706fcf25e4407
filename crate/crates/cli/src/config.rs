//! JSON run configuration.
//!
//! ```json
//! {
//!   "system": { "A": [[0, 1], [0, 0]], "B": [[0], [1]], "x0": [1, -0.5] },
//!   "feedback": { "K": [[1, 2]] },
//!   "certificate": { "alpha": 0.5, "w0_multiplier": 1.3 },
//!   "solver": { "tol2_base": 1e-5 },
//!   "sim": { "T_s": 0.001, "horizon": 10 },
//!   "output": { "directory": "out", "formats": ["csv", "json"] }
//! }
//! ```
//!
//! `solver`, `sim` and `output` may be omitted, as may any field inside them.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use selftrig::certificate::{InitialThreshold, PSource, PlfCertificate};
use selftrig::kernels::{Matrix, Vector};
use selftrig::plant::{Feedback, LtiSystem};
use selftrig::predictor::SolverParams;
use selftrig::simulator::SimConfig;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    system: RawSystem,
    feedback: RawFeedback,
    certificate: RawCertificate,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    sim: RawSim,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    x0: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFeedback {
    #[serde(rename = "K")]
    k: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCertificate {
    alpha: f64,
    w0_multiplier: Option<f64>,
    w0_absolute: Option<f64>,
    #[serde(rename = "P")]
    p: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    max_iter: Option<usize>,
    beta: Option<f64>,
    kappa1: Option<f64>,
    tol1: Option<f64>,
    kappa2: Option<f64>,
    tol2_base: Option<f64>,
    horizon_factor: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    #[serde(rename = "T_s")]
    t_s: Option<f64>,
    horizon: Option<f64>,
    settle_threshold: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
    formats: Option<Vec<Format>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

/// A validated configuration, ready to run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system: LtiSystem,
    pub feedback: Feedback,
    pub certificate: PlfCertificate,
    pub solver: SolverParams,
    pub sim: SimConfig,
    pub output: OutputConfig,
}

pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    let raw: RawConfig = serde_json::from_str(&text).map_err(|source| CliError::Syntax {
        path: path.to_owned(),
        source,
    })?;
    build(raw)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, CliError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|source| CliError::Syntax {
        path: PathBuf::from("<string>"),
        source,
    })?;
    build(raw)
}

fn matrix(field: &str, rows: &[Vec<f64>]) -> Result<Matrix, CliError> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(CliError::config(field, "must be a non-empty nested array"));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(CliError::config(
            field,
            format!("row {} has {} entries, expected {ncols}", i + 1, r.len()),
        ));
    }
    Ok(Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn build(raw: RawConfig) -> Result<RunConfig, CliError> {
    let a = matrix("system.A", &raw.system.a)?;
    let b = matrix("system.B", &raw.system.b)?;
    if raw.system.x0.is_empty() {
        return Err(CliError::config("system.x0", "must be non-empty"));
    }
    let system = LtiSystem::new(a, b, Vector::from_column_slice(&raw.system.x0))
        .map_err(|e| CliError::config("system", e))?;
    let k = matrix("feedback.K", &raw.feedback.k)?;
    let feedback = Feedback::new(&system, k).map_err(|e| CliError::config("feedback.K", e))?;

    let threshold = match (raw.certificate.w0_multiplier, raw.certificate.w0_absolute) {
        (Some(m), None) => InitialThreshold::Multiplier(m),
        (None, Some(w)) => InitialThreshold::Absolute(w),
        _ => {
            return Err(CliError::config(
                "certificate",
                "give exactly one of w0_multiplier and w0_absolute",
            ))
        }
    };
    let source = match &raw.certificate.p {
        Some(p) => PSource::Explicit(matrix("certificate.P", p)?),
        None => PSource::Synthesize,
    };
    let certificate = PlfCertificate::new(
        &system,
        &feedback,
        raw.certificate.alpha,
        source,
        threshold,
    )
    .map_err(|e| CliError::config("certificate", e))?;

    let d = SolverParams::default();
    let s = raw.solver;
    let solver = SolverParams {
        max_iter: s.max_iter.unwrap_or(d.max_iter),
        beta: s.beta.unwrap_or(d.beta),
        kappa1: s.kappa1.unwrap_or(d.kappa1),
        tol1: s.tol1.unwrap_or(d.tol1),
        kappa2: s.kappa2.unwrap_or(d.kappa2),
        tol2_base: s.tol2_base.unwrap_or(d.tol2_base),
        horizon_factor: s.horizon_factor.unwrap_or(d.horizon_factor),
    };
    solver.validate().map_err(|e| CliError::config("solver", e))?;

    let d = SimConfig::default();
    let sim = SimConfig {
        sample_period: raw.sim.t_s.unwrap_or(d.sample_period),
        horizon: raw.sim.horizon.unwrap_or(d.horizon),
        settle_threshold: raw.sim.settle_threshold.unwrap_or(d.settle_threshold),
    };
    sim.validate().map_err(|e| CliError::config("sim", e))?;

    let output = OutputConfig {
        directory: raw.output.directory.unwrap_or_else(|| PathBuf::from(".")),
        formats: raw
            .output
            .formats
            .unwrap_or_else(|| vec![Format::Csv, Format::Json]),
    };

    Ok(RunConfig {
        system,
        feedback,
        certificate,
        solver,
        sim,
        output,
    })
}
