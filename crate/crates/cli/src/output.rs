//! CSV and JSON writers. Floats are printed in their shortest round-trip
//! form so files reproduce the in-memory values exactly.

use std::fs;
use std::path::Path;

use serde::Serialize;

use selftrig::simulator::{EventRecord, SimOutcome, Termination, Trace};

use crate::error::CliError;

pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn trace_header(n: usize, m: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("x_{i}")));
    h.extend((1..=m).map(|i| format!("u_{i}")));
    h.extend(["V", "W", "event"].map(String::from));
    h
}

pub fn write_trace(path: &Path, trace: &Trace) -> Result<(), CliError> {
    let first = trace.rows.first();
    let n = first.map_or(0, |r| r.x.len());
    let m = first.map_or(0, |r| r.u.len());
    let mut w = csv_writer(path)?;
    w.write_record(trace_header(n, m))?;
    for r in &trace.rows {
        let mut rec = Vec::with_capacity(n + m + 4);
        rec.push(fmt_f64(r.t));
        rec.extend(r.x.iter().map(|&v| fmt_f64(v)));
        rec.extend(r.u.iter().map(|&v| fmt_f64(v)));
        rec.push(fmt_f64(r.v));
        rec.push(fmt_f64(r.w));
        rec.push(if r.event { "1" } else { "0" }.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(io_err(path))
}

pub const EVENTS_HEADER: [&str; 6] = ["k", "t_k", "t_predicted", "inter_event", "W_k", "runtime_s"];

pub fn write_events(path: &Path, events: &[EventRecord]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(EVENTS_HEADER)?;
    for e in events {
        w.write_record([
            e.k.to_string(),
            fmt_f64(e.t_k),
            fmt_f64(e.t_predicted),
            fmt_f64(e.inter_event),
            fmt_f64(e.w_k),
            fmt_f64(e.predictor_runtime),
        ])?;
    }
    w.flush().map_err(io_err(path))
}

#[derive(Debug, Serialize)]
pub struct SummaryFile {
    pub settling_time_s: Option<f64>,
    pub event_count: usize,
    pub lambda_max: f64,
    pub alpha: f64,
    pub inter_event_min_s: Option<f64>,
    pub inter_event_mean_s: Option<f64>,
    pub inter_event_max_s: Option<f64>,
    #[serde(rename = "max_V_over_W")]
    pub max_v_over_w: f64,
    pub runtime_over_inter_event: Vec<f64>,
    pub completed: bool,
    pub failure: Option<String>,
}

impl SummaryFile {
    pub fn new(outcome: &SimOutcome, lambda_max: f64, alpha: f64) -> Self {
        let s = &outcome.summary;
        let (completed, failure) = match &outcome.termination {
            Termination::Completed => (true, None),
            Termination::PredictorFailure(e) => (false, Some(e.to_string())),
        };
        Self {
            settling_time_s: s.settling_time,
            event_count: s.event_count,
            lambda_max,
            alpha,
            inter_event_min_s: s.inter_event.map(|i| i.min),
            inter_event_mean_s: s.inter_event.map(|i| i.mean),
            inter_event_max_s: s.inter_event.map(|i| i.max),
            max_v_over_w: s.max_v_over_w,
            runtime_over_inter_event: s.runtime_ratios.clone(),
            completed,
            failure,
        }
    }
}

pub fn write_summary(path: &Path, summary: &SummaryFile) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    fs::write(path, text + "\n").map_err(io_err(path))
}
