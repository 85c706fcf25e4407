use std::io::Write;
use std::path::Path;
use std::time::Instant;

use selftrig::certificate::{build_derivative_matrices, PlfCertificate, ThresholdSegment};
use selftrig::kernels::Vector;
use selftrig::oracle::dense_event_scan;
use selftrig::plant::{build_closed_loop, reset_event_state, Feedback, LtiSystem};
use selftrig::predictor::{minimize_plf, next_event, Prediction, PredictionContext, SolverParams};
use selftrig::scalar::{rho_k_analytic, validate_gain, GainCase, ScalarSystem};
use selftrig::simulator::{run, SimOutcome, Termination};

use crate::config::{Format, RunConfig};
use crate::error::{from_run_error, CliError};
use crate::output::{self, fmt_f64, SummaryFile};
use crate::suite;

// Report output is best effort; a closed stdout must not mask the result.
macro_rules! say {
    ($w:expr, $($arg:tt)*) => {{
        let _ = writeln!($w, $($arg)*);
    }};
}

pub fn simulate(cfg: &RunConfig, out_dir: &Path, w: &mut dyn Write) -> Result<SimOutcome, CliError> {
    let outcome = run(
        &cfg.system,
        &cfg.feedback,
        &cfg.certificate,
        &cfg.solver,
        &cfg.sim,
    )
    .map_err(from_run_error)?;
    output::ensure_dir(out_dir)?;
    if cfg.output.formats.contains(&Format::Csv) {
        output::write_trace(&out_dir.join("trace.csv"), &outcome.trace)?;
        output::write_events(&out_dir.join("events.csv"), &outcome.events)?;
    }
    let summary = SummaryFile::new(
        &outcome,
        cfg.certificate.lambda_max(),
        cfg.certificate.alpha(),
    );
    if cfg.output.formats.contains(&Format::Json) {
        output::write_summary(&out_dir.join("summary.json"), &summary)?;
    }

    say!(w, "events: {}", summary.event_count);
    for e in outcome.events.iter().take(10) {
        say!(
            w,
            "  k={:<3} t_k={:<8} inter_event={:<8} W_k={}",
            e.k,
            fmt_f64(e.t_k),
            fmt_f64(e.inter_event),
            fmt_f64(e.w_k)
        );
    }
    if outcome.events.len() > 10 {
        say!(w, "  ...");
    }
    match summary.settling_time_s {
        Some(t) => say!(w, "settling time: {} s", fmt_f64(t)),
        None => say!(w, "settling time: not reached"),
    }
    say!(w, "max V/W: {}", fmt_f64(summary.max_v_over_w));
    say!(w, "outputs written to {}", out_dir.display());

    if let Termination::PredictorFailure(e) = &outcome.termination {
        return Err(CliError::Predictor(e.clone()));
    }
    Ok(outcome)
}

#[derive(Debug, Clone, Default)]
pub struct PredictOptions {
    pub t0: f64,
    pub state: Option<Vec<f64>>,
    pub w: Option<f64>,
}

pub fn predict(cfg: &RunConfig, opts: &PredictOptions, w: &mut dyn Write) -> Result<Prediction, CliError> {
    let n = cfg.system.state_dim();
    let x = match &opts.state {
        Some(v) if v.len() != n => {
            return Err(CliError::config(
                "--state",
                format!("expected {n} entries, got {}", v.len()),
            ))
        }
        Some(v) => Vector::from_column_slice(v),
        None => cfg.system.x0().clone(),
    };
    let v = cfg.certificate.plf_of_state(&x);
    let w_k = opts.w.unwrap_or(match opts.state {
        None => cfg.certificate.w0(),
        Some(_) => v,
    });
    if w_k < v {
        return Err(CliError::config(
            "--w",
            format!("threshold {w_k} is below V(state) = {v}"),
        ));
    }
    let seg = ThresholdSegment::new(w_k, opts.t0, cfg.certificate.alpha())
        .map_err(|e| CliError::config("--w", e))?;
    let dynamics = build_closed_loop(&cfg.system, &cfg.feedback).map_err(CliError::Predictor)?;
    let derivs = build_derivative_matrices(&cfg.system, &cfg.feedback, cfg.certificate.p())
        .map_err(CliError::Predictor)?;
    let ctx = PredictionContext::new(
        &dynamics,
        &cfg.certificate,
        &derivs,
        seg,
        reset_event_state(&x, opts.t0),
    )
    .map_err(CliError::Predictor)?;
    let p = next_event(&ctx, &cfg.solver).map_err(CliError::Predictor)?;

    say!(w, "t_k: {}", fmt_f64(opts.t0));
    say!(w, "W_k: {}", fmt_f64(w_k));
    say!(w, "tol2: {}", fmt_f64(p.tol2));
    say!(
        w,
        "rho_k: {} (iterations {}, backtracks {}, converged {})",
        fmt_f64(p.rho_k),
        p.minimum.iterations,
        p.minimum.backtracks,
        p.minimum.converged
    );
    say!(w, "branch: {}", p.branch.label());
    if let Some(b) = &p.bracket {
        say!(
            w,
            "bracket: [{}, {}] (probes {})",
            fmt_f64(b.bracket.t_min),
            fmt_f64(b.bracket.t_max),
            b.probes
        );
    }
    if let Some(r) = &p.root {
        say!(
            w,
            "root: iterations {}, newton {}, bisection {}, converged {}",
            r.iterations,
            r.newton_steps,
            r.bisection_steps,
            r.converged
        );
    }
    say!(w, "t_next: {}", fmt_f64(p.t_next));
    Ok(p)
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub grid: f64,
    pub seed: Option<u64>,
}

const VERIFIED_EVENTS: usize = 5;

struct Plant<'a> {
    system: &'a LtiSystem,
    feedback: &'a Feedback,
    certificate: &'a PlfCertificate,
    solver: &'a SolverParams,
}

struct Check {
    grid: f64,
    worst: f64,
    mismatches: Vec<String>,
    runtime_ok: usize,
    runtime_total: usize,
}

impl Check {
    fn new(grid: f64) -> Self {
        Self {
            grid,
            worst: 0.0,
            mismatches: Vec::new(),
            runtime_ok: 0,
            runtime_total: 0,
        }
    }

    /// Predicts from `(x, t_k, w_k)`, scans for the same crossing and
    /// records the difference. Returns the predicted event time.
    fn compare(
        &mut self,
        label: &str,
        plant: &Plant<'_>,
        (x, t_k, w_k): (&Vector, f64, f64),
        w: &mut dyn Write,
    ) -> Result<Option<f64>, CliError> {
        let (sys, fb, cert) = (plant.system, plant.feedback, plant.certificate);
        let grid = self.grid;
        let dynamics = build_closed_loop(sys, fb).map_err(CliError::Predictor)?;
        let derivs = build_derivative_matrices(sys, fb, cert.p()).map_err(CliError::Predictor)?;
        let seg = ThresholdSegment::new(w_k, t_k, cert.alpha()).map_err(CliError::Predictor)?;
        let ctx = PredictionContext::new(&dynamics, cert, &derivs, seg, reset_event_state(x, t_k))
            .map_err(CliError::Predictor)?;
        let started = Instant::now();
        let pred = match next_event(&ctx, plant.solver) {
            Ok(p) => p,
            Err(e) => {
                self.mismatches.push(format!("{label}: predictor failed: {e}"));
                say!(w, "{label}: predictor failed: {e}");
                return Ok(None);
            }
        };
        let runtime = started.elapsed().as_secs_f64();
        let span = pred.t_next - t_k;
        self.runtime_total += 1;
        if runtime < span {
            self.runtime_ok += 1;
        }
        let tol = pred.tol2.max(2.0 * grid);
        match dense_event_scan(&ctx, grid, 1.5 * span + 10.0 * grid) {
            Ok(scan) => {
                let delta = (pred.t_next - scan.t_found).abs();
                self.worst = self.worst.max(delta);
                let ok = delta <= tol;
                say!(
                    w,
                    "{label}: t_k={} predicted={} scan={} delta={:.3e} tol={:.1e} {}",
                    fmt_f64(t_k),
                    fmt_f64(pred.t_next),
                    fmt_f64(scan.t_found),
                    delta,
                    tol,
                    if ok { "ok" } else { "MISMATCH" }
                );
                if !ok {
                    self.mismatches.push(format!(
                        "{label}: predicted {} vs scan {}",
                        pred.t_next, scan.t_found
                    ));
                }
            }
            Err(e) => {
                say!(w, "{label}: scan failed: {e}");
                self.mismatches.push(format!("{label}: scan failed: {e}"));
            }
        }
        Ok(Some(pred.t_next))
    }
}

pub fn verify(cfg: &RunConfig, opts: &VerifyOptions, w: &mut dyn Write) -> Result<(), CliError> {
    if !(opts.grid > 0.0 && opts.grid.is_finite()) {
        return Err(CliError::config("--grid", "grid step must be positive"));
    }
    let mut check = Check::new(opts.grid);
    let plant = Plant {
        system: &cfg.system,
        feedback: &cfg.feedback,
        certificate: &cfg.certificate,
        solver: &cfg.solver,
    };

    let outcome = run(&cfg.system, &cfg.feedback, &cfg.certificate, &cfg.solver, &cfg.sim)
        .map_err(from_run_error)?;
    let event_rows = outcome
        .trace
        .rows
        .iter()
        .filter(|r| r.event && r.x.iter().any(|&v| v != 0.0))
        .take(VERIFIED_EVENTS);
    for (k, row) in event_rows.enumerate() {
        check.compare(&format!("event {k}"), &plant, (&row.x, row.t, row.w), w)?;
    }

    if cfg.system.state_dim() == 1 && cfg.system.input_dim() == 1 {
        let s = scalar_system(cfg)?;
        let offset = rho_k_analytic(&s, 0.0).map_err(|e| CliError::config("system", e))?;
        let tol = cfg.solver.tol1.max(1e-6);
        let mut previous = 0.0;
        for e in outcome.events.iter().take(VERIFIED_EVENTS) {
            let numeric = e.rho - previous;
            let delta = (numeric - offset).abs();
            let ok = delta <= tol;
            say!(
                w,
                "analytic rho offset {} vs numeric {} (interval from {}): delta={:.3e} {}",
                fmt_f64(offset),
                fmt_f64(numeric),
                fmt_f64(previous),
                delta,
                if ok { "ok" } else { "MISMATCH" }
            );
            if !ok {
                check
                    .mismatches
                    .push(format!("analytic rho {offset} vs numeric {numeric}"));
            }
            previous = e.t_k;
        }
    }

    if let Some(seed) = opts.seed {
        let mut rng = suite::rng(seed);
        for s in 0..20 {
            let n = 1 + s % 4;
            let case = suite::random_case(&mut rng, n);
            let plant = Plant {
                system: &case.system,
                feedback: &case.feedback,
                certificate: &case.certificate,
                solver: &cfg.solver,
            };
            let (mut x, mut t, mut w_k) = (case.system.x0().clone(), 0.0, case.certificate.w0());
            let dynamics = build_closed_loop(&case.system, &case.feedback).map_err(CliError::Predictor)?;
            for k in 0..VERIFIED_EVENTS {
                let label = format!("random system {s} (n={n}) event {k}");
                let Some(t_next) = check.compare(&label, &plant, (&x, t, w_k), w)? else {
                    break;
                };
                let at = dynamics.transition(t_next - t).map_err(CliError::Predictor)?
                    * reset_event_state(&x, t).xi;
                x = at.rows(0, n).into_owned();
                t = t_next;
                w_k = case.certificate.plf_of_state(&x);
            }
        }
    }

    say!(
        w,
        "informational: {}/{} predictions finished within their own inter-event interval",
        check.runtime_ok,
        check.runtime_total
    );
    say!(w, "max delta: {:.3e}", check.worst);
    if check.mismatches.is_empty() {
        say!(w, "verification passed");
        Ok(())
    } else {
        Err(CliError::Mismatch(format!(
            "{} check(s) failed: {}",
            check.mismatches.len(),
            check.mismatches.join("; ")
        )))
    }
}

fn scalar_system(cfg: &RunConfig) -> Result<ScalarSystem, CliError> {
    if cfg.system.state_dim() != 1 || cfg.system.input_dim() != 1 {
        return Err(CliError::config(
            "system",
            "the scalar command needs a one-dimensional plant with one input",
        ));
    }
    let a = cfg.system.a()[(0, 0)];
    let b = cfg.system.b()[(0, 0)];
    let k = cfg.feedback.gain()[(0, 0)];
    let p = cfg.certificate.p()[(0, 0)];
    ScalarSystem::new(a, b, 1.0, k, p, -2.0 * p * (a - b * k))
        .map_err(|e| CliError::config("system", e))
}

pub fn scalar(cfg: &RunConfig, w: &mut dyn Write) -> Result<(), CliError> {
    let s = scalar_system(cfg)?;
    let gain = validate_gain(&s);
    say!(w, "a={} b={} K={} p={}", fmt_f64(s.a()), fmt_f64(s.b()), fmt_f64(s.k()), fmt_f64(s.p()));
    say!(
        w,
        "plant: {}",
        match gain.case {
            GainCase::UnstablePlant => "open-loop unstable",
            GainCase::StablePlant => "open-loop stable",
        }
    );
    say!(w, "bK/(bK - a) = {}", fmt_f64(gain.ratio));
    if let Some(above) = gain.ratio_exceeds_one {
        say!(w, "ratio exceeds one: {above}");
    }
    if !gain.valid {
        say!(w, "V has no interior minimum for this gain");
        return Ok(());
    }
    let offset = rho_k_analytic(&s, 0.0).map_err(|e| CliError::config("system", e))?;
    say!(w, "analytic rho_k - t_k: {}", fmt_f64(offset));

    let dynamics = build_closed_loop(&cfg.system, &cfg.feedback).map_err(CliError::Predictor)?;
    let derivs = build_derivative_matrices(&cfg.system, &cfg.feedback, cfg.certificate.p())
        .map_err(CliError::Predictor)?;
    let seg = ThresholdSegment::new(cfg.certificate.w0(), 0.0, cfg.certificate.alpha())
        .map_err(CliError::Predictor)?;
    let ctx = PredictionContext::new(
        &dynamics,
        &cfg.certificate,
        &derivs,
        seg,
        reset_event_state(cfg.system.x0(), 0.0),
    )
    .map_err(CliError::Predictor)?;
    let numeric = minimize_plf(&ctx, &cfg.solver).map_err(CliError::Predictor)?.rho;
    say!(
        w,
        "numeric rho_0 from x0: {} (delta {:.3e})",
        fmt_f64(numeric),
        (numeric - offset).abs()
    );

    let outcome = run(&cfg.system, &cfg.feedback, &cfg.certificate, &cfg.solver, &cfg.sim)
        .map_err(from_run_error)?;
    let mut previous = 0.0;
    for e in &outcome.events {
        say!(
            w,
            "event {}: t_k={} rho - t_(k-1)={}",
            e.k,
            fmt_f64(e.t_k),
            fmt_f64(e.rho - previous)
        );
        previous = e.t_k;
    }
    Ok(())
}
