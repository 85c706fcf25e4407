//! Sampled closed-loop simulation driven by the event predictor.
//!
//! The plant advances on a fixed grid of period `T_s` with the exact
//! one-step transition `e^{Ψ T_s}`. At each update the control is recomputed,
//! the hold error is cleared, the threshold restarts at `W_k = V(ξ(t_k))`
//! and the next event is predicted. The control is updated at the predicted
//! time rounded down to the grid, so the update always lands before the
//! crossing.

use std::time::Instant;

use crate::certificate::{build_derivative_matrices, PlfCertificate, ThresholdSegment};
use crate::error::{Error, Result};
use crate::kernels::Vector;
use crate::plant::{build_closed_loop, reset_event_state, Feedback, LtiSystem};
use crate::predictor::{next_event, Branch, PredictionContext, SolverParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Grid step `T_s` (s).
    pub sample_period: f64,
    /// Simulated duration (s).
    pub horizon: f64,
    /// State-norm level used for the settling time.
    pub settle_threshold: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            sample_period: 1e-3,
            horizon: 7.0,
            settle_threshold: 0.05,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_period > 0.0 && self.sample_period.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "T_s",
                constraint: "T_s > 0",
                value: self.sample_period,
            });
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "horizon",
                constraint: "horizon > 0",
                value: self.horizon,
            });
        }
        if !(self.settle_threshold > 0.0) {
            return Err(Error::InvalidParameter {
                name: "settle_threshold",
                constraint: "settle_threshold > 0",
                value: self.settle_threshold,
            });
        }
        Ok(())
    }

    /// Index of the last grid point in `[0, horizon]`.
    pub fn last_index(&self) -> usize {
        (self.horizon / self.sample_period + 1e-9).floor() as usize
    }
}

/// One control update after `t₀`. The predictor diagnostics describe the
/// prediction that produced this update, made at the previous one.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub k: usize,
    /// Applied (grid-aligned) update instant.
    pub t_k: f64,
    /// Continuous-time prediction the update was derived from.
    pub t_predicted: f64,
    pub inter_event: f64,
    /// Threshold after the correction at `t_k`.
    pub w_k: f64,
    /// Wall-clock time spent predicting this event (s). Reported only.
    pub predictor_runtime: f64,
    /// PLF minimum on the interval ending at this update.
    pub rho: f64,
    pub branch: Branch,
    pub tol2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub x: Vector,
    pub u: Vector,
    pub v: f64,
    pub w: f64,
    /// The control was (re)computed at this grid point.
    pub event: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterEventStats {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    /// First grid time from which `‖x‖` stays below the threshold through
    /// the end of the trace; `None` if it never settles.
    pub settling_time: Option<f64>,
    pub event_count: usize,
    pub inter_event: Option<InterEventStats>,
    pub max_v_over_w: f64,
    /// Predictor runtime divided by the interval it predicted, per event.
    pub runtime_ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    /// The predictor failed at the last recorded event; the trace stops there.
    PredictorFailure(Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub trace: Trace,
    pub events: Vec<EventRecord>,
    pub summary: Summary,
    pub termination: Termination,
}

pub fn run(
    sys: &LtiSystem,
    fb: &Feedback,
    cert: &PlfCertificate,
    params: &SolverParams,
    sim: &SimConfig,
) -> Result<SimOutcome> {
    sim.validate()?;
    params.validate()?;
    let dynamics = build_closed_loop(sys, fb)?;
    let derivs = build_derivative_matrices(sys, fb, cert.p())?;
    let step = dynamics.transition(sim.sample_period)?;
    let n = sys.state_dim();
    let last = sim.last_index();
    let ts = sim.sample_period;
    let alpha = cert.alpha();

    let mut rows = Vec::with_capacity(last + 1);
    let mut events: Vec<EventRecord> = Vec::new();
    let mut termination = Termination::Completed;

    let mut event_j = 0usize;
    let mut x_k = sys.x0().clone();
    let mut w_k = cert.w0();

    loop {
        let t_k = event_j as f64 * ts;
        let u = fb.control(&x_k);
        let mut pending = None;
        let mut stop_after_event_row = false;

        if x_k.iter().any(|&v| v != 0.0) {
            let seg = ThresholdSegment::new(w_k, t_k, alpha)?;
            let ctx = PredictionContext::new(
                &dynamics,
                cert,
                &derivs,
                seg,
                reset_event_state(&x_k, t_k),
            )?;
            let started = Instant::now();
            let prediction = next_event(&ctx, params);
            let runtime = started.elapsed().as_secs_f64();
            match prediction {
                Ok(pred) => {
                    let j = (pred.t_next / ts).floor() as usize;
                    if pred.t_next < t_k + ts || j <= event_j {
                        termination = Termination::PredictorFailure(
                            Error::EventWithinSamplingPeriod {
                                t_k,
                                t_predicted: pred.t_next,
                            },
                        );
                        stop_after_event_row = true;
                    } else if j <= last {
                        pending = Some((j, pred, runtime));
                    }
                }
                Err(e) => {
                    log::warn!("prediction failed at t = {t_k}: {e}");
                    termination = Termination::PredictorFailure(e);
                    stop_after_event_row = true;
                }
            }
        }

        let end = match (&pending, stop_after_event_row) {
            (_, true) => event_j + 1,
            (Some((j, _, _)), _) => *j,
            (None, false) => last + 1,
        };
        let tol = 1e-12 * w_k.max(1.0);
        let mut xi = reset_event_state(&x_k, t_k).xi;
        for j in event_j..end {
            if j > event_j {
                xi = &step * &xi;
            }
            let t = j as f64 * ts;
            let x = xi.rows(0, n).into_owned();
            let v = cert.plf_of_state(&x);
            let w = w_k * (-alpha * (t - t_k)).exp();
            if v - w > tol {
                return Err(Error::CertificateViolation { t, v, w });
            }
            rows.push(TraceRow {
                t,
                x,
                u: u.clone(),
                v,
                w,
                event: j == event_j,
            });
        }

        let Some((j, pred, runtime)) = pending else {
            break;
        };
        xi = &step * &xi;
        x_k = xi.rows(0, n).into_owned();
        w_k = cert.plf_of_state(&x_k);
        let t_applied = j as f64 * ts;
        events.push(EventRecord {
            k: events.len() + 1,
            t_k: t_applied,
            t_predicted: pred.t_next,
            inter_event: (j - event_j) as f64 * ts,
            w_k,
            predictor_runtime: runtime,
            rho: pred.rho_k,
            branch: pred.branch,
            tol2: pred.tol2,
        });
        log::debug!(
            "event {} at {t_applied} (predicted {}), W_k = {w_k}",
            events.len(),
            pred.t_next
        );
        event_j = j;
    }

    let trace = Trace { rows };
    let summary = summarize(&trace, &events, sim.settle_threshold)?;
    Ok(SimOutcome {
        trace,
        events,
        summary,
        termination,
    })
}

pub fn summarize(trace: &Trace, events: &[EventRecord], settle_threshold: f64) -> Result<Summary> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let last_above = trace
        .rows
        .iter()
        .rposition(|r| r.x.norm() >= settle_threshold);
    let settling_time = match last_above {
        None => Some(trace.rows[0].t),
        Some(i) => trace.rows.get(i + 1).map(|r| r.t),
    };

    let inter_event = if events.is_empty() {
        None
    } else {
        let gaps = events.iter().map(|e| e.inter_event);
        Some(InterEventStats {
            min: gaps.clone().fold(f64::INFINITY, f64::min),
            max: gaps.clone().fold(f64::NEG_INFINITY, f64::max),
            mean: gaps.sum::<f64>() / events.len() as f64,
        })
    };

    let max_v_over_w = trace
        .rows
        .iter()
        .filter(|r| r.w > 0.0)
        .map(|r| r.v / r.w)
        .fold(0.0, f64::max);

    Ok(Summary {
        settling_time,
        event_count: events.len(),
        inter_event,
        max_v_over_w,
        runtime_ratios: events
            .iter()
            .map(|e| e.predictor_runtime / e.inter_event)
            .collect(),
    })
}
