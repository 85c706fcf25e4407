//! Brute-force references for the predictor: fixed-grid scans for the
//! first threshold crossing and the first PLF minimum.
//!
//! The state is advanced with a cached one-step transition and re-anchored
//! to an exactly computed `e^{Ψ t}` every `REANCHOR` steps so rounding does
//! not accumulate over millions of samples.

use crate::error::{Error, Result};
use crate::predictor::PredictionContext;

const REANCHOR: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanResult {
    /// Grid point `t_k + j·grid_step` where the scanned condition first held.
    pub t_found: f64,
    pub grid_step: f64,
    pub samples_evaluated: usize,
}

/// Walks `ξ(t_k + j·h)` for `j = 1, 2, ...` up to `t_k + horizon`, handing
/// `(j, V)` to `visit` until it returns `true`.
fn scan<F>(ctx: &PredictionContext<'_>, h: f64, horizon: f64, mut visit: F) -> Result<Option<usize>>
where
    F: FnMut(usize, f64) -> bool,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "grid_step",
            constraint: "grid_step > 0",
            value: h,
        });
    }
    let dim = ctx.event_state.xi.len();
    let n = dim / 2;
    let step = ctx.dynamics.transition(h)?;
    // Row-major copies for the inner loop.
    let step_rm: Vec<f64> = (0..dim * dim).map(|i| step[(i / dim, i % dim)]).collect();
    let p = ctx.cert.p();
    let p_rm: Vec<f64> = (0..n * n).map(|i| p[(i / n, i % n)]).collect();
    let xi0 = ctx.event_state.xi.as_slice().to_vec();

    let steps = (horizon / h).floor() as usize;
    let mut xi = xi0.clone();
    let mut next = vec![0.0; dim];
    for j in 1..=steps {
        if j % REANCHOR == 0 {
            let exact = ctx.dynamics.transition(j as f64 * h)? * &ctx.event_state.xi;
            xi.copy_from_slice(exact.as_slice());
        } else {
            for (r, out) in next.iter_mut().enumerate() {
                let row = &step_rm[r * dim..(r + 1) * dim];
                *out = row.iter().zip(&xi).map(|(a, b)| a * b).sum();
            }
            std::mem::swap(&mut xi, &mut next);
        }
        let mut v = 0.0;
        for r in 0..n {
            let row = &p_rm[r * n..(r + 1) * n];
            v += xi[r] * row.iter().zip(&xi[..n]).map(|(a, b)| a * b).sum::<f64>();
        }
        if visit(j, v) {
            return Ok(Some(j));
        }
    }
    Ok(None)
}

/// First grid point after `t_k` where `Z = W − V` is negative.
///
/// The true crossing lies within one `grid_step` before `t_found`.
pub fn dense_event_scan(
    ctx: &PredictionContext<'_>,
    grid_step: f64,
    horizon: f64,
) -> Result<ScanResult> {
    let seg = ctx.segment;
    let decay = (-seg.alpha() * grid_step).exp();
    let mut w = seg.w_k();
    let mut samples = 0;
    let hit = scan(ctx, grid_step, horizon, |j, v| {
        samples += 1;
        w = if j % REANCHOR == 0 {
            seg.value(ctx.t_k() + j as f64 * grid_step)
        } else {
            w * decay
        };
        w - v < 0.0
    })?;
    match hit {
        Some(j) => Ok(ScanResult {
            t_found: ctx.t_k() + j as f64 * grid_step,
            grid_step,
            samples_evaluated: samples,
        }),
        None => Err(Error::HorizonExhausted {
            what: "threshold crossing",
            horizon,
        }),
    }
}

/// First grid point where the forward difference of `V` turns from negative
/// to non-negative, i.e. the first grid-resolved local minimum.
pub fn dense_min_scan(
    ctx: &PredictionContext<'_>,
    grid_step: f64,
    horizon: f64,
) -> Result<ScanResult> {
    let v0 = ctx.cert.plf_of_state(&ctx.event_state.x());
    let mut prev_v = v0;
    let mut was_decreasing = false;
    let mut samples = 1;
    let hit = scan(ctx, grid_step, horizon, |_, v| {
        samples += 1;
        let diff = v - prev_v;
        prev_v = v;
        if diff < 0.0 {
            was_decreasing = true;
            false
        } else {
            was_decreasing
        }
    })?;
    match hit {
        // The sample before the first non-negative difference is the minimum.
        Some(j) => Ok(ScanResult {
            t_found: ctx.t_k() + (j - 1) as f64 * grid_step,
            grid_step,
            samples_evaluated: samples,
        }),
        None => Err(Error::HorizonExhausted {
            what: "local minimum",
            horizon,
        }),
    }
}
