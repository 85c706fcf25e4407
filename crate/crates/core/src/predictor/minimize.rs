use super::{PredictionContext, SolverParams};
use crate::error::Result;

const MAX_BACKTRACKS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub rho: f64,
    pub iterations: usize,
    /// False when `max_iter` ran out before the iterates settled.
    pub converged: bool,
    pub backtracks: usize,
    /// Iterations where the curvature guard replaced the Newton step.
    pub curvature_fallbacks: usize,
}

/// Damped Newton search for the first local minimizer of `V(ξ(t))` after
/// `t_k`, starting at `t_k`.
///
/// The step is `−∇ₜV / |∇ₜ²V|`, which always points downhill, and is
/// shortened by `β` until `V` drops by at least `κ₁·∇ₜV·sΔρ`. Trial points
/// before `t_k` are rejected like insufficient decrease.
///
/// Where `∇ₜ²V` vanishes at rounding level the Newton step is undefined; a
/// downhill step of length `1/‖Ψ‖_F` is backtracked instead, and such steps
/// never end the iteration.
pub fn minimize_plf(ctx: &PredictionContext<'_>, params: &SolverParams) -> Result<Minimum> {
    let t_k = ctx.t_k();
    let psi_norm = ctx.dynamics.psi().norm();
    let fallback_length = 1.0 / psi_norm;
    let mut out = Minimum {
        rho: t_k,
        iterations: 0,
        converged: false,
        backtracks: 0,
        curvature_fallbacks: 0,
    };

    while out.iterations < params.max_iter {
        out.iterations += 1;
        let here = ctx.plf_at(out.rho)?;
        let flat = here.d2v.abs() <= f64::EPSILON * psi_norm * here.dv.abs();
        let step = if flat {
            out.curvature_fallbacks += 1;
            -here.dv.signum() * fallback_length
        } else {
            -here.dv / here.d2v.abs()
        };
        if step == 0.0 || here.dv == 0.0 {
            out.converged = true;
            return Ok(out);
        }

        let slope = here.dv * step;
        let mut s = 1.0;
        for _ in 0..MAX_BACKTRACKS {
            let trial = out.rho + s * step;
            if trial >= t_k && ctx.plf_at(trial)?.v - here.v < params.kappa1 * slope * s {
                break;
            }
            s *= params.beta;
            out.backtracks += 1;
        }

        let previous = out.rho;
        out.rho = (out.rho + s * step).max(t_k);
        let moved = (previous - out.rho).abs();
        if moved < params.tol1 && !(flat && s == 1.0) {
            out.converged = true;
            return Ok(out);
        }
    }
    Ok(out)
}
