use super::{Bracket, PredictionContext, SolverParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RootOutcome {
    pub t: f64,
    pub iterations: usize,
    /// False when `max_iter` ran out; `t` is then the last iterate.
    pub converged: bool,
    pub newton_steps: usize,
    pub bisection_steps: usize,
    /// Bracket after each iteration, starting with the initial one.
    pub brackets: Vec<Bracket>,
}

/// Safeguarded Newton iteration on `Z` inside a sign-change bracket.
///
/// Starts from the midpoint. A Newton step is rejected for a bisection step
/// when it leaves the open bracket or is longer than half the step before
/// last. Stops once the step length drops below `tol2`.
pub fn newton_bisection(
    bracket: &Bracket,
    ctx: &PredictionContext<'_>,
    params: &SolverParams,
    tol2: f64,
) -> Result<RootOutcome> {
    if !(tol2 > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol2",
            constraint: "tol2 > 0",
            value: tol2,
        });
    }
    let tol_z = ctx.tol_z();
    let mut t_min = bracket.t_min;
    let mut t_max = bracket.t_max;
    let mut out = RootOutcome {
        t: t_min,
        iterations: 0,
        converged: true,
        newton_steps: 0,
        bisection_steps: 0,
        brackets: vec![*bracket],
    };

    let z_min = ctx.gap_at(t_min)?.z;
    if z_min.abs() <= tol_z {
        return Ok(out);
    }
    let z_max = ctx.gap_at(t_max)?.z;
    if z_max.abs() <= tol_z {
        out.t = t_max;
        return Ok(out);
    }
    if !(t_min < t_max && z_min > 0.0 && z_max < 0.0) {
        return Err(Error::InvalidBracket {
            t_min,
            t_max,
            z_min,
            z_max,
        });
    }

    let mut t = 0.5 * (t_min + t_max);
    let mut dt = t_max - t_min;
    let mut dt_old = dt;
    let mut gap = ctx.gap_at(t)?;
    out.converged = false;

    while out.iterations < params.max_iter {
        out.iterations += 1;
        let step = gap.z / gap.dz;
        let candidate = t - step;
        let newton_ok =
            candidate > t_min && candidate < t_max && step.abs() <= 0.5 * dt_old.abs();
        dt_old = dt;
        if newton_ok {
            dt = step;
            t = candidate;
            out.newton_steps += 1;
        } else {
            dt = 0.5 * (t_max - t_min);
            t = t_min + dt;
            out.bisection_steps += 1;
        }
        if dt.abs() < tol2 {
            out.converged = true;
            break;
        }
        gap = ctx.gap_at(t)?;
        if gap.z > 0.0 {
            t_min = t;
        } else {
            t_max = t;
        }
        out.brackets.push(Bracket { t_min, t_max });
    }
    out.t = t;
    Ok(out)
}
