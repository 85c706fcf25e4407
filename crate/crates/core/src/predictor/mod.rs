//! Self-triggered event predictor.
//!
//! A prediction runs three stages from the last event `t_k`:
//!
//! 1. [`minimize_plf`] finds `ρ_k`, the first local minimizer of `V(ξ(t))`
//!    after `t_k`, by damped Newton with backtracking.
//! 2. [`find_bracket`] walks from `ρ_k` (forward if `Z(ρ_k) > 0`, backward
//!    otherwise) until the gap `Z = W − V` changes sign.
//! 3. [`newton_bisection`] refines the crossing inside that bracket.
//!
//! [`next_event`] chains the stages and short-circuits when the minimum
//! itself touches the threshold.

mod bracket;
mod minimize;
mod root;

pub use bracket::{find_bracket, Bracket, BracketSearch, Direction};
pub use minimize::{minimize_plf, Minimum};
pub use root::{newton_bisection, RootOutcome};

use crate::certificate::{
    self, GapValues, PlfCertificate, PlfDerivativeMatrices, PlfValues, ThresholdSegment,
};
use crate::error::{Error, Result};
use crate::plant::{self, AugmentedDynamics, AugmentedState};

/// Tuning of the three prediction stages. Defaults are the values the
/// method was published with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub max_iter: usize,
    /// Backtracking contraction, in (0, 1).
    pub beta: f64,
    /// Sufficient-decrease fraction, in (0, 0.5).
    pub kappa1: f64,
    /// Minimizer termination on successive iterates (s).
    pub tol1: f64,
    /// Bracket probe length as a fraction of `ρ_k − t_k`, in (0, 0.5].
    pub kappa2: f64,
    /// Root-finder tolerance while `W_k ≥ 1` (s).
    pub tol2_base: f64,
    /// Forward probing stops at `t_k + horizon_factor·(ρ_k − t_k)`.
    pub horizon_factor: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            max_iter: 50,
            beta: 0.35,
            kappa1: 0.01,
            tol1: 1e-5,
            kappa2: 0.25,
            tol2_base: 1e-5,
            horizon_factor: 100.0,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, constraint, value| {
            Err(Error::InvalidParameter {
                name,
                constraint,
                value,
            })
        };
        if self.max_iter == 0 {
            return bad("max_iter", "max_iter >= 1", 0.0);
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta", "beta ∈ (0,1)", self.beta);
        }
        if !(self.kappa1 > 0.0 && self.kappa1 < 0.5) {
            return bad("kappa1", "kappa1 ∈ (0,0.5)", self.kappa1);
        }
        if !(self.tol1 > 0.0 && self.tol1.is_finite()) {
            return bad("tol1", "tol1 > 0", self.tol1);
        }
        if !(self.kappa2 > 0.0 && self.kappa2 <= 0.5) {
            return bad("kappa2", "kappa2 ∈ (0,0.5]", self.kappa2);
        }
        if !(self.tol2_base > 0.0 && self.tol2_base.is_finite()) {
            return bad("tol2_base", "tol2_base > 0", self.tol2_base);
        }
        if !(self.horizon_factor > 1.0 && self.horizon_factor.is_finite()) {
            return bad("horizon_factor", "horizon_factor > 1", self.horizon_factor);
        }
        Ok(())
    }
}

/// Root-finder tolerance for a segment starting at threshold `W_k`.
///
/// Above 1 the base tolerance is used; below 1 it shrinks by one decade per
/// decade of `W_k` (rounded up), so crossings stay resolved as `W → 0`.
pub fn dynamic_tol2(w_k: f64, params: &SolverParams) -> Result<f64> {
    if !(w_k > 0.0 && w_k.is_finite()) {
        return Err(Error::NonPositiveThreshold { w: w_k });
    }
    if w_k >= 1.0 {
        return Ok(params.tol2_base);
    }
    let phi = w_k.log10().abs().ceil();
    Ok(params.tol2_base * 10f64.powf(-phi))
}

/// Everything a prediction reads for one inter-event interval.
#[derive(Debug, Clone)]
pub struct PredictionContext<'a> {
    pub dynamics: &'a AugmentedDynamics,
    pub cert: &'a PlfCertificate,
    pub derivs: &'a PlfDerivativeMatrices,
    pub segment: ThresholdSegment,
    pub event_state: AugmentedState,
}

impl<'a> PredictionContext<'a> {
    pub fn new(
        dynamics: &'a AugmentedDynamics,
        cert: &'a PlfCertificate,
        derivs: &'a PlfDerivativeMatrices,
        segment: ThresholdSegment,
        event_state: AugmentedState,
    ) -> Result<Self> {
        if event_state.xi.len() != 2 * dynamics.state_dim()
            || cert.state_dim() != dynamics.state_dim()
        {
            return Err(Error::DimensionMismatch {
                what: "prediction context",
                expected: (2 * dynamics.state_dim()).to_string(),
                found: event_state.xi.len().to_string(),
            });
        }
        if !event_state.is_event_state() {
            return Err(Error::NonZeroErrorBlock);
        }
        if segment.t_k() != event_state.t {
            return Err(Error::InvalidParameter {
                name: "segment.t_k",
                constraint: "segment must start at the event instant",
                value: segment.t_k(),
            });
        }
        Ok(Self {
            dynamics,
            cert,
            derivs,
            segment,
            event_state,
        })
    }

    pub fn t_k(&self) -> f64 {
        self.event_state.t
    }

    /// Equality threshold on `Z` used for "Z == 0" tests.
    pub fn tol_z(&self) -> f64 {
        1e-12 * self.segment.w_k().max(1.0)
    }

    pub fn state_at(&self, t: f64) -> Result<AugmentedState> {
        plant::propagate(self.dynamics, &self.event_state, t - self.t_k())
    }

    pub fn plf_at(&self, t: f64) -> Result<PlfValues> {
        let xi = self.state_at(t)?;
        Ok(certificate::evaluate_plf(self.cert, self.derivs, &xi))
    }

    pub fn gap_at(&self, t: f64) -> Result<GapValues> {
        Ok(certificate::gap_from_plf(&self.segment, t, &self.plf_at(t)?))
    }
}

/// Which path produced the prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// The minimum of `V` touches the threshold; `t_{k+1} = ρ_k`.
    MinimumIsEvent,
    /// `Z(ρ_k) > 0`: the crossing lies after the minimum.
    Forward,
    /// `Z(ρ_k) < 0`: the crossing precedes the minimum.
    Backward,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::MinimumIsEvent => "minimum-is-event",
            Branch::Forward => "forward (rho_k <= t_next)",
            Branch::Backward => "backward (rho_k > t_next)",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub t_next: f64,
    pub rho_k: f64,
    pub tol2: f64,
    pub branch: Branch,
    pub minimum: Minimum,
    pub bracket: Option<BracketSearch>,
    pub root: Option<RootOutcome>,
}

impl Prediction {
    /// True when every stage met its tolerance within `max_iter`.
    pub fn converged(&self) -> bool {
        self.minimum.converged && self.root.as_ref().is_none_or(|r| r.converged)
    }
}

pub fn next_event(ctx: &PredictionContext<'_>, params: &SolverParams) -> Result<Prediction> {
    params.validate()?;
    let tol2 = dynamic_tol2(ctx.segment.w_k(), params)?;
    let minimum = minimize_plf(ctx, params)?;
    if !minimum.converged {
        log::warn!(
            "minimizer hit max_iter at t_k = {}; continuing from rho = {}",
            ctx.t_k(),
            minimum.rho
        );
    }
    let rho_k = minimum.rho;
    if rho_k <= ctx.t_k() {
        return Err(Error::DegenerateMinimum { t_k: ctx.t_k() });
    }
    if ctx.gap_at(rho_k)?.z.abs() <= ctx.tol_z() {
        return Ok(Prediction {
            t_next: rho_k,
            rho_k,
            tol2,
            branch: Branch::MinimumIsEvent,
            minimum,
            bracket: None,
            root: None,
        });
    }
    let search = find_bracket(rho_k, ctx, params)?;
    let root = newton_bisection(&search.bracket, ctx, params, tol2)?;
    if !root.converged {
        log::warn!(
            "root finder hit max_iter at t_k = {}; best iterate {}",
            ctx.t_k(),
            root.t
        );
    }
    let branch = match search.direction {
        Direction::Forward => Branch::Forward,
        Direction::Backward => Branch::Backward,
    };
    Ok(Prediction {
        t_next: root.t,
        rho_k,
        tol2,
        branch,
        minimum,
        bracket: Some(search),
        root: Some(root),
    })
}
