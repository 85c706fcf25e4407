use super::{PredictionContext, SolverParams};
use crate::error::{Error, Result};

const MAX_PROBES: usize = 10_000;

/// Interval `[t_min, t_max]` with `Z(t_min) > 0 > Z(t_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub t_min: f64,
    pub t_max: f64,
}

impl Bracket {
    pub fn new(t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_min < t_max) {
            return Err(Error::InvalidBracket {
                t_min,
                t_max,
                z_min: f64::NAN,
                z_max: f64::NAN,
            });
        }
        Ok(Self { t_min, t_max })
    }

    pub fn width(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn contains(&self, t: f64) -> bool {
        self.t_min <= t && t <= self.t_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketSearch {
    pub bracket: Bracket,
    pub direction: Direction,
    pub probes: usize,
    /// Probe length when the sign change was found (negative backward).
    pub final_theta: f64,
}

/// Walks from `rho_k` in steps of `θ = ±κ₂(ρ_k − t_k)` until `Z` changes
/// sign. Backward steps are halved until they cover at most half of the
/// remaining distance to `t_k`, and only a clearly positive `Z` closes a
/// backward bracket, since `Z(t_k) = 0` after the threshold correction. The
/// bracket is formed by the last two probes.
pub fn find_bracket(
    rho_k: f64,
    ctx: &PredictionContext<'_>,
    params: &SolverParams,
) -> Result<BracketSearch> {
    let t_k = ctx.t_k();
    let span = rho_k - t_k;
    if !(span > 0.0) {
        return Err(Error::DegenerateMinimum { t_k });
    }
    let tol_z = ctx.tol_z();
    let z_rho = ctx.gap_at(rho_k)?.z;
    if z_rho.abs() <= tol_z {
        return Err(Error::InvalidBracket {
            t_min: rho_k,
            t_max: rho_k,
            z_min: z_rho,
            z_max: z_rho,
        });
    }
    let direction = if z_rho > 0.0 {
        Direction::Forward
    } else {
        Direction::Backward
    };
    let mut theta = match direction {
        Direction::Forward => params.kappa2 * span,
        Direction::Backward => -params.kappa2 * span,
    };
    let horizon = t_k + params.horizon_factor * span;

    let mut prev = rho_k;
    let mut probes = 0;
    loop {
        let t2 = match direction {
            Direction::Forward => {
                let t2 = prev + theta;
                if t2 > horizon {
                    return Err(Error::NoCrossing { horizon });
                }
                t2
            }
            Direction::Backward => {
                while prev + theta < t_k + 0.5 * (prev - t_k) {
                    theta /= 2.0;
                }
                let t2 = prev + theta;
                if !(t2 > t_k && t2 < prev) {
                    // Z stays non-positive right after the event.
                    return Err(Error::NoCrossing { horizon: t_k });
                }
                t2
            }
        };
        probes += 1;
        let z2 = ctx.gap_at(t2)?.z;
        let crossed = match direction {
            Direction::Forward => z2 < 0.0 || z2.abs() <= tol_z,
            Direction::Backward => z2 > tol_z,
        };
        if crossed {
            let bracket = match direction {
                Direction::Forward => Bracket {
                    t_min: prev,
                    t_max: t2,
                },
                Direction::Backward => Bracket {
                    t_min: t2,
                    t_max: prev,
                },
            };
            return Ok(BracketSearch {
                bracket,
                direction,
                probes,
                final_theta: theta,
            });
        }
        if probes >= MAX_PROBES {
            return Err(Error::NoCrossing { horizon: t2 });
        }
        prev = t2;
    }
}
