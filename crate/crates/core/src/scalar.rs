//! Closed forms for one-dimensional plants `ẋ = a x + b u`.
//!
//! With the control held at `−K x_k` the state is
//! `x(t) = (bK/a + (1 − bK/a) e^{a(t−t_k)}) x_k`, and `V = p x²` is minimal
//! exactly where `x` crosses zero, at `ρ_k = t_k + log(bK/(bK − a))/a`.
//! That offset does not depend on `x_k`.

use crate::error::{Error, Result};
use crate::kernels::{Matrix, Vector};
use crate::plant::{Feedback, LtiSystem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSystem {
    a: f64,
    b: f64,
    /// Output gain; carried along, never used by the control.
    c: f64,
    k: f64,
    p: f64,
    q: f64,
}

impl ScalarSystem {
    pub fn new(a: f64, b: f64, c: f64, k: f64, p: f64, q: f64) -> Result<Self> {
        if ![a, b, c, k, p, q].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                what: "scalar system",
            });
        }
        if a == 0.0 {
            return Err(Error::InvalidScalarSystem("a must be nonzero"));
        }
        if b == 0.0 {
            return Err(Error::InvalidScalarSystem("b must be nonzero"));
        }
        if c == 0.0 {
            return Err(Error::InvalidScalarSystem("c must be nonzero"));
        }
        if !(a - b * k < 0.0) {
            return Err(Error::InvalidScalarSystem("a - bK must be negative"));
        }
        if !(p > 0.0 && q > 0.0) {
            return Err(Error::InvalidScalarSystem("p and q must be positive"));
        }
        if 2.0 * p * (a - b * k) > -q {
            return Err(Error::InvalidScalarSystem("2p(a - bK) <= -q violated"));
        }
        Ok(Self { a, b, c, k, p, q })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }

    /// The same plant in matrix form, starting from `x0`.
    pub fn to_lti(&self, x0: f64) -> Result<(LtiSystem, Feedback)> {
        let sys = LtiSystem::new(
            Matrix::from_element(1, 1, self.a),
            Matrix::from_element(1, 1, self.b),
            Vector::from_element(1, x0),
        )?;
        let fb = Feedback::new(&sys, Matrix::from_element(1, 1, self.k))?;
        Ok((sys, fb))
    }
}

pub fn scalar_state(sys: &ScalarSystem, x_k: f64, t_k: f64, t: f64) -> Result<f64> {
    if t < t_k {
        return Err(Error::NegativeDuration { dt: t - t_k });
    }
    let r = sys.b * sys.k / sys.a;
    Ok((r + (1.0 - r) * (sys.a * (t - t_k)).exp()) * x_k)
}

/// Time of the PLF minimum after an event at `t_k`.
pub fn rho_k_analytic(sys: &ScalarSystem, t_k: f64) -> Result<f64> {
    let check = validate_gain(sys);
    if !check.valid {
        return Err(Error::InvalidScalarSystem(
            "bK/(bK - a) must be positive",
        ));
    }
    Ok(t_k + check.ratio.ln() / sys.a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainCase {
    /// Open-loop unstable plant.
    UnstablePlant,
    /// Open-loop stable plant pushed further left.
    StablePlant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainCheck {
    pub valid: bool,
    pub case: GainCase,
    /// `bK / (bK − a)`.
    pub ratio: f64,
    /// For an unstable plant, whether `ratio > 1`.
    pub ratio_exceeds_one: Option<bool>,
}

pub fn validate_gain(sys: &ScalarSystem) -> GainCheck {
    let bk = sys.b * sys.k;
    let ratio = bk / (bk - sys.a);
    let case = if sys.a > 0.0 {
        GainCase::UnstablePlant
    } else {
        GainCase::StablePlant
    };
    GainCheck {
        valid: ratio > 0.0 && ratio.is_finite(),
        case,
        ratio,
        ratio_exceeds_one: (case == GainCase::UnstablePlant).then_some(ratio > 1.0),
    }
}
