//! LTI plant, state feedback and the augmented inter-event dynamics.
//!
//! Between two updates the control is held at `u(t_k) = −K x(t_k)`. Stacking
//! the state with the hold error `e = x − x(t_k)` gives the autonomous system
//! `ξ̇ = Ψ ξ` with `Ψ = [[A−BK, BK], [A−BK, BK]]`, which is propagated with a
//! matrix exponential and never needs `A⁻¹`.

use crate::error::{Error, Result};
use crate::kernels::{self, ensure_finite, Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    a: Matrix,
    b: Matrix,
    x0: Vector,
}

impl LtiSystem {
    pub fn new(a: Matrix, b: Matrix, x0: Vector) -> Result<Self> {
        let n = kernels::ensure_square(&a)?;
        if b.nrows() != n || b.ncols() == 0 {
            return Err(Error::DimensionMismatch {
                what: "B",
                expected: format!("{n}xm"),
                found: format!("{}x{}", b.nrows(), b.ncols()),
            });
        }
        if x0.len() != n {
            return Err(Error::DimensionMismatch {
                what: "x0",
                expected: n.to_string(),
                found: x0.len().to_string(),
            });
        }
        ensure_finite(&a, "A")?;
        ensure_finite(&b, "B")?;
        if !x0.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { what: "x0" });
        }
        Ok(Self { a, b, x0 })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn x0(&self) -> &Vector {
        &self.x0
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }
}

/// State-feedback gain `K`, validated against a plant so that `A − BK` is
/// Hurwitz.
#[derive(Debug, Clone, PartialEq)]
pub struct Feedback {
    k: Matrix,
}

impl Feedback {
    pub fn new(sys: &LtiSystem, k: Matrix) -> Result<Self> {
        if k.nrows() != sys.input_dim() || k.ncols() != sys.state_dim() {
            return Err(Error::DimensionMismatch {
                what: "K",
                expected: format!("{}x{}", sys.input_dim(), sys.state_dim()),
                found: format!("{}x{}", k.nrows(), k.ncols()),
            });
        }
        ensure_finite(&k, "K")?;
        let closed = sys.a() - sys.b() * &k;
        let abscissa = kernels::spectral_abscissa(&closed)?;
        if abscissa >= 0.0 {
            return Err(Error::NotHurwitz { max_real: abscissa });
        }
        Ok(Self { k })
    }

    pub fn gain(&self) -> &Matrix {
        &self.k
    }

    /// `A − BK`.
    pub fn closed_loop(&self, sys: &LtiSystem) -> Matrix {
        sys.a() - sys.b() * &self.k
    }

    /// Control applied while holding the sampled state `x_k`.
    pub fn control(&self, x_k: &Vector) -> Vector {
        -(&self.k * x_k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedDynamics {
    psi: Matrix,
    n: usize,
}

impl AugmentedDynamics {
    pub fn psi(&self) -> &Matrix {
        &self.psi
    }

    /// Plant state dimension n (Ψ is 2n×2n).
    pub fn state_dim(&self) -> usize {
        self.n
    }

    /// `e^{Ψ·dt}`.
    pub fn transition(&self, dt: f64) -> Result<Matrix> {
        if dt < 0.0 {
            return Err(Error::NegativeDuration { dt });
        }
        kernels::mat_exp(&self.psi, dt)
    }
}

/// Augmented state `ξ = [x; e]` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    pub t: f64,
    pub xi: Vector,
}

impl AugmentedState {
    pub fn state_dim(&self) -> usize {
        self.xi.len() / 2
    }

    /// Plant state block `x`.
    pub fn x(&self) -> Vector {
        self.xi.rows(0, self.state_dim()).into_owned()
    }

    /// Hold-error block `e`.
    pub fn e(&self) -> Vector {
        let n = self.state_dim();
        self.xi.rows(n, n).into_owned()
    }

    pub fn is_event_state(&self) -> bool {
        let n = self.state_dim();
        self.xi.rows(n, n).iter().all(|&v| v == 0.0)
    }
}

pub fn build_closed_loop(sys: &LtiSystem, fb: &Feedback) -> Result<AugmentedDynamics> {
    if fb.gain().nrows() != sys.input_dim() || fb.gain().ncols() != sys.state_dim() {
        return Err(Error::DimensionMismatch {
            what: "K",
            expected: format!("{}x{}", sys.input_dim(), sys.state_dim()),
            found: format!("{}x{}", fb.gain().nrows(), fb.gain().ncols()),
        });
    }
    let n = sys.state_dim();
    let bk = sys.b() * fb.gain();
    let closed = sys.a() - &bk;
    let abscissa = kernels::spectral_abscissa(&closed)?;
    if abscissa >= 0.0 {
        return Err(Error::NotHurwitz { max_real: abscissa });
    }
    let mut psi = Matrix::zeros(2 * n, 2 * n);
    for row in [0, n] {
        psi.view_mut((row, 0), (n, n)).copy_from(&closed);
        psi.view_mut((row, n), (n, n)).copy_from(&bk);
    }
    Ok(AugmentedDynamics { psi, n })
}

/// `ξ = [x; 0]` at time `t`.
pub fn reset_event_state(x: &Vector, t: f64) -> AugmentedState {
    let n = x.len();
    let mut xi = Vector::zeros(2 * n);
    xi.rows_mut(0, n).copy_from(x);
    AugmentedState { t, xi }
}

/// Advances an event-instant state by `dt` under the control held since
/// that event.
pub fn propagate(
    dynamics: &AugmentedDynamics,
    at_event: &AugmentedState,
    dt: f64,
) -> Result<AugmentedState> {
    if dt < 0.0 {
        return Err(Error::NegativeDuration { dt });
    }
    if at_event.xi.len() != 2 * dynamics.state_dim() {
        return Err(Error::DimensionMismatch {
            what: "augmented state",
            expected: (2 * dynamics.state_dim()).to_string(),
            found: at_event.xi.len().to_string(),
        });
    }
    if !at_event.is_event_state() {
        return Err(Error::NonZeroErrorBlock);
    }
    if dt == 0.0 {
        return Ok(at_event.clone());
    }
    let phi = dynamics.transition(dt)?;
    Ok(AugmentedState {
        t: at_event.t + dt,
        xi: phi * &at_event.xi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_plant() -> (LtiSystem, Feedback) {
        let sys = LtiSystem::new(
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 1.0),
            Vector::from_element(1, 1.0),
        )
        .unwrap();
        let fb = Feedback::new(&sys, Matrix::from_element(1, 1, 2.0)).unwrap();
        (sys, fb)
    }

    #[test]
    fn scalar_psi() {
        let (sys, fb) = scalar_plant();
        let dynamics = build_closed_loop(&sys, &fb).unwrap();
        assert_eq!(
            dynamics.psi(),
            &Matrix::from_row_slice(2, 2, &[-1.0, 2.0, -1.0, 2.0])
        );
    }

    #[test]
    fn scalar_state_hits_zero_after_ln2() {
        let (sys, fb) = scalar_plant();
        let dynamics = build_closed_loop(&sys, &fb).unwrap();
        let xi0 = reset_event_state(sys.x0(), 0.0);
        let out = propagate(&dynamics, &xi0, std::f64::consts::LN_2).unwrap();
        assert!(out.xi[0].abs() < 1e-14);
        // e = x(t) − x(t_k)
        assert!((out.xi[1] - (out.xi[0] - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn zero_step_is_identity() {
        let (sys, fb) = scalar_plant();
        let dynamics = build_closed_loop(&sys, &fb).unwrap();
        let xi0 = reset_event_state(&Vector::from_element(1, 3.5), 1.25);
        assert_eq!(propagate(&dynamics, &xi0, 0.0).unwrap(), xi0);
    }

    #[test]
    fn negative_step_rejected() {
        let (sys, fb) = scalar_plant();
        let dynamics = build_closed_loop(&sys, &fb).unwrap();
        let xi0 = reset_event_state(sys.x0(), 0.0);
        assert!(matches!(
            propagate(&dynamics, &xi0, -1e-3),
            Err(Error::NegativeDuration { .. })
        ));
    }

    #[test]
    fn propagate_requires_event_state() {
        let (sys, fb) = scalar_plant();
        let dynamics = build_closed_loop(&sys, &fb).unwrap();
        let state = AugmentedState {
            t: 0.0,
            xi: Vector::from_column_slice(&[1.0, 0.5]),
        };
        assert_eq!(
            propagate(&dynamics, &state, 0.1),
            Err(Error::NonZeroErrorBlock)
        );
    }

    #[test]
    fn reset_zeroes_error_block() {
        let x = Vector::from_column_slice(&[-2.0, 3.0, 5.0]);
        let s = reset_event_state(&x, 0.0);
        assert_eq!(s.xi.as_slice(), &[-2.0, 3.0, 5.0, 0.0, 0.0, 0.0]);
        assert!(s.is_event_state());
        let zero = reset_event_state(&Vector::zeros(2), 4.0);
        assert!(zero.xi.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn destabilizing_gain_refused() {
        let sys = LtiSystem::new(
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 1.0),
            Vector::from_element(1, 1.0),
        )
        .unwrap();
        assert!(matches!(
            Feedback::new(&sys, Matrix::from_element(1, 1, 0.5)),
            Err(Error::NotHurwitz { .. })
        ));
    }

    #[test]
    fn dimension_checks() {
        assert!(LtiSystem::new(Matrix::zeros(2, 2), Matrix::zeros(3, 1), Vector::zeros(2)).is_err());
        assert!(LtiSystem::new(Matrix::zeros(2, 2), Matrix::zeros(2, 1), Vector::zeros(3)).is_err());
        let sys = LtiSystem::new(
            -Matrix::identity(2, 2),
            Matrix::zeros(2, 1),
            Vector::zeros(2),
        )
        .unwrap();
        assert!(matches!(
            Feedback::new(&sys, Matrix::zeros(2, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
