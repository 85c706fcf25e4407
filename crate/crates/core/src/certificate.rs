//! Pseudo-Lyapunov certificate: decay-rate bound, the matrix `P`, the
//! threshold `W(t)` and the quadratic forms giving `V`, `∇ₜV` and `∇ₜ²V`.

use crate::error::{Error, Result};
use crate::kernels::{self, Matrix, Vector};
use crate::plant::{self, AugmentedDynamics, AugmentedState, Feedback, LtiSystem};

/// Slack allowed on the certificate inequality for a synthesized `P`,
/// relative to `‖P‖₂`.
pub const SYNTHESIZED_SLACK: f64 = 1e-8;
/// Slack for a user-supplied `P`, relative to `‖P‖₂`. Published matrices are
/// usually rounded.
pub const SUPPLIED_SLACK: f64 = 1e-1;

/// Where the certificate's `P` comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum PSource {
    /// Solve the shifted Lyapunov equation with `λ = α`.
    Synthesize,
    /// Use the given matrix, validated against the slack `SUPPLIED_SLACK`.
    Explicit(Matrix),
}

/// Initial threshold `W₀`, either absolute or as a multiple of `V(ξ₀)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialThreshold {
    Multiplier(f64),
    Absolute(f64),
}

impl Default for InitialThreshold {
    fn default() -> Self {
        InitialThreshold::Multiplier(1.3)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlfCertificate {
    p: Matrix,
    lambda_max: f64,
    alpha: f64,
    w0: f64,
    cal_p: Matrix,
    slack: f64,
}

impl PlfCertificate {
    pub fn new(
        sys: &LtiSystem,
        fb: &Feedback,
        alpha: f64,
        source: PSource,
        w0: InitialThreshold,
    ) -> Result<Self> {
        let lambda_max = lambda_max(sys, fb)?;
        if !(alpha > 0.0 && alpha < lambda_max) {
            return Err(Error::DecayRateOutOfRange {
                lambda: alpha,
                lambda_max,
            });
        }
        let (p, rel_slack) = match source {
            PSource::Synthesize => (synthesize_p(sys, fb, alpha)?, SYNTHESIZED_SLACK),
            PSource::Explicit(p) => {
                let n = sys.state_dim();
                if p.shape() != (n, n) {
                    return Err(Error::DimensionMismatch {
                        what: "P",
                        expected: format!("{n}x{n}"),
                        found: format!("{}x{}", p.nrows(), p.ncols()),
                    });
                }
                kernels::ensure_finite(&p, "P")?;
                if !kernels::is_positive_definite(&p, 0.0)? {
                    return Err(Error::NotPositiveDefinite {
                        min_eig: kernels::min_symmetric_eigenvalue(&p)?,
                    });
                }
                ((&p + p.transpose()) * 0.5, SUPPLIED_SLACK)
            }
        };
        let slack = rel_slack * spectral_norm_sym(&p)?;
        let max_eig = certificate_residual(&fb.closed_loop(sys), &p, alpha)?;
        if max_eig > slack {
            return Err(Error::CertificateInequality { max_eig, slack });
        }

        let v0 = sys.x0().dot(&(&p * sys.x0()));
        let w0 = match w0 {
            InitialThreshold::Multiplier(c) => {
                if !(c >= 1.0 && c.is_finite()) {
                    return Err(Error::InvalidParameter {
                        name: "w0_multiplier",
                        constraint: "w0_multiplier >= 1",
                        value: c,
                    });
                }
                c * v0
            }
            InitialThreshold::Absolute(w) => {
                if !w.is_finite() {
                    return Err(Error::NonFinite { what: "W0" });
                }
                w
            }
        };
        if w0 < v0 {
            return Err(Error::ThresholdBelowPlf { w0, v0 });
        }

        let n = sys.state_dim();
        let mut cal_p = Matrix::zeros(2 * n, 2 * n);
        cal_p.view_mut((0, 0), (n, n)).copy_from(&p);
        Ok(Self {
            p,
            lambda_max,
            alpha,
            w0,
            cal_p,
            slack,
        })
    }

    pub fn p(&self) -> &Matrix {
        &self.p
    }

    /// `block-diag(P, 0)`.
    pub fn cal_p(&self) -> &Matrix {
        &self.cal_p
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    /// Absolute slack the certificate inequality was validated against.
    pub fn slack(&self) -> f64 {
        self.slack
    }

    pub fn state_dim(&self) -> usize {
        self.p.nrows()
    }

    /// `V(x) = xᵀ P x` for a plant state.
    pub fn plf_of_state(&self, x: &Vector) -> f64 {
        x.dot(&(&self.p * x))
    }
}

fn spectral_norm_sym(p: &Matrix) -> Result<f64> {
    let lo = kernels::min_symmetric_eigenvalue(p)?;
    let hi = kernels::max_symmetric_eigenvalue(p)?;
    Ok(lo.abs().max(hi.abs()))
}

/// Largest eigenvalue of `Fᵀ P + P F + λ P`; the certificate inequality
/// holds iff this is ≤ 0.
pub fn certificate_residual(closed: &Matrix, p: &Matrix, lambda: f64) -> Result<f64> {
    let r = closed.transpose() * p + p * closed + p * lambda;
    kernels::max_symmetric_eigenvalue(&r)
}

/// Supremal decay rate admitted by the certificate inequality:
/// `−2 · max Re eig(A − BK)`.
pub fn lambda_max(sys: &LtiSystem, fb: &Feedback) -> Result<f64> {
    let abscissa = kernels::spectral_abscissa(&fb.closed_loop(sys))?;
    if abscissa >= 0.0 {
        return Err(Error::NotHurwitz { max_real: abscissa });
    }
    Ok(-2.0 * abscissa)
}

/// Returns `P > 0` with `(A−BK)ᵀP + P(A−BK) ⪯ −λP`, from the shifted
/// Lyapunov equation `(F + λ/2·I)ᵀP + P(F + λ/2·I) = −I`.
pub fn synthesize_p(sys: &LtiSystem, fb: &Feedback, lambda: f64) -> Result<Matrix> {
    let closed = fb.closed_loop(sys);
    let lmax = lambda_max(sys, fb)?;
    if !(lambda > 0.0 && lambda < lmax) {
        return Err(Error::DecayRateOutOfRange {
            lambda,
            lambda_max: lmax,
        });
    }
    let n = sys.state_dim();
    let shifted = &closed + Matrix::identity(n, n) * (0.5 * lambda);
    let p = kernels::solve_lyapunov(&shifted, &Matrix::identity(n, n))?;
    let max_eig = certificate_residual(&closed, &p, lambda)?;
    let slack = SYNTHESIZED_SLACK * spectral_norm_sym(&p)?;
    if max_eig > slack {
        return Err(Error::CertificateInequality { max_eig, slack });
    }
    Ok(p)
}

/// Blocks of the quadratic forms for `∇ₜV` and `∇ₜ²V`. Computed once per
/// certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct PlfDerivativeMatrices {
    pub m: Matrix,
    pub l: Matrix,
    pub lambda: Matrix,
    pub gamma_cross: Matrix,
    pub gamma: Matrix,
    // Assembled 2n×2n forms.
    first: Matrix,
    second: Matrix,
}

impl PlfDerivativeMatrices {
    /// `[[M, L], [Lᵀ, 0]]`.
    pub fn first_order_form(&self) -> &Matrix {
        &self.first
    }

    /// `[[Λ, Γ], [Γᵀ, γ]]`.
    pub fn second_order_form(&self) -> &Matrix {
        &self.second
    }
}

pub fn build_derivative_matrices(
    sys: &LtiSystem,
    fb: &Feedback,
    p: &Matrix,
) -> Result<PlfDerivativeMatrices> {
    let n = sys.state_dim();
    if p.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            what: "P",
            expected: format!("{n}x{n}"),
            found: format!("{}x{}", p.nrows(), p.ncols()),
        });
    }
    let f = fb.closed_loop(sys);
    let ft = f.transpose();
    let bk = sys.b() * fb.gain();

    let m = &ft * p + p * &f;
    let l = p * &bk;
    let lambda = &ft * &m + &m * &f + &ft * l.transpose() + &l * &f;
    let gamma_cross = &ft * &l + &m * &bk + &l * &bk;
    let gamma = l.transpose() * &bk + bk.transpose() * &l;

    let mut first = Matrix::zeros(2 * n, 2 * n);
    first.view_mut((0, 0), (n, n)).copy_from(&m);
    first.view_mut((0, n), (n, n)).copy_from(&l);
    first.view_mut((n, 0), (n, n)).copy_from(&l.transpose());

    let mut second = Matrix::zeros(2 * n, 2 * n);
    second.view_mut((0, 0), (n, n)).copy_from(&lambda);
    second.view_mut((0, n), (n, n)).copy_from(&gamma_cross);
    second.view_mut((n, 0), (n, n)).copy_from(&gamma_cross.transpose());
    second.view_mut((n, n), (n, n)).copy_from(&gamma);

    Ok(PlfDerivativeMatrices {
        m,
        l,
        lambda,
        gamma_cross,
        gamma,
        first,
        second,
    })
}

/// `V`, `∇ₜV` and `∇ₜ²V` at one augmented state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlfValues {
    pub v: f64,
    pub dv: f64,
    pub d2v: f64,
}

pub fn evaluate_plf(
    cert: &PlfCertificate,
    derivs: &PlfDerivativeMatrices,
    xi: &AugmentedState,
) -> PlfValues {
    let x = &xi.xi;
    PlfValues {
        v: x.dot(&(cert.cal_p() * x)),
        dv: x.dot(&(derivs.first_order_form() * x)),
        d2v: x.dot(&(derivs.second_order_form() * x)),
    }
}

/// Threshold `W(t) = W_k e^{−α(t−t_k)}` on one inter-event interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSegment {
    w_k: f64,
    t_k: f64,
    alpha: f64,
}

impl ThresholdSegment {
    pub fn new(w_k: f64, t_k: f64, alpha: f64) -> Result<Self> {
        if !(w_k > 0.0 && w_k.is_finite()) {
            return Err(Error::NonPositiveThreshold { w: w_k });
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                constraint: "alpha > 0",
                value: alpha,
            });
        }
        Ok(Self { w_k, t_k, alpha })
    }

    pub fn w_k(&self) -> f64 {
        self.w_k
    }

    pub fn t_k(&self) -> f64 {
        self.t_k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn value(&self, t: f64) -> f64 {
        self.w_k * (-self.alpha * (t - self.t_k)).exp()
    }

    pub fn rate(&self, t: f64) -> f64 {
        -self.alpha * self.value(t)
    }
}

/// Gap `Z = W − V` and its time derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapValues {
    pub z: f64,
    pub dz: f64,
}

pub fn gap_from_plf(seg: &ThresholdSegment, t: f64, plf: &PlfValues) -> GapValues {
    GapValues {
        z: seg.value(t) - plf.v,
        dz: seg.rate(t) - plf.dv,
    }
}

pub fn evaluate_gap(
    seg: &ThresholdSegment,
    cert: &PlfCertificate,
    derivs: &PlfDerivativeMatrices,
    dynamics: &AugmentedDynamics,
    event_state: &AugmentedState,
    t: f64,
) -> Result<GapValues> {
    if t < seg.t_k() {
        return Err(Error::NegativeDuration { dt: t - seg.t_k() });
    }
    let xi = plant::propagate(dynamics, event_state, t - event_state.t)?;
    Ok(gap_from_plf(seg, t, &evaluate_plf(cert, derivs, &xi)))
}
