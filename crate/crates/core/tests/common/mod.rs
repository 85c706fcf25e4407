#![allow(dead_code)]

pub mod ode;

use selftrig::certificate::{InitialThreshold, PSource, PlfCertificate};
use selftrig::kernels::{Matrix, Vector};
use selftrig::plant::{Feedback, LtiSystem};

pub fn three_state_system() -> (LtiSystem, Feedback) {
    let sys = LtiSystem::new(
        Matrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, -2.0, 0.0, 4.0, 5.0, 4.0, -7.0]),
        Matrix::from_row_slice(3, 1, &[-1.0, 0.0, 1.0]),
        Vector::from_column_slice(&[-2.0, 3.0, 5.0]),
    )
    .unwrap();
    let fb = Feedback::new(&sys, Matrix::from_row_slice(1, 3, &[8.38, 26.36, 10.38])).unwrap();
    (sys, fb)
}

pub fn three_state_p() -> Matrix {
    Matrix::from_row_slice(
        3,
        3,
        &[
            275.7, 1025.5, 577.9, 1025.5, 3840.1, 2173.5, 577.9, 2173.5, 1234.1,
        ],
    )
}

pub fn three_state_certificate(sys: &LtiSystem, fb: &Feedback) -> PlfCertificate {
    PlfCertificate::new(
        sys,
        fb,
        2.18,
        PSource::Explicit(three_state_p()),
        InitialThreshold::Multiplier(1.3),
    )
    .unwrap()
}

pub fn double_integrator(x0: &[f64]) -> (LtiSystem, Feedback) {
    let sys = LtiSystem::new(
        Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
        Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
        Vector::from_column_slice(x0),
    )
    .unwrap();
    let fb = Feedback::new(&sys, Matrix::from_row_slice(1, 2, &[1.0, 2.0])).unwrap();
    (sys, fb)
}

pub mod random {
    use rand::Rng;
    use selftrig::kernels::{eigenvalues, Matrix, Vector};
    use selftrig::plant::{Feedback, LtiSystem};

    pub fn uniform_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, half: f64) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| rng.random_range(-half..half))
    }

    /// Hurwitz by construction: negative definite symmetric part.
    pub fn hurwitz<R: Rng>(rng: &mut R, n: usize) -> Matrix {
        let g = uniform_matrix(rng, n, n, 1.0);
        let h = uniform_matrix(rng, n, n, 1.5);
        -(&g * g.transpose()) / n as f64 - Matrix::identity(n, n) * 0.5 + (&h - h.transpose()) * 0.5
    }

    fn well_conditioned<R: Rng>(rng: &mut R, n: usize) -> Matrix {
        loop {
            let b = uniform_matrix(rng, n, n, 2.0);
            let sv = b.singular_values();
            if sv.min() > 0.3 {
                return b;
            }
        }
    }

    /// Plant with entries in `[−2, 2]`, square input matrix and a gain that
    /// places `A − BK` at a random Hurwitz matrix.
    pub fn system<R: Rng>(rng: &mut R, n: usize) -> (LtiSystem, Feedback) {
        let a = uniform_matrix(rng, n, n, 2.0);
        let b = well_conditioned(rng, n);
        let f = hurwitz(rng, n);
        let k = b.clone().try_inverse().unwrap() * (&a - &f);
        let x0 = loop {
            let v = Vector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
            if v.norm() > 0.5 {
                break v;
            }
        };
        let sys = LtiSystem::new(a, b, x0).unwrap();
        let fb = Feedback::new(&sys, k).unwrap();
        (sys, fb)
    }

    pub fn max_real(m: &Matrix) -> f64 {
        eigenvalues(m)
            .unwrap()
            .iter()
            .map(|c| c.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub mod scalar {
    use rand::Rng;
    use selftrig::scalar::ScalarSystem;

    fn signed<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
        let v = rng.random_range(lo..hi);
        if rng.random_bool(0.5) {
            v
        } else {
            -v
        }
    }

    /// Random valid scalar system with `bK > max(a, 0)` so the PLF has an
    /// interior minimum.
    pub fn system<R: Rng>(rng: &mut R) -> ScalarSystem {
        let a = signed(rng, 0.1, 3.0);
        let b = signed(rng, 0.2, 3.0);
        let bk = a.max(0.0) + rng.random_range(0.2..4.0);
        let p = rng.random_range(0.1..10.0);
        let q = -2.0 * p * (a - bk) * rng.random_range(0.2..1.0);
        ScalarSystem::new(a, b, 1.0, bk / b, p, q).unwrap()
    }
}
