//! Seeded random systems for the randomized verification suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use selftrig::certificate::{lambda_max, InitialThreshold, PSource, PlfCertificate};
use selftrig::kernels::{Matrix, Vector};
use selftrig::plant::{Feedback, LtiSystem};

fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, half: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-half..half))
}

pub struct RandomCase {
    pub system: LtiSystem,
    pub feedback: Feedback,
    pub certificate: PlfCertificate,
}

/// One plant of dimension `n` with entries in `[−2, 2]`, a square input
/// matrix, a gain placing `A − BK` at a random Hurwitz matrix, and a
/// synthesized certificate at `α ∈ [0.5, 0.9]·λ_max`.
pub fn random_case(rng: &mut ChaCha8Rng, n: usize) -> RandomCase {
    let a = uniform(rng, n, n, 2.0);
    let b = loop {
        let b = uniform(rng, n, n, 2.0);
        if b.singular_values().min() > 0.3 {
            break b;
        }
    };
    let g = uniform(rng, n, n, 1.0);
    let h = uniform(rng, n, n, 1.5);
    let f = -(&g * g.transpose()) / n as f64 - Matrix::identity(n, n) * 0.5
        + (&h - h.transpose()) * 0.5;
    let k = b.clone().try_inverse().expect("well conditioned") * (&a - &f);
    let x0 = loop {
        let v = Vector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        if v.norm() > 0.5 {
            break v;
        }
    };
    let system = LtiSystem::new(a, b, x0).expect("valid plant");
    let feedback = Feedback::new(&system, k).expect("stabilizing gain");
    let alpha = rng.random_range(0.5..0.9) * lambda_max(&system, &feedback).expect("Hurwitz");
    let certificate = PlfCertificate::new(
        &system,
        &feedback,
        alpha,
        PSource::Synthesize,
        InitialThreshold::Multiplier(1.3),
    )
    .expect("synthesized certificate");
    RandomCase {
        system,
        feedback,
        certificate,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
