mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selftrig::certificate::{
    build_derivative_matrices, lambda_max, InitialThreshold, PSource, PlfCertificate,
    PlfDerivativeMatrices, ThresholdSegment,
};
use selftrig::kernels::Vector;
use selftrig::oracle::{dense_event_scan, dense_min_scan};
use selftrig::plant::{build_closed_loop, reset_event_state, AugmentedDynamics};
use selftrig::predictor::{
    find_bracket, minimize_plf, newton_bisection, next_event, PredictionContext, SolverParams,
};

struct Setup {
    dynamics: AugmentedDynamics,
    cert: PlfCertificate,
    derivs: PlfDerivativeMatrices,
    x0: Vector,
}

impl Setup {
    fn random(seed: u64, n: usize, frac: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (sys, fb) = common::random::system(&mut rng, n);
        let alpha = frac * lambda_max(&sys, &fb).unwrap();
        let cert = PlfCertificate::new(&sys, &fb, alpha, PSource::Synthesize, InitialThreshold::Multiplier(1.3)).unwrap();
        Self::finish(sys, fb, cert)
    }

    fn three_state() -> Self {
        let (sys, fb) = common::three_state_system();
        let cert = common::three_state_certificate(&sys, &fb);
        Self::finish(sys, fb, cert)
    }

    fn finish(sys: selftrig::plant::LtiSystem, fb: selftrig::plant::Feedback, cert: PlfCertificate) -> Self {
        Self {
            dynamics: build_closed_loop(&sys, &fb).unwrap(),
            derivs: build_derivative_matrices(&sys, &fb, cert.p()).unwrap(),
            x0: sys.x0().clone(),
            cert,
        }
    }

    fn ctx(&self, w_k: f64) -> PredictionContext<'_> {
        let seg = ThresholdSegment::new(w_k, 0.0, self.cert.alpha()).unwrap();
        PredictionContext::new(&self.dynamics, &self.cert, &self.derivs, seg, reset_event_state(&self.x0, 0.0)).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bracket_is_preserved(seed in any::<u64>(), n in 1usize..=4, frac in 0.3..0.95f64, mult in 1.0..2.0f64) {
        let s = Setup::random(seed, n, frac);
        let ctx = s.ctx(mult * s.cert.plf_of_state(&s.x0));
        let params = SolverParams::default();
        let min = minimize_plf(&ctx, &params).unwrap();
        prop_assume!(ctx.gap_at(min.rho).unwrap().z.abs() > ctx.tol_z());
        let search = find_bracket(min.rho, &ctx, &params).unwrap();
        let root = newton_bisection(&search.bracket, &ctx, &params, 1e-9).unwrap();
        for w in root.brackets.windows(2) {
            prop_assert!(w[1].width() <= w[0].width());
        }
        for b in &root.brackets {
            prop_assert!(ctx.gap_at(b.t_min).unwrap().z > 0.0);
            prop_assert!(ctx.gap_at(b.t_max).unwrap().z <= 0.0);
        }
        prop_assert!(search.bracket.contains(root.t));
    }

    #[test]
    fn next_event_follows_t_k(seed in any::<u64>(), n in 1usize..=4, frac in 0.3..0.95f64) {
        let s = Setup::random(seed, n, frac);
        let ctx = s.ctx(s.cert.plf_of_state(&s.x0));
        let p = next_event(&ctx, &SolverParams::default()).unwrap();
        prop_assert!(p.t_next > 0.0);
        prop_assert!(ctx.gap_at(p.t_next).unwrap().z.abs() <= 1e-6 * s.cert.plf_of_state(&s.x0).max(1.0));
    }
}

#[test]
fn three_state_first_event_matches_dense_scan() {
    let s = Setup::three_state();
    let ctx = s.ctx(s.cert.w0());
    let p = next_event(&ctx, &SolverParams::default()).unwrap();
    let scan = dense_event_scan(&ctx, 1e-6, 1.0).unwrap();
    assert!((scan.t_found - 0.453).abs() <= 1e-3, "scan {}", scan.t_found);
    assert!((p.t_next - scan.t_found).abs() <= 2e-6, "{} vs {}", p.t_next, scan.t_found);
}

#[test]
fn three_state_minimum_matches_dense_scan() {
    let s = Setup::three_state();
    let ctx = s.ctx(s.cert.w0());
    let min = minimize_plf(&ctx, &SolverParams::default()).unwrap();
    let scan = dense_min_scan(&ctx, 1e-6, 2.0).unwrap();
    assert!((min.rho - scan.t_found).abs() <= 1e-4, "{} vs {}", min.rho, scan.t_found);
}

#[test]
fn scan_stability_under_refinement() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..10 {
        let s = Setup::random(seed, 1 + seed as usize % 4, rng.random_range(0.3..0.9));
        let ctx = s.ctx(1.2 * s.cert.plf_of_state(&s.x0));
        let p = next_event(&ctx, &SolverParams::default()).unwrap();
        let horizon = 2.0 * p.t_next + 0.01;
        let mut h = 1e-3;
        let mut prev = dense_event_scan(&ctx, h, horizon).unwrap().t_found;
        for _ in 0..6 {
            h /= 2.0;
            let t = dense_event_scan(&ctx, h, horizon).unwrap().t_found;
            assert!((t - prev).abs() <= 2.0 * h + 1e-12, "h {}: {} vs {}", h, t, prev);
            prev = t;
        }
    }
}

#[test]
fn large_alpha_takes_backward_branch() {
    let mut backward = 0;
    for seed in 0..20 {
        let s = Setup::random(seed, 1 + seed as usize % 4, 0.99);
        let ctx = s.ctx(s.cert.plf_of_state(&s.x0));
        let p = next_event(&ctx, &SolverParams::default()).unwrap();
        if p.branch == selftrig::predictor::Branch::Backward {
            backward += 1;
        }
    }
    assert!(backward > 0);
}
