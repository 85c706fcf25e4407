//! Self-triggered control for continuous-time LTI systems.
//!
//! The controller holds `u = −K x(t_k)` between updates and refreshes it when
//! a quadratic pseudo-Lyapunov function `V` meets an exponentially decaying
//! threshold `W`. Instead of monitoring the plant, the next update instant is
//! predicted from the model: a damped Newton search locates the first minimum
//! of `V`, a stepping search brackets the crossing, and a safeguarded
//! Newton–bisection iteration refines it.
//!
//! Modules, bottom-up:
//!
//! - [`kernels`]: matrix exponential, eigenvalues, Lyapunov solver.
//! - [`plant`]: plant, feedback and the augmented inter-event dynamics.
//! - [`certificate`]: decay-rate bound, `P`, threshold and derivative forms.
//! - [`predictor`]: the three-stage event predictor.
//! - [`scalar`]: closed forms for one-dimensional plants.
//! - [`oracle`]: brute-force grid scans used for verification.
//! - [`simulator`]: sampled closed-loop simulation and summaries.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod error;
pub mod kernels;
pub mod oracle;
pub mod plant;
pub mod predictor;
pub mod scalar;
pub mod simulator;

pub use error::{Error, Result};
