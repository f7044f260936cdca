//! Cramér exponents, exponential functionals and tail constants of Lévy
//! processes.
//!
//! For a Lévy process `xi` with Laplace exponent `phi`
//! (`E exp(lambda xi_t) = exp(-t phi(lambda))`) and a Cramér root
//! `phi(chi) = 0`, the exponential functional `A_inf = int_0^inf exp(xi_s) ds`
//! satisfies `P(A_inf > t) ~ C t^-chi`. This crate solves for `chi`, samples
//! `A_inf`, estimates `chi` and `C` from samples, estimates `C` directly by
//! Monte Carlo, and checks everything against the exact laws available for
//! the Brownian and compound-Poisson families.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod closed_forms;
pub mod error;
pub mod levy_model;
pub mod path_sim;
pub mod renewal_const;
pub mod rng;
pub mod specfun;
pub mod stats;
pub mod tail_stats;
pub mod validate;

pub use closed_forms::{exact_law_of, ExactLaw};
pub use error::{Error, Result};
pub use levy_model::{esscher_tilt, kesten_report, phi, phi_prime, solve_cramer, CramerSolution, KestenReport, LevyModel};
pub use path_sim::{sample_a_finite, sample_a_infinity, sample_block, FiniteBatch, Horizon, PathBlock, SampleBatch, Step};
pub use renewal_const::{estimate_constant, tilted_drift, wald_ladder_check, ConstantEstimate, WaldReport};
pub use tail_stats::{estimate_c_plateau, fit_tail, hill_estimate, ks_two_sample, smoothed_cramer_curve, TailFit};
