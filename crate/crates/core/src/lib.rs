//! DS3: a compute-scaling calculus for LLM inference strategies.
//!
//! Inference is modeled as a directed stochastic walk over a latent skill
//! graph. The crate provides:
//!
//! - [`specfun`]: the special-function kernel (incomplete beta and its
//!   inverse, Gaussian CDF/Q, Lambert W, Bernoulli KL),
//! - [`walk`]: a seeded Monte-Carlo simulator of the idealized skill walk,
//!   the ground-truth oracle for the closed forms,
//! - [`strategies`]: closed-form success probabilities, expected token
//!   usage, and FLOP costs for CoT, ToT(1), best-of-N, and majority voting,
//! - [`skillgraph`]: the hierarchical skill-text tripartite training model,
//! - [`forecast`]: two-step loss-to-accuracy forecasting and constrained
//!   training/inference compute allocation,
//! - [`population`]: Beta-mixture population models of pass@k coverage,
//!   majority-voting saturation, and curve fitting,
//! - [`cli`]: the experiment runner behind the `ds3` binary.
//!
//! Validation deliberately uses `!(x > 0.0)`-style comparisons so NaN fails
//! closed; scientific constants are written at published precision.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]
#![allow(clippy::too_many_arguments)]

pub mod cli;
pub mod forecast;
pub mod population;
pub mod rng;
pub mod skillgraph;
pub mod specfun;
pub mod strategies;
pub mod walk;

mod vote;
