//! C ABI over the ds3 calculus.
//!
//! Conventions: every function returns a [`Ds3Status`]; results are written
//! through out-pointers; heap-backed objects are opaque handles with
//! `_new`/`_free` pairs. Null argument pointers are reported, never
//! dereferenced. All functions are thread-safe; handles are immutable after
//! construction and may be shared across threads.

use ds3::population::{self, BetaMixture, ErrorSpectrum, MvEvalMethod};
use ds3::specfun::{self, SpecFunError};
use ds3::strategies;
use ds3::walk::{self, BasePolicy, StrategyPlan, TaskSpec};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ds3Status {
    Ok = 0,
    /// An argument was outside its mathematical domain.
    Domain = 1,
    /// The request was structurally infeasible (budget below one step,
    /// plateau above the solvable fraction, ...).
    Infeasible = 2,
    /// An iteration failed to converge.
    Convergence = 3,
    /// A required pointer argument was null.
    NullArgument = 4,
    /// Exact enumeration would exceed the supported size; use the
    /// Monte-Carlo variant.
    SupportTooLarge = 5,
}

impl From<SpecFunError> for Ds3Status {
    fn from(e: SpecFunError) -> Self {
        match e {
            SpecFunError::Domain => Ds3Status::Domain,
            SpecFunError::Convergence => Ds3Status::Convergence,
        }
    }
}

impl From<strategies::StrategyError> for Ds3Status {
    fn from(e: strategies::StrategyError) -> Self {
        match e {
            strategies::StrategyError::Domain => Ds3Status::Domain,
            strategies::StrategyError::Infeasible => Ds3Status::Infeasible,
            strategies::StrategyError::SpecFun(s) => s.into(),
            strategies::StrategyError::SupportTooLarge => Ds3Status::SupportTooLarge,
        }
    }
}

impl From<walk::WalkError> for Ds3Status {
    fn from(e: walk::WalkError) -> Self {
        match e {
            walk::WalkError::Domain => Ds3Status::Domain,
            walk::WalkError::InfeasibleBudget => Ds3Status::Infeasible,
        }
    }
}

impl From<population::PopulationError> for Ds3Status {
    fn from(e: population::PopulationError) -> Self {
        match e {
            population::PopulationError::Domain => Ds3Status::Domain,
            population::PopulationError::Infeasible(_) => Ds3Status::Infeasible,
            population::PopulationError::SupportTooLarge => Ds3Status::SupportTooLarge,
            population::PopulationError::FitFailed(_) => Ds3Status::Convergence,
            population::PopulationError::SpecFun(s) => s.into(),
        }
    }
}

fn write_out<T>(out: *mut T, value: T) -> Ds3Status {
    if out.is_null() {
        return Ds3Status::NullArgument;
    }
    unsafe { *out = value };
    Ds3Status::Ok
}

macro_rules! try_status {
    ($expr:expr, $out:expr) => {
        match $expr {
            Ok(v) => return write_out($out, v),
            Err(e) => return e.into(),
        }
    };
}

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Regularized incomplete beta I_x(a, b).
#[no_mangle]
pub extern "C" fn ds3_reg_inc_beta(x: f64, a: f64, b: f64, out: *mut f64) -> Ds3Status {
    try_status!(specfun::reg_inc_beta(x, a, b), out)
}

/// Inverse of the regularized incomplete beta in its first argument.
#[no_mangle]
pub extern "C" fn ds3_reg_inc_beta_inv(y: f64, a: f64, b: f64, out: *mut f64) -> Ds3Status {
    try_status!(specfun::reg_inc_beta_inv(y, a, b), out)
}

/// Principal branch of the Lambert W function.
#[no_mangle]
pub extern "C" fn ds3_lambert_w0(z: f64, out: *mut f64) -> Ds3Status {
    try_status!(specfun::lambert_w0(z), out)
}

/// Complementary Gaussian CDF Q(z).
#[no_mangle]
pub extern "C" fn ds3_q_function(z: f64, out: *mut f64) -> Ds3Status {
    try_status!(specfun::q_function(z), out)
}

// ---------------------------------------------------------------------------
// Closed-form strategy laws
// ---------------------------------------------------------------------------

/// Chain-of-thought success probability for m skills at per-step success
/// iota_p within a budget of t_max steps.
#[no_mangle]
pub extern "C" fn ds3_cot_success(iota_p: f64, m: u32, t_max: f64, out: *mut f64) -> Ds3Status {
    try_status!(strategies::cot_success(iota_p, m, t_max), out)
}

/// Tree-of-thought(1) success with branching factor b.
#[no_mangle]
pub extern "C" fn ds3_tot1_success(
    iota_p: f64,
    m: u32,
    t_max: f64,
    b: u32,
    out: *mut f64,
) -> Ds3Status {
    try_status!(strategies::tot1_success(iota_p, m, t_max, b), out)
}

/// Best-of-N over k equal-budget chain-of-thought traces.
#[no_mangle]
pub extern "C" fn ds3_bon_success_cot(
    iota_p: f64,
    m: u32,
    t_max: f64,
    k: u32,
    out: *mut f64,
) -> Ds3Status {
    try_status!(strategies::bon_success_cot(iota_p, m, t_max, k), out)
}

/// Exact expected step count under a capped budget.
#[no_mangle]
pub extern "C" fn ds3_cot_expected_steps(
    iota_p: f64,
    m: u32,
    t_max: f64,
    out: *mut f64,
) -> Ds3Status {
    try_status!(strategies::cot_expected_steps_exact(iota_p, m, t_max), out)
}

/// Piecewise linear-Gaussian expected-token approximation.
#[no_mangle]
pub extern "C" fn ds3_cot_expected_tokens_lga(
    iota_p: f64,
    m: u32,
    omega: f64,
    token_budget: f64,
    z_star: f64,
    out: *mut f64,
) -> Ds3Status {
    try_status!(
        strategies::cot_expected_tokens_lga(iota_p, m, omega, token_budget, z_star),
        out
    )
}

/// Maximum reasoning-depth amplification factor g(r).
#[no_mangle]
pub extern "C" fn ds3_amplification_g(r: f64, out: *mut f64) -> Ds3Status {
    try_status!(strategies::amplification_g(r), out)
}

// ---------------------------------------------------------------------------
// Task handle and the walk simulator
// ---------------------------------------------------------------------------

/// Opaque idealized-task handle.
pub struct Ds3Task(TaskSpec);

/// Ensemble statistics of a simulated strategy.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct Ds3Estimate {
    pub success_rate: f64,
    pub success_stderr: f64,
    pub mean_output_tokens: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Create a task: m required skills out of a relevant set of size
/// relevant_set, directionality coefficient delta, per-skill success p,
/// omega tokens per step, and a budget of step_budget steps.
#[no_mangle]
pub extern "C" fn ds3_task_new(
    m: u32,
    relevant_set: u32,
    delta: f64,
    p: f64,
    omega: u32,
    step_budget: f64,
    out: *mut *mut Ds3Task,
) -> Ds3Status {
    if out.is_null() {
        return Ds3Status::NullArgument;
    }
    match TaskSpec::new(m, relevant_set, delta, p, omega, step_budget) {
        Ok(spec) => {
            unsafe { *out = Box::into_raw(Box::new(Ds3Task(spec))) };
            Ds3Status::Ok
        }
        Err(e) => e.into(),
    }
}

/// Free a task handle. Passing null is a no-op.
///
/// # Safety
/// `task` must be a pointer previously returned by [`ds3_task_new`] that has
/// not yet been freed.
#[no_mangle]
pub unsafe extern "C" fn ds3_task_free(task: *mut Ds3Task) {
    if !task.is_null() {
        drop(unsafe { Box::from_raw(task) });
    }
}

/// Effective directionality ι̂ = δ + (1-δ)/M of a task.
#[no_mangle]
pub extern "C" fn ds3_task_iota_hat(task: *const Ds3Task, out: *mut f64) -> Ds3Status {
    let Some(task) = (unsafe { task.as_ref() }) else {
        return Ds3Status::NullArgument;
    };
    write_out(out, task.0.iota_hat())
}

fn simulate_plan(
    task: *const Ds3Task,
    plan: StrategyPlan,
    trials: u64,
    seed: u64,
    out: *mut Ds3Estimate,
) -> Ds3Status {
    let Some(task) = (unsafe { task.as_ref() }) else {
        return Ds3Status::NullArgument;
    };
    match walk::simulate(&task.0, &plan, trials, seed) {
        Ok(est) => write_out(
            out,
            Ds3Estimate {
                success_rate: est.success_rate,
                success_stderr: est.success_stderr,
                mean_output_tokens: est.mean_output_tokens,
                trials: est.trials,
                seed: est.seed,
            },
        ),
        Err(e) => e.into(),
    }
}

/// Monte-Carlo estimate of chain-of-thought success on a task.
/// Deterministic for a fixed (task, trials, seed).
#[no_mangle]
pub extern "C" fn ds3_simulate_cot(
    task: *const Ds3Task,
    trials: u64,
    seed: u64,
    out: *mut Ds3Estimate,
) -> Ds3Status {
    simulate_plan(task, StrategyPlan::Cot, trials, seed, out)
}

/// Monte-Carlo estimate of tree-of-thought(1) success with branching b.
#[no_mangle]
pub extern "C" fn ds3_simulate_tot1(
    task: *const Ds3Task,
    b: u32,
    trials: u64,
    seed: u64,
    out: *mut Ds3Estimate,
) -> Ds3Status {
    simulate_plan(task, StrategyPlan::Tot1 { b }, trials, seed, out)
}

/// Monte-Carlo estimate of best-of-N over k chain-of-thought traces.
#[no_mangle]
pub extern "C" fn ds3_simulate_bon_cot(
    task: *const Ds3Task,
    k: u32,
    trials: u64,
    seed: u64,
    out: *mut Ds3Estimate,
) -> Ds3Status {
    simulate_plan(
        task,
        StrategyPlan::Bon {
            k,
            base: BasePolicy::Cot,
        },
        trials,
        seed,
        out,
    )
}

// ---------------------------------------------------------------------------
// Population mixture handle
// ---------------------------------------------------------------------------

/// Opaque Beta-plus-point-mass success-rate mixture.
pub struct Ds3BetaMixture(BetaMixture);

/// Create a mixture: a solvable fraction of tasks with Beta(alpha, beta)
/// success rates, the rest unsolvable.
#[no_mangle]
pub extern "C" fn ds3_beta_mixture_new(
    solvable_frac: f64,
    alpha: f64,
    beta: f64,
    out: *mut *mut Ds3BetaMixture,
) -> Ds3Status {
    if out.is_null() {
        return Ds3Status::NullArgument;
    }
    match BetaMixture::new(solvable_frac, alpha, beta) {
        Ok(mix) => {
            unsafe { *out = Box::into_raw(Box::new(Ds3BetaMixture(mix))) };
            Ds3Status::Ok
        }
        Err(e) => e.into(),
    }
}

/// Free a mixture handle. Passing null is a no-op.
///
/// # Safety
/// `mix` must be a pointer previously returned by [`ds3_beta_mixture_new`]
/// that has not yet been freed.
#[no_mangle]
pub unsafe extern "C" fn ds3_beta_mixture_free(mix: *mut Ds3BetaMixture) {
    if !mix.is_null() {
        drop(unsafe { Box::from_raw(mix) });
    }
}

/// Pass@k coverage (best-of-N with an oracle verifier) under the mixture.
#[no_mangle]
pub extern "C" fn ds3_bon_coverage(
    mix: *const Ds3BetaMixture,
    k: u64,
    out: *mut f64,
) -> Ds3Status {
    let Some(mix) = (unsafe { mix.as_ref() }) else {
        return Ds3Status::NullArgument;
    };
    write_out(out, population::bon_coverage(&mix.0, k))
}

/// Large-k majority-voting saturation level for a dominant incorrect-answer
/// weight c_star.
#[no_mangle]
pub extern "C" fn ds3_mv_saturation(
    mix: *const Ds3BetaMixture,
    c_star: f64,
    out: *mut f64,
) -> Ds3Status {
    let Some(mix) = (unsafe { mix.as_ref() }) else {
        return Ds3Status::NullArgument;
    };
    try_status!(population::mv_saturation(&mix.0, c_star), out)
}

/// Finite-k majority-voting accuracy with a truncated-geometric error
/// spectrum over `alphabet` answers. Uses exact enumeration while the
/// multinomial support is small, otherwise `mc_samples` seeded Monte-Carlo
/// draws.
#[no_mangle]
pub extern "C" fn ds3_mv_accuracy_geometric(
    mix: *const Ds3BetaMixture,
    alphabet: usize,
    lambda: f64,
    k: u32,
    mc_samples: u32,
    seed: u64,
    out: *mut f64,
) -> Ds3Status {
    let Some(mix) = (unsafe { mix.as_ref() }) else {
        return Ds3Status::NullArgument;
    };
    let spectrum = match ErrorSpectrum::truncated_geometric(alphabet, lambda) {
        Ok(s) => s,
        Err(e) => return e.into(),
    };
    let exact_fits = population::mv_accuracy(&mix.0, &spectrum, k, MvEvalMethod::Exact);
    let result = match exact_fits {
        Err(population::PopulationError::SupportTooLarge) => population::mv_accuracy(
            &mix.0,
            &spectrum,
            k,
            MvEvalMethod::MonteCarlo {
                samples: mc_samples,
                seed,
            },
        ),
        other => other,
    };
    try_status!(result, out)
}
