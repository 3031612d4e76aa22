//! Closed-form success probabilities, expected token usage, and FLOP costs
//! for the idealized inference strategies (CoT, ToT(1), best-of-N, majority
//! voting), plus the sequential-vs-branching crossover analysis and the
//! reasoning-depth amplification law.
//!
//! Success probabilities come from the negative-binomial step count: a task
//! needing m skills under per-step success x completes within T steps with
//! probability I_x(m, T - m + 1).

use crate::population::ErrorSpectrum;
use crate::specfun::{self, SpecFunError};
use crate::vote;
use crate::walk::{BasePolicy, StrategyPlan, TaskSpec};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("parameter outside its domain")]
    Domain,
    #[error("budget cannot fit the required skills")]
    Infeasible,
    #[error("special function failure: {0}")]
    SpecFun(#[from] SpecFunError),
    #[error("exact vote enumeration too large; use Monte Carlo")]
    SupportTooLarge,
}

pub type Result<T> = std::result::Result<T, StrategyError>;

/// Transformer cost parameters for the FLOP formulas.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ArchSpec {
    /// Non-embedding parameter count N.
    pub n_params: f64,
    pub n_layers: u32,
    pub d_attn: u32,
    pub prompt_tokens: u64,
}

impl ArchSpec {
    pub fn new(n_params: f64, n_layers: u32, d_attn: u32, prompt_tokens: u64) -> Result<Self> {
        if !(n_params > 0.0) || n_layers == 0 || d_attn == 0 {
            return Err(StrategyError::Domain);
        }
        Ok(ArchSpec {
            n_params,
            n_layers,
            d_attn,
            prompt_tokens,
        })
    }

    /// The Appendix-style reference architecture used in the CoT/ToT
    /// numerical comparisons.
    pub fn reference_10b() -> Self {
        ArchSpec {
            n_params: 1e10,
            n_layers: 96,
            d_attn: 12288,
            prompt_tokens: 200,
        }
    }
}

/// One strategy evaluation: success probability, expected emitted tokens,
/// and the three FLOP cost components.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StrategyOutcome {
    pub success_prob: f64,
    pub expected_tokens: f64,
    pub cost_param: f64,
    pub cost_attn: f64,
    pub cost_eval: f64,
}

/// Expected-token surrogate selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TokenModel {
    /// min{ω m / x, Ω}: linear growth then saturation.
    PiecewiseLinear,
    /// Piecewise linear-Gaussian interpolation with central half-width z*.
    LinearGaussian { z_star: f64 },
}

fn check_prob(x: f64) -> Result<f64> {
    if x.is_nan() || !(0.0..=1.0).contains(&x) {
        Err(StrategyError::Domain)
    } else {
        Ok(x)
    }
}

/// CoT success probability: I_x(m, T - m + 1); zero when the budget cannot
/// fit the m skills.
pub fn cot_success(iota_p: f64, m: u32, t_max: f64) -> Result<f64> {
    let x = check_prob(iota_p)?;
    if m == 0 || t_max.is_nan() {
        return Err(StrategyError::Domain);
    }
    let mf = m as f64;
    if t_max < mf {
        return Ok(0.0);
    }
    if t_max == mf {
        return Ok(x.powi(m as i32));
    }
    Ok(specfun::reg_inc_beta(x, mf, t_max - mf + 1.0)?)
}

/// Log-odds ln(ψ/(1-ψ)) of CoT success, finite and monotone even where ψ
/// itself saturates in f64. Used by allocation optimizers so saturated grid
/// cells remain comparable.
pub fn cot_success_log_odds(iota_p: f64, m: u32, t_max: f64) -> Result<f64> {
    let x = check_prob(iota_p)?;
    let mf = m as f64;
    if t_max < mf {
        return Ok(f64::NEG_INFINITY);
    }
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if x == 1.0 {
        return Ok(f64::INFINITY);
    }
    let n = t_max - mf + 1.0;
    let psi = specfun::reg_inc_beta(x, mf, n)?;
    if psi > 1e-290 && psi < 1.0 - 1e-14 {
        return Ok(psi.ln() - (-psi).ln_1p());
    }
    if psi <= 1e-290 {
        // Leading series term: ln I ≈ m ln x + ln C(m+n-1, m).
        let ln_a = mf * x.ln() + specfun::log_gamma(mf + n)?
            - specfun::log_gamma(mf + 1.0)?
            - specfun::log_gamma(n)?;
        return Ok(ln_a);
    }
    // Saturated: failure F = I_{1-x}(n, m) ≈ (1-x)^n x^{m-1} / (n B(n, m)).
    let ln_f = n * (-x).ln_1p() + (mf - 1.0) * x.ln() - n.ln() - specfun::log_beta(n, mf)?;
    Ok(-ln_f)
}

/// Exact capped expectation of the CoT step count.
///
/// Sums t · P(T = t) by the negative-binomial PMF recurrence, censoring at
/// the floored budget; safe up to budgets of 1e6 steps and beyond because
/// the tail is cut once its mass is below machine epsilon.
pub fn cot_expected_steps_exact(iota_p: f64, m: u32, t_max: f64) -> Result<f64> {
    let x = check_prob(iota_p)?;
    if m == 0 || t_max.is_nan() || t_max < 0.0 {
        return Err(StrategyError::Domain);
    }
    let cap = t_max.floor();
    let mf = m as f64;
    if cap < mf {
        return Ok(cap);
    }
    if x == 0.0 {
        return Ok(cap);
    }
    if x == 1.0 {
        return Ok(mf);
    }
    let mut pmf = x.powi(m as i32); // P(T = m)
    let mut sum = 0.0;
    let mut cdf = 0.0;
    let mut t = mf;
    while t <= cap {
        sum += t * pmf;
        cdf += pmf;
        if 1.0 - cdf < 1e-16 {
            return Ok(sum + cap * (1.0 - cdf).max(0.0));
        }
        pmf *= (t / (t - mf + 1.0)) * (1.0 - x);
        t += 1.0;
    }
    Ok(sum + cap * (1.0 - cdf).max(0.0))
}

/// Piecewise linear-Gaussian approximation of expected CoT tokens.
///
/// Below z = -z* the budget is fully consumed; above z* the uncapped mean
/// ω m / x applies; in between a Gaussian interpolation of the censored
/// negative-binomial mean is used.
pub fn cot_expected_tokens_lga(
    iota_p: f64,
    m: u32,
    omega: f64,
    token_budget: f64,
    z_star: f64,
) -> Result<f64> {
    let x = check_prob(iota_p)?;
    if m == 0 || !(omega > 0.0) || !(token_budget > 0.0) || !(z_star > 0.0) {
        return Err(StrategyError::Domain);
    }
    let mf = m as f64;
    if x == 0.0 {
        return Ok(token_budget);
    }
    let mu = omega * mf / x;
    let sigma = omega * (mf * (1.0 - x)).sqrt() / x;
    if sigma == 0.0 {
        return Ok(mu.min(token_budget));
    }
    let z = (token_budget - mu) / sigma;
    if z < -z_star {
        Ok(token_budget)
    } else if z > z_star {
        Ok(mu)
    } else {
        let (phi_cdf, phi_pdf) = specfun::std_normal_cdf_pdf(z)?;
        Ok(mu * phi_cdf + token_budget * (1.0 - phi_cdf) - sigma * phi_pdf)
    }
}

/// Piecewise-linear expected-token surrogate min{ω m / x, Ω}.
pub fn cot_expected_tokens_piecewise(iota_p: f64, m: u32, omega: f64, token_budget: f64) -> f64 {
    if iota_p <= 0.0 {
        return token_budget;
    }
    (omega * m as f64 / iota_p).min(token_budget)
}

/// ToT(1) success: b branches explore in parallel, so the per-step success
/// becomes 1 - (1-x)^b at the price of b nodes per effective step.
pub fn tot1_success(iota_p: f64, m: u32, t_max: f64, b: u32) -> Result<f64> {
    let x = check_prob(iota_p)?;
    if b == 0 {
        return Err(StrategyError::Domain);
    }
    let eff_budget = (t_max / b as f64).floor();
    let boosted = 1.0 - (1.0 - x).powi(b as i32);
    cot_success(boosted, m, eff_budget)
}

/// The Thm-style equal-attention-compute form of ToT(1): a token budget that
/// would let CoT take `t_steps` steps lets ToT(1) take t_steps/√b effective
/// steps (the √b more tokens it affords cover b-way branching).
pub fn tot1_success_equal_compute(iota_p: f64, m: u32, t_steps: f64, b: u32) -> Result<f64> {
    let x = check_prob(iota_p)?;
    if b == 0 {
        return Err(StrategyError::Domain);
    }
    let boosted = 1.0 - (1.0 - x).powi(b as i32);
    cot_success(boosted, m, t_steps / (b as f64).sqrt())
}

/// Small-x asymptotic normalization of the branching gain ψ^(b)/ψ^(1) at
/// equal attention compute, evaluating both success laws with the
/// large-budget beta argument n = T/√b used in the asymptotic derivation.
/// Converges to b^{m/2} as the per-step probability vanishes.
pub fn branching_gain_smallx(iota_p: f64, m: u32, b: u32, t_steps: f64) -> Result<f64> {
    let x = check_prob(iota_p)?;
    if b == 0 || m == 0 || !(t_steps > 0.0) {
        return Err(StrategyError::Domain);
    }
    let mf = m as f64;
    let boosted = 1.0 - (1.0 - x).powi(b as i32);
    let n_b = t_steps / (b as f64).sqrt();
    let n_1 = t_steps;
    if n_b <= 0.0 || n_1 <= 0.0 {
        return Err(StrategyError::Infeasible);
    }
    let psi_b = specfun::reg_inc_beta(boosted, mf, n_b)?;
    let psi_1 = specfun::reg_inc_beta(x, mf, n_1)?;
    if psi_1 == 0.0 {
        return Err(StrategyError::Infeasible);
    }
    Ok(psi_b / psi_1)
}

/// Best-of-N over arbitrary per-trace success probabilities:
/// 1 - Π (1 - ψ_j).
pub fn bon_success(per_trace: &[f64]) -> Result<f64> {
    if per_trace.is_empty() {
        return Err(StrategyError::Domain);
    }
    let mut fail = 1.0;
    for &psi in per_trace {
        fail *= 1.0 - check_prob(psi)?;
    }
    Ok(1.0 - fail)
}

/// Best-of-N with k equal-budget CoT traces.
pub fn bon_success_cot(iota_p: f64, m: u32, t_max: f64, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(StrategyError::Domain);
    }
    let per = cot_success(iota_p, m, (t_max / k as f64).floor())?;
    Ok(1.0 - (1.0 - per).powi(k as i32))
}

/// Best-of-N with k equal-budget ToT(1) traces.
pub fn bon_success_tot1(iota_p: f64, m: u32, t_max: f64, k: u32, b: u32) -> Result<f64> {
    if k == 0 {
        return Err(StrategyError::Domain);
    }
    let per = tot1_success(iota_p, m, (t_max / k as f64).floor(), b)?;
    Ok(1.0 - (1.0 - per).powi(k as i32))
}

/// How majority voting is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MvMethod {
    /// Exact multinomial enumeration; rejected when the composition count
    /// exceeds [`MV_EXACT_SUPPORT_LIMIT`].
    Exact,
    /// Seeded Monte Carlo over vote outcomes.
    MonteCarlo { samples: u32, seed: u64 },
}

/// Largest multinomial support enumerated exactly.
pub const MV_EXACT_SUPPORT_LIMIT: f64 = 1e6;

/// Majority-vote success at a fixed per-trace success probability, under
/// plurality with uniform random tie-breaking.
pub fn mv_success(
    correct_prob: f64,
    spectrum: &ErrorSpectrum,
    k: u32,
    method: MvMethod,
) -> Result<f64> {
    let psi = check_prob(correct_prob)?;
    if k == 0 {
        return Err(StrategyError::Domain);
    }
    match method {
        MvMethod::Exact => {
            if vote::support_size(k as u64, spectrum.weights().len()) > MV_EXACT_SUPPORT_LIMIT {
                return Err(StrategyError::SupportTooLarge);
            }
            Ok(vote::plurality_success_fixed(psi, spectrum.weights(), k)?)
        }
        MvMethod::MonteCarlo { samples, seed } => {
            Ok(crate::population::mv_monte_carlo_fixed(
                psi, spectrum, k, samples, seed,
            ))
        }
    }
}

/// Majority-vote success with automatic method choice: exact enumeration
/// while the support is small, 10^4-sample Monte Carlo beyond.
pub fn mv_success_auto(correct_prob: f64, spectrum: &ErrorSpectrum, k: u32, seed: u64) -> Result<f64> {
    if vote::support_size(k as u64, spectrum.weights().len()) <= MV_EXACT_SUPPORT_LIMIT {
        mv_success(correct_prob, spectrum, k, MvMethod::Exact)
    } else {
        mv_success(
            correct_prob,
            spectrum,
            k,
            MvMethod::MonteCarlo {
                samples: 10_000,
                seed,
            },
        )
    }
}

/// Cost shape of a strategy (what the attention and eval formulas need).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostPlan {
    Cot,
    Tot1 { b: u32, omega: f64 },
    BonCot { k: u32 },
    BonTot1 { k: u32, b: u32 },
    Mv { k: u32 },
}

impl CostPlan {
    pub fn from_plan(plan: &StrategyPlan, omega: f64) -> Self {
        match plan {
            StrategyPlan::Cot => CostPlan::Cot,
            StrategyPlan::Tot1 { b } => CostPlan::Tot1 { b: *b, omega },
            StrategyPlan::Bon { k, base } => match base {
                BasePolicy::Cot => CostPlan::BonCot { k: *k },
                BasePolicy::Tot1 { b } => CostPlan::BonTot1 { k: *k, b: *b },
            },
            StrategyPlan::Mv { k, .. } => CostPlan::Mv { k: *k },
        }
    }
}

/// Inference FLOP costs (parameter, attention, evaluation) for a strategy
/// emitting `expected_tokens` output tokens.
///
/// Parameter cost is 2NΩ'. Attention cost is 2 n_layers d_attn times the
/// strategy-specific quadratic context term: the prompt is re-processed per
/// parallel trace (k Ω_p² for BoN/MV) and the output self-attention term is
/// diluted by the branching or the trace split (Ω'²/2b, Ω'²/2k).
pub fn inference_cost(
    arch: &ArchSpec,
    plan: CostPlan,
    expected_tokens: f64,
) -> Result<(f64, f64, f64)> {
    inference_cost_with_eval_addend(arch, plan, expected_tokens, |_, _, _| 0.0)
}

/// [`inference_cost`] with a pluggable extra evaluation-cost term, for
/// bookkeeping variants (e.g. alternative logit-pool accounting for ToT).
pub fn inference_cost_with_eval_addend<F>(
    arch: &ArchSpec,
    plan: CostPlan,
    expected_tokens: f64,
    addend: F,
) -> Result<(f64, f64, f64)>
where
    F: Fn(&ArchSpec, &CostPlan, f64) -> f64,
{
    if expected_tokens.is_nan() || expected_tokens < 0.0 {
        return Err(StrategyError::Domain);
    }
    let out = expected_tokens;
    let ld = 2.0 * arch.n_layers as f64 * arch.d_attn as f64;
    let op = arch.prompt_tokens as f64;
    let cost_param = 2.0 * arch.n_params * out;
    let (attn_ctx, eval) = match plan {
        CostPlan::Cot => (op * op + op * out + 0.5 * out * out, 0.0),
        CostPlan::Tot1 { b, omega } => {
            if b == 0 || !(omega > 0.0) {
                return Err(StrategyError::Domain);
            }
            // Logit accumulation: one pool update per emitted token plus one
            // comparison per skill step.
            (
                op * op + op * out + 0.5 * out * out / b as f64,
                out + out / omega,
            )
        }
        CostPlan::BonCot { k } | CostPlan::BonTot1 { k, .. } => {
            if k == 0 {
                return Err(StrategyError::Domain);
            }
            let denom = match plan {
                CostPlan::BonTot1 { k, b } => (k * b) as f64,
                _ => k as f64,
            };
            (
                k as f64 * op * op + op * out + 0.5 * out * out / denom,
                out + k as f64,
            )
        }
        CostPlan::Mv { k } => {
            if k == 0 {
                return Err(StrategyError::Domain);
            }
            (
                k as f64 * op * op + op * out + 0.5 * out * out / k as f64,
                k as f64,
            )
        }
    };
    let cost_eval = eval + addend(arch, &plan, expected_tokens);
    Ok((cost_param, ld * attn_ctx, cost_eval))
}

/// Asymptotic token advantage of ToT(1) over CoT at equal attention-dominated
/// compute: Ω_ToT(1) / Ω_CoT → √b.
pub fn tot_token_advantage(b: u32) -> f64 {
    (b as f64).sqrt()
}

/// Evaluate a full strategy outcome (success, tokens, costs) for a task and
/// plan under the given architecture and token surrogate.
pub fn strategy_outcome(
    task: &TaskSpec,
    plan: &StrategyPlan,
    arch: &ArchSpec,
    token_model: TokenModel,
) -> Result<StrategyOutcome> {
    let x = task.iota_hat() * task.p;
    let m = task.m;
    let t_max = task.step_budget;
    let omega = task.omega as f64;
    let budget_tokens = omega * t_max;

    let success_prob = match plan {
        StrategyPlan::Cot => cot_success(x, m, t_max)?,
        StrategyPlan::Tot1 { b } => tot1_success(x, m, t_max, *b)?,
        StrategyPlan::Bon { k, base } => match base {
            BasePolicy::Cot => bon_success_cot(x, m, t_max, *k)?,
            BasePolicy::Tot1 { b } => bon_success_tot1(x, m, t_max, *k, *b)?,
        },
        StrategyPlan::Mv { k, spectrum } => {
            let per = cot_success(x, m, (t_max / *k as f64).floor())?;
            mv_success_auto(per, spectrum, *k, 0)?
        }
    };

    let uncapped = |mult: f64, eff_x: f64| -> f64 {
        if eff_x <= 0.0 {
            f64::INFINITY
        } else {
            mult * omega * m as f64 / eff_x
        }
    };
    let expected_tokens = match (plan, token_model) {
        (StrategyPlan::Cot, TokenModel::PiecewiseLinear) => {
            cot_expected_tokens_piecewise(x, m, omega, budget_tokens)
        }
        (StrategyPlan::Cot, TokenModel::LinearGaussian { z_star }) => {
            cot_expected_tokens_lga(x, m, omega, budget_tokens, z_star)?
        }
        (StrategyPlan::Tot1 { b }, tm) => {
            let boosted = 1.0 - (1.0 - x).powi(*b as i32);
            match tm {
                TokenModel::PiecewiseLinear => {
                    uncapped(*b as f64, boosted).min(budget_tokens)
                }
                TokenModel::LinearGaussian { z_star } => {
                    let per_branch =
                        cot_expected_tokens_lga(boosted, m, omega, budget_tokens / *b as f64, z_star)?;
                    (*b as f64 * per_branch).min(budget_tokens)
                }
            }
        }
        (StrategyPlan::Bon { k, .. }, tm) | (StrategyPlan::Mv { k, .. }, tm) => {
            let (eff_x, mult) = match plan {
                StrategyPlan::Bon {
                    base: BasePolicy::Tot1 { b },
                    ..
                } => (1.0 - (1.0 - x).powi(*b as i32), (*k * *b) as f64),
                _ => (x, *k as f64),
            };
            match tm {
                TokenModel::PiecewiseLinear => uncapped(mult, eff_x).min(budget_tokens),
                TokenModel::LinearGaussian { z_star } => {
                    let per_mult = mult / *k as f64;
                    let per = cot_expected_tokens_lga(
                        eff_x,
                        m,
                        omega * per_mult,
                        budget_tokens / *k as f64,
                        z_star,
                    )?;
                    (*k as f64 * per).min(budget_tokens)
                }
            }
        }
    };

    let (cost_param, cost_attn, cost_eval) =
        inference_cost(arch, CostPlan::from_plan(plan, omega), expected_tokens)?;
    Ok(StrategyOutcome {
        success_prob,
        expected_tokens,
        cost_param,
        cost_attn,
        cost_eval,
    })
}

/// Total CoT inference cost at a given emitted-token count.
pub fn cot_total_cost(arch: &ArchSpec, tokens: f64) -> Result<f64> {
    let (p, a, e) = inference_cost(arch, CostPlan::Cot, tokens)?;
    Ok(p + a + e)
}

/// Invert the ToT(1) cost quadratic: the output-token budget whose ToT(1)
/// cost equals `total_cost`. Returns 0 when even zero tokens exceed the
/// budget (prompt-only cost above target).
pub fn equal_compute_tot1_tokens(arch: &ArchSpec, b: u32, omega: f64, total_cost: f64) -> Result<f64> {
    if b == 0 || !(omega > 0.0) || !(total_cost >= 0.0) {
        return Err(StrategyError::Domain);
    }
    let ld = 2.0 * arch.n_layers as f64 * arch.d_attn as f64;
    let op = arch.prompt_tokens as f64;
    // Cost(Ω) = (ld/2b) Ω² + (2N + ld·Ω_p + eval-linear) Ω + ld·Ω_p²
    // The eval term (Ω + Ω/ω) is linear in Ω with coefficient ~1, negligible
    // next to 2N but included for exact inversion.
    let quad = ld / (2.0 * b as f64);
    let lin = 2.0 * arch.n_params + ld * op + 1.0 + 1.0 / omega;
    let cons = ld * op * op - total_cost;
    let disc = lin * lin - 4.0 * quad * cons;
    if disc < 0.0 {
        return Ok(0.0);
    }
    Ok(((-lin + disc.sqrt()) / (2.0 * quad)).max(0.0))
}

/// One cell of the CoT-vs-ToT(1) preference field.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CrossoverCell {
    pub iota_p: f64,
    pub cot_tokens: f64,
    pub tot_tokens: f64,
    pub psi_cot: f64,
    pub psi_tot: f64,
    /// ψ_ToT - ψ_CoT over feasible cells; None when either side cannot fit
    /// its m skills in the budget.
    pub delta: Option<f64>,
    pub cot_feasible: bool,
    pub tot_feasible: bool,
}

/// Signed preference field Δ = ψ^(b) - ψ^(1) on an (ι̂p × token budget)
/// grid at equal total compute, with the ToT(1) budget obtained by exact
/// cost inversion. Infeasible cells are flagged rather than zeroed.
pub fn crossover_map(
    iota_ps: &[f64],
    cot_token_budgets: &[f64],
    m: u32,
    b: u32,
    arch: &ArchSpec,
    omega: f64,
) -> Result<Vec<CrossoverCell>> {
    if m == 0 || b == 0 || !(omega > 0.0) {
        return Err(StrategyError::Domain);
    }
    let mut cells = Vec::with_capacity(iota_ps.len() * cot_token_budgets.len());
    for &x in iota_ps {
        check_prob(x)?;
        for &cot_tokens in cot_token_budgets {
            if !(cot_tokens > 0.0) {
                return Err(StrategyError::Domain);
            }
            let total = cot_total_cost(arch, cot_tokens)?;
            let tot_tokens = equal_compute_tot1_tokens(arch, b, omega, total)?;
            let cot_steps = cot_tokens / omega;
            let tot_steps = tot_tokens / omega;
            let cot_feasible = cot_steps >= m as f64;
            let tot_feasible = (tot_steps / b as f64).floor() >= m as f64;
            let psi_cot = cot_success(x, m, cot_steps)?;
            let psi_tot = tot1_success(x, m, tot_steps, b)?;
            let delta = (cot_feasible && tot_feasible).then_some(psi_tot - psi_cot);
            cells.push(CrossoverCell {
                iota_p: x,
                cot_tokens,
                tot_tokens,
                psi_cot,
                psi_tot,
                delta,
                cot_feasible,
                tot_feasible,
            });
        }
    }
    Ok(cells)
}

/// Reasoning-depth amplification at depth t and per-step success r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplification {
    /// A(t, r) = t (1-r)^(t-1), the depth-t slope multiplier.
    pub a: f64,
    /// Optimal (real-valued) depth t* = 1/r - 1.
    pub t_star: f64,
    /// Maximum amplification g(r) = max_t A(t, r) over integer t; equals 1
    /// for r ≥ 1/2.
    pub g: f64,
}

/// Maximum amplification factor g(r) over continuous depth.
pub fn amplification_g(r: f64) -> Result<f64> {
    if r.is_nan() || !(r > 0.0 && r < 1.0) {
        return Err(StrategyError::Domain);
    }
    if r >= 0.5 {
        return Ok(1.0);
    }
    let t_star = 1.0 / r - 1.0;
    Ok(t_star * (1.0 - r).powf(1.0 / r - 2.0))
}

/// Amplification law A(t, r), its optimal depth, and maximum gain.
pub fn amplification(r: f64, t: u32) -> Result<Amplification> {
    if r.is_nan() || !(r > 0.0 && r < 1.0) || t == 0 {
        return Err(StrategyError::Domain);
    }
    let tf = t as f64;
    Ok(Amplification {
        a: tf * (1.0 - r).powf(tf - 1.0),
        t_star: 1.0 / r - 1.0,
        g: amplification_g(r)?,
    })
}

/// Limiting-case per-step skill probability when the budget equals the step
/// count: the product of sub-question accuracy, sub-answer accuracy, and the
/// per-step share of the end-to-end shortcut mass.
pub fn wu_limit_skill_prob(
    sigma_p: f64,
    e_p: f64,
    ell: f64,
    m: u32,
    alpha_shortcut: f64,
) -> Result<f64> {
    if m == 0 {
        return Err(StrategyError::Domain);
    }
    let f1 = 1.0 - sigma_p * ell;
    let f2 = 1.0 - e_p * ell / m as f64;
    if !(0.0..=1.0).contains(&f1)
        || !(0.0..=1.0).contains(&f2)
        || !(0.0..=1.0).contains(&alpha_shortcut)
        || f1.is_nan()
        || f2.is_nan()
    {
        return Err(StrategyError::Domain);
    }
    Ok(f1 * f2 * alpha_shortcut.powf(1.0 / m as f64))
}
