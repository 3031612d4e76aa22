//! Hierarchical skill-text tripartite training model.
//!
//! Training is modeled as concept acquisition from text followed by skill
//! acquisition from concepts, stacked over L skill levels. Per level the
//! model tracks: the concept-learning probability (a finite-blocklength
//! Q-function form), a Chernoff bound on the concepts attached to each
//! skill, a three-case KL-Chernoff skill-acquisition bound, and the giant
//! connected component of the intra-level composability graph (Erdős–Rényi,
//! via Lambert W). Tasks choose a solution level: a task nominally needing m
//! skills at level ℓ can be decomposed downward or compressed upward at the
//! prerequisite rate σ_k = ln(k)/2, and accuracy takes the best level.

use crate::specfun::{self, SpecFunError};
use crate::strategies;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SkillGraphError {
    #[error("parameter outside its domain")]
    Domain,
    #[error("special function failure: {0}")]
    SpecFun(#[from] SpecFunError),
    #[error("strategy evaluation failed: {0}")]
    Strategy(#[from] strategies::StrategyError),
}

pub type Result<T> = std::result::Result<T, SkillGraphError>;

/// Structural and calibration parameters of the tripartite graph.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GraphParams {
    /// Parameters per concept: N = ζ R.
    pub zeta: f64,
    /// Tokens per text piece: D = τ T.
    pub tau: f64,
    /// Concept-learning curve constants (degree-distribution dependent,
    /// supplied as opaque calibration inputs).
    pub nu_star: f64,
    pub eps_star: f64,
    pub alpha_deg: f64,
    /// Concept-to-skill attachment decay: ξ_ℓ = exp(-c ℓ / L).
    pub c_decay: f64,
    /// Number of skill levels L.
    pub levels: u32,
    /// Skills per level S^(ℓ), length `levels`.
    pub skills_per_level: Vec<f64>,
    /// Concepts needed to acquire a skill.
    pub eta: f64,
    /// Chernoff failure probability for the degree bound.
    pub rho: f64,
    /// Relevant-set inflation: M = ceil(m (1 + β)).
    pub beta_rel: f64,
    /// Inference directionality coefficient δ.
    pub delta: f64,
}

impl GraphParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.zeta > 0.0)
            || !(self.tau > 0.0)
            || !(self.nu_star > 0.0)
            || !(self.eps_star > 0.5)
            || !(self.alpha_deg > 0.0)
            || !(self.c_decay > 0.0)
            || self.levels == 0
            || self.skills_per_level.len() != self.levels as usize
            || self.skills_per_level.iter().any(|&s| !(s >= 1.0))
            || !(self.eta > 0.0)
            || !(self.rho > 0.0 && self.rho < 1.0)
            || !(self.beta_rel >= 0.0)
            || !(0.0..=1.0).contains(&self.delta)
        {
            return Err(SkillGraphError::Domain);
        }
        Ok(())
    }

    /// Production-scale preset: 100 levels of 10^4 skills, 2500 parameters
    /// per concept, 10^4 tokens per text piece, attachment decay 10,
    /// relevant-set inflation 5, directionality 1/2, and concept-curve
    /// calibration (ν* = 0.45, ε* = 0.6, α = 4800) placing the curve knee
    /// above the studied training range.
    pub fn production_preset() -> Self {
        GraphParams {
            zeta: 2.5e3,
            tau: 1e4,
            nu_star: 0.45,
            eps_star: 0.6,
            alpha_deg: 4800.0,
            c_decay: 10.0,
            levels: 100,
            skills_per_level: vec![1e4; 100],
            eta: 8.0,
            rho: 0.01,
            beta_rel: 5.0,
            delta: 0.5,
        }
    }

    fn xi(&self, level: u32) -> f64 {
        (-self.c_decay * level as f64 / self.levels as f64).exp()
    }
}

/// Per-level quantities produced by the recursion.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LevelProfile {
    pub level: u32,
    /// Concept-learning probability P̄_b (level-independent, repeated for
    /// convenience).
    pub p_bar: f64,
    /// Guaranteed concept degree d_ρ.
    pub d_rho: f64,
    /// Skill-acquisition bound p_s(ℓ).
    pub p_s: f64,
    /// Pairwise composability p_ℓ.
    pub p_compose: f64,
    /// Giant-component fraction γ_ℓ.
    pub gamma: f64,
    /// Degree bracket went nonpositive: degree bound degenerate at this
    /// level.
    pub degenerate: bool,
    /// The acquisition bound is the trivial case-3 value (η ≥ d_ρ), so p_s
    /// carries no information.
    pub vacuous: bool,
}

/// Concept-learning probability P̄_b = 2 ν* Q(√(2R) (ε* - 1/2) / α),
/// clamped to [0, 1].
pub fn concept_learn_prob(params: &GraphParams, r_concepts: f64) -> Result<f64> {
    params.validate()?;
    if !(r_concepts > 0.0) {
        return Err(SkillGraphError::Domain);
    }
    let arg = (2.0 * r_concepts).sqrt() * (params.eps_star - 0.5) / params.alpha_deg;
    Ok((2.0 * params.nu_star * specfun::q_function(arg)?).clamp(0.0, 1.0))
}

/// Guaranteed concept degree of a level-ℓ skill:
/// 0.99 · (ξ R / S) (1 - sqrt(2 S ln(S/ρ) / (R ξ))), floored at zero with a
/// degenerate flag when the bracket goes nonpositive.
pub fn skill_degree(params: &GraphParams, r_concepts: f64, level: u32) -> Result<(f64, bool)> {
    params.validate()?;
    if level == 0 || level > params.levels || !(r_concepts > 0.0) {
        return Err(SkillGraphError::Domain);
    }
    let s = params.skills_per_level[(level - 1) as usize];
    let xi = params.xi(level);
    let mean = xi * r_concepts / s;
    let ratio = 2.0 * s * (s / params.rho).ln() / (r_concepts * xi);
    let bracket = 1.0 - ratio.sqrt();
    if bracket <= 0.0 {
        return Ok((0.0, true));
    }
    Ok((0.99 * mean * bracket, false))
}

/// Three-case skill-acquisition bound.
///
/// KL-Chernoff lower bound below the mean, the (2d)^(-1/2) exp(-d KL) form
/// between mean and degree, and the trivial value 1 once η ≥ d_ρ (the bound
/// carries no information there; see [`LevelProfile::vacuous`]).
pub fn skill_acq_prob(d_rho: f64, p_bar: f64, eta: f64) -> Result<f64> {
    if !(d_rho >= 0.0) || !(0.0..=1.0).contains(&p_bar) || !(eta > 0.0) {
        return Err(SkillGraphError::Domain);
    }
    if eta >= d_rho {
        return Ok(1.0);
    }
    let q = eta / d_rho;
    // p_bar in {0, 1} would make the KL undefined; use the limiting values.
    if p_bar <= 0.0 {
        return Ok(0.0);
    }
    if p_bar >= 1.0 {
        return Ok(1.0);
    }
    let kl = specfun::bernoulli_kl(q, p_bar)?;
    if q <= p_bar {
        Ok(1.0 - (-d_rho * kl).exp())
    } else {
        Ok(((-d_rho * kl).exp() / (2.0 * d_rho).sqrt()).clamp(0.0, 1.0))
    }
}

/// Giant-component fraction of an Erdős–Rényi graph with mean degree
/// c = p S: γ = 1 + W₀(-c e^(-c))/c, zero at or below the percolation
/// threshold c = 1.
pub fn gcc_fraction(p_compose: f64, s_count: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_compose) || !(s_count >= 0.0) {
        return Err(SkillGraphError::Domain);
    }
    let c = p_compose * s_count;
    if c <= 1.0 {
        return Ok(0.0);
    }
    let w = specfun::lambert_w0(-c * (-c).exp())?;
    Ok((1.0 + w / c).clamp(0.0, 1.0))
}

/// Prerequisite count per level: σ_ℓ = ln(ℓ)/2, with σ_1 = 0.
pub fn sigma_prereq(level: u32) -> f64 {
    if level <= 1 {
        0.0
    } else {
        0.5 * (level as f64).ln()
    }
}

/// Run the level recursion: γ_0 = 1, σ_1 = 0, and per level
/// p_ℓ = p_s(ℓ)² γ_(ℓ-1)^(2 σ_ℓ), γ_ℓ from the giant component.
pub fn level_recursion(params: &GraphParams, r_concepts: f64) -> Result<Vec<LevelProfile>> {
    params.validate()?;
    let p_bar = concept_learn_prob(params, r_concepts)?;
    let mut profiles = Vec::with_capacity(params.levels as usize);
    let mut gamma_prev = 1.0f64;
    for level in 1..=params.levels {
        let (d_rho, degenerate) = skill_degree(params, r_concepts, level)?;
        let p_s = skill_acq_prob(d_rho, p_bar, params.eta)?;
        let vacuous = params.eta >= d_rho;
        let p_compose = (p_s * p_s * gamma_prev.powf(2.0 * sigma_prereq(level))).clamp(0.0, 1.0);
        let gamma = gcc_fraction(p_compose, params.skills_per_level[(level - 1) as usize])?;
        profiles.push(LevelProfile {
            level,
            p_bar,
            d_rho,
            p_s,
            p_compose,
            gamma,
            degenerate,
            vacuous,
        });
        gamma_prev = gamma;
    }
    Ok(profiles)
}

/// Skill count needed to solve an (ℓ, m) task at level ℓ': divide by the
/// prerequisite products going up, multiply going down, ceiling either way.
/// Saturates at u64::MAX when the product overflows meaningful range.
pub fn task_equivalent_skills(ell: u32, m: u32, ell_prime: u32) -> Result<u64> {
    if ell == 0 || ell_prime == 0 || m == 0 {
        return Err(SkillGraphError::Domain);
    }
    if ell_prime == ell {
        return Ok(m as u64);
    }
    let mut product = 1.0f64;
    if ell_prime > ell {
        for k in (ell + 1)..=ell_prime {
            product *= sigma_prereq(k).max(f64::MIN_POSITIVE);
        }
        let v = (m as f64 / product).ceil();
        if v > 1e18 {
            return Ok(u64::MAX);
        }
        Ok(v.max(1.0) as u64)
    } else {
        for k in (ell_prime + 1)..=ell {
            product *= sigma_prereq(k).max(f64::MIN_POSITIVE);
        }
        let v = (m as f64 * product).ceil();
        if v > 1e18 {
            return Ok(u64::MAX);
        }
        Ok(v.max(1.0) as u64)
    }
}

/// Best solution level for one task under a CoT step budget.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TaskSuccess {
    pub psi: f64,
    pub chosen_level: u32,
    /// Equivalent skill count at the chosen level.
    pub m_eff: u64,
    /// Per-step success ι̂ p_s at the chosen level.
    pub step_prob: f64,
}

/// Success probability for an (ℓ, m) task: the best over solution levels ℓ'
/// of γ_(ℓ')^(m') · I_(ι̂ p_s)(m', T - m' + 1) with
/// ι̂ = δ + (1-δ)/⌈m'(1+β)⌉. Ties break toward the smallest level;
/// all-infeasible tasks report ψ = 0.
pub fn task_success_cot(
    profiles: &[LevelProfile],
    ell: u32,
    m: u32,
    omega: f64,
    token_budget: f64,
    beta_rel: f64,
    delta: f64,
) -> Result<TaskSuccess> {
    if profiles.is_empty()
        || ell == 0
        || ell > profiles.len() as u32
        || m == 0
        || !(omega > 0.0)
        || !(token_budget > 0.0)
        || !(beta_rel >= 0.0)
        || !(0.0..=1.0).contains(&delta)
    {
        return Err(SkillGraphError::Domain);
    }
    let t_steps = token_budget / omega;
    let mut best = TaskSuccess {
        psi: 0.0,
        chosen_level: 1,
        m_eff: m as u64,
        step_prob: 0.0,
    };
    let mut found = false;
    for profile in profiles {
        let lp = profile.level;
        if profile.gamma <= 0.0 {
            continue;
        }
        let m_eff = task_equivalent_skills(ell, m, lp)?;
        if m_eff == u64::MAX || (m_eff as f64) > t_steps {
            continue;
        }
        let m_set = (m_eff as f64 * (1.0 + beta_rel)).ceil().max(1.0);
        let iota = delta + (1.0 - delta) / m_set;
        let u = (iota * profile.p_s).clamp(0.0, 1.0);
        let gate = profile.gamma.powf(m_eff as f64);
        if gate <= 0.0 {
            continue;
        }
        let m_eff_u32 = m_eff.min(u32::MAX as u64) as u32;
        let psi = gate * strategies::cot_success(u, m_eff_u32, t_steps)?;
        if !found || psi > best.psi {
            best = TaskSuccess {
                psi,
                chosen_level: lp,
                m_eff,
                step_prob: u,
            };
            found = true;
        }
    }
    Ok(best)
}

/// Expected accuracy and expected emitted tokens over a task distribution.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GraphAccuracy {
    pub accuracy: f64,
    pub expected_tokens: f64,
}

/// Weighted accuracy over (ℓ, m, weight) tasks; the paired token estimate
/// uses the piecewise-linear surrogate at each task's chosen level.
pub fn expected_accuracy(
    profiles: &[LevelProfile],
    task_dist: &[(u32, u32, f64)],
    omega: f64,
    token_budget: f64,
    beta_rel: f64,
    delta: f64,
) -> Result<GraphAccuracy> {
    if task_dist.is_empty() {
        return Err(SkillGraphError::Domain);
    }
    let wsum: f64 = task_dist.iter().map(|&(_, _, w)| w).sum();
    if (wsum - 1.0).abs() > 1e-9 || task_dist.iter().any(|&(_, _, w)| w < 0.0) {
        return Err(SkillGraphError::Domain);
    }
    let t_steps = token_budget / omega;
    let mut acc = 0.0;
    let mut tokens = 0.0;
    for &(ell, m, w) in task_dist {
        let ts = task_success_cot(profiles, ell, m, omega, token_budget, beta_rel, delta)?;
        acc += w * ts.psi;
        let expected = if ts.step_prob > 0.0 && ts.psi > 0.0 {
            (ts.m_eff as f64 / ts.step_prob).min(t_steps) * omega
        } else {
            token_budget
        };
        tokens += w * expected;
    }
    Ok(GraphAccuracy {
        accuracy: acc,
        expected_tokens: tokens,
    })
}

/// One point of the overtraining sweep.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SweepPoint {
    pub kappa: f64,
    /// Sum of p_s over levels whose acquisition bound is informative
    /// (degree bound positive and η < d_ρ).
    pub competence: f64,
    pub p_bar: f64,
    /// Concept learning has collapsed (P̄_b below a tenth of ν*): the
    /// finite-blocklength form is outside its validity range, which is the
    /// undertrained/overparameterized side of the sweep.
    pub out_of_model: bool,
}

/// Sweep trained competence against the data-to-parameter ratio κ at fixed
/// training compute: N = sqrt(C/(6κ)), D = κN, R = N/ζ.
pub fn overtraining_sweep(
    compute_budget: f64,
    kappa_grid: &[f64],
    params: &GraphParams,
) -> Result<Vec<SweepPoint>> {
    params.validate()?;
    if !(compute_budget > 0.0) || kappa_grid.is_empty() {
        return Err(SkillGraphError::Domain);
    }
    let mut out = Vec::with_capacity(kappa_grid.len());
    for &kappa in kappa_grid {
        if !(kappa > 0.0) {
            return Err(SkillGraphError::Domain);
        }
        let n = (compute_budget / (6.0 * kappa)).sqrt();
        let r = n / params.zeta;
        let profiles = level_recursion(params, r)?;
        let competence = profiles
            .iter()
            .filter(|p| !p.degenerate && !p.vacuous)
            .map(|p| p.p_s)
            .sum();
        let p_bar = profiles[0].p_bar;
        out.push(SweepPoint {
            kappa,
            competence,
            p_bar,
            out_of_model: p_bar < 0.1 * params.nu_star,
        });
    }
    Ok(out)
}
