//! Seeded Monte-Carlo simulator of the idealized stochastic skill walk.
//!
//! Each trial walks a fully connected relevant-skill graph: at every step the
//! walker reaches the next required skill with probability ι̂ = δ + (1-δ)/M
//! and, conditional on reaching it, executes it with probability p. The
//! simulator is the ground-truth oracle for the closed forms in
//! [`crate::strategies`]: it reports raw success counts and emitted tokens
//! and leaves FLOP accounting to the cost model.
//!
//! Trials use independent counter-based RNG streams keyed by (seed, trial),
//! so ensembles are order-independent, mergeable, and bit-identical under
//! any parallel schedule.

use crate::population::ErrorSpectrum;
use crate::rng::CounterRng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum WalkError {
    #[error("parameter outside its domain")]
    Domain,
    #[error("per-trace step budget is below one step")]
    InfeasibleBudget,
}

pub type Result<T> = std::result::Result<T, WalkError>;

/// Idealized task and walk parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TaskSpec {
    /// Required sequential skills m.
    pub m: u32,
    /// Relevant-set size M = |S_R|.
    pub relevant_set: u32,
    /// Directionality coefficient δ in [0, 1].
    pub delta: f64,
    /// Per-skill execution probability p.
    pub p: f64,
    /// Tokens emitted per skill step ω.
    pub omega: u32,
    /// Total step budget T_max (real-valued; floored per trace).
    pub step_budget: f64,
    /// Prompt size Ω_prompt; carried for cost accounting, not consumed here.
    pub prompt_tokens: u64,
    /// Complete-fatigue variant: a trace that misses on its first step can
    /// never succeed afterwards.
    #[serde(default)]
    pub complete_fatigue: bool,
}

impl TaskSpec {
    pub fn new(m: u32, relevant_set: u32, delta: f64, p: f64, omega: u32, step_budget: f64) -> Result<Self> {
        let spec = TaskSpec {
            m,
            relevant_set,
            delta,
            p,
            omega,
            step_budget,
            prompt_tokens: 0,
            complete_fatigue: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0
            || self.relevant_set == 0
            || self.omega == 0
            || !(0.0..=1.0).contains(&self.delta)
            || !(0.0..=1.0).contains(&self.p)
            || !(self.step_budget > 0.0)
            || self.delta.is_nan()
            || self.p.is_nan()
        {
            return Err(WalkError::Domain);
        }
        Ok(())
    }

    /// Directionality ι̂ = δ + (1-δ)/M, the chance of stepping to the next
    /// required skill.
    pub fn iota_hat(&self) -> f64 {
        self.delta + (1.0 - self.delta) / self.relevant_set as f64
    }

    /// Convenience constructor pinning ι̂·p directly (δ = 1, p = ι̂p), used
    /// by verification grids where only the product matters.
    pub fn from_iota_p(iota_p: f64, m: u32, omega: u32, step_budget: f64) -> Result<Self> {
        TaskSpec::new(m, 1, 1.0, iota_p, omega, step_budget)
    }
}

/// Base policy for best-of-N traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BasePolicy {
    Cot,
    Tot1 { b: u32 },
}

/// Inference strategy to simulate.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategyPlan {
    Cot,
    Tot1 { b: u32 },
    Bon { k: u32, base: BasePolicy },
    Mv { k: u32, spectrum: ErrorSpectrum },
}

impl StrategyPlan {
    fn validate(&self, spec: &TaskSpec) -> Result<()> {
        let t = spec.step_budget;
        match self {
            StrategyPlan::Cot => {
                if t.floor() < 1.0 {
                    return Err(WalkError::InfeasibleBudget);
                }
            }
            StrategyPlan::Tot1 { b } => {
                if *b == 0 {
                    return Err(WalkError::Domain);
                }
                if (t / *b as f64).floor() < 1.0 {
                    return Err(WalkError::InfeasibleBudget);
                }
            }
            StrategyPlan::Bon { k, base } => {
                if *k == 0 {
                    return Err(WalkError::Domain);
                }
                let per = (t / *k as f64).floor();
                if per < 1.0 {
                    return Err(WalkError::InfeasibleBudget);
                }
                if let BasePolicy::Tot1 { b } = base {
                    if *b == 0 {
                        return Err(WalkError::Domain);
                    }
                    if (per / *b as f64).floor() < 1.0 {
                        return Err(WalkError::InfeasibleBudget);
                    }
                }
            }
            StrategyPlan::Mv { k, .. } => {
                if *k == 0 {
                    return Err(WalkError::Domain);
                }
                if (t / *k as f64).floor() < 1.0 {
                    return Err(WalkError::InfeasibleBudget);
                }
            }
        }
        Ok(())
    }
}

/// Ensemble statistics from a batch of simulated trials.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EnsembleEstimate {
    pub success_rate: f64,
    pub success_stderr: f64,
    pub mean_output_tokens: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Node of the idealized walk graph. Skill ids are relative to the walker's
/// current target: `Skill(0)` is the next required skill s*, ids 1..M-1 are
/// the other relevant skills (exchangeable in this model).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Skill(u32),
    Branch,
    Stop,
}

/// Per-step emission: a skill application succeeded or failed, or a control
/// node emitted nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Hit,
    Miss,
    Null,
}

/// One application of the transition and outcome kernels.
///
/// From a skill node: step to s* with probability ι̂, otherwise to one of
/// the remaining relevant skills uniformly; the outcome is `Hit` with
/// probability p only at s*. Control nodes pass through with `Null`.
pub fn step_kernel(current: Node, spec: &TaskSpec, rng: &mut CounterRng) -> (Node, StepOutcome) {
    match current {
        Node::Stop => (Node::Stop, StepOutcome::Null),
        Node::Branch => (Node::Branch, StepOutcome::Null),
        Node::Skill(_) => {
            let iota = spec.iota_hat();
            let u = rng.uniform();
            if u < iota {
                let outcome = if rng.uniform() < spec.p {
                    StepOutcome::Hit
                } else {
                    StepOutcome::Miss
                };
                (Node::Skill(0), outcome)
            } else {
                // Map the residual mass uniformly over the M-1 other skills.
                let others = spec.relevant_set.max(2) - 1;
                let frac = ((u - iota) / (1.0 - iota)).min(1.0 - 1e-16);
                let idx = 1 + (frac * others as f64) as u32;
                (Node::Skill(idx.min(others)), StepOutcome::Miss)
            }
        }
    }
}

/// Walk one CoT trace; returns (completed, skill steps consumed).
fn run_cot_trace(spec: &TaskSpec, budget_steps: u64, rng: &mut CounterRng) -> (bool, u64) {
    let mut progress = 0u32;
    let mut node = Node::Skill(0);
    for t in 1..=budget_steps {
        let (next, outcome) = step_kernel(node, spec, rng);
        node = next;
        match outcome {
            StepOutcome::Hit => {
                progress += 1;
                if progress == spec.m {
                    return (true, t);
                }
            }
            StepOutcome::Miss => {
                if spec.complete_fatigue && t == 1 {
                    // Catastrophic first-step failure: the rest of the budget
                    // is burned with no chance of success.
                    return (false, budget_steps);
                }
            }
            StepOutcome::Null => {}
        }
    }
    (false, budget_steps)
}

/// Walk one ToT(1) trace: b branches per effective step, a branch pool that
/// advances when any branch hits, surviving branch chosen uniformly.
/// Returns (completed, total skill steps consumed across branches).
fn run_tot1_trace(spec: &TaskSpec, b: u32, macro_budget: u64, rng: &mut CounterRng) -> (bool, u64) {
    let mut progress = 0u32;
    for t in 1..=macro_budget {
        let mut hits = 0u32;
        for _ in 0..b {
            let (_, outcome) = step_kernel(Node::Skill(0), spec, rng);
            if outcome == StepOutcome::Hit {
                hits += 1;
            }
        }
        if hits > 0 {
            if hits > 1 {
                // All but one hitting branch are terminated arbitrarily; the
                // survivor is picked uniformly (exchangeable, so this draw
                // has no statistical effect but matches the policy).
                let _ = rng.below(hits as u64);
            }
            progress += 1;
            if progress == spec.m {
                return (true, t * b as u64);
            }
        } else if spec.complete_fatigue && t == 1 {
            return (false, macro_budget * b as u64);
        }
    }
    (false, macro_budget * b as u64)
}

enum TrialResult {
    /// (success, steps consumed)
    Done(bool, u64),
}

fn run_trial(spec: &TaskSpec, plan: &StrategyPlan, rng: &mut CounterRng) -> TrialResult {
    let t_max = spec.step_budget;
    match plan {
        StrategyPlan::Cot => {
            let (ok, steps) = run_cot_trace(spec, t_max.floor() as u64, rng);
            TrialResult::Done(ok, steps)
        }
        StrategyPlan::Tot1 { b } => {
            let macro_budget = (t_max / *b as f64).floor() as u64;
            let (ok, steps) = run_tot1_trace(spec, *b, macro_budget, rng);
            TrialResult::Done(ok, steps)
        }
        StrategyPlan::Bon { k, base } => {
            let per_trace = (t_max / *k as f64).floor();
            let mut any = false;
            let mut steps = 0u64;
            for _ in 0..*k {
                let (ok, s) = match base {
                    BasePolicy::Cot => run_cot_trace(spec, per_trace as u64, rng),
                    BasePolicy::Tot1 { b } => {
                        run_tot1_trace(spec, *b, (per_trace / *b as f64).floor() as u64, rng)
                    }
                };
                any |= ok;
                steps += s;
            }
            TrialResult::Done(any, steps)
        }
        StrategyPlan::Mv { k, spectrum } => {
            let per_trace = (t_max / *k as f64).floor() as u64;
            let n_answers = spectrum.alphabet_size();
            let mut votes = vec![0u32; n_answers];
            let mut steps = 0u64;
            for _ in 0..*k {
                let (ok, s) = run_cot_trace(spec, per_trace, rng);
                steps += s;
                let answer = if ok { 0 } else { 1 + spectrum.sample(rng) };
                votes[answer] += 1;
            }
            let top = *votes.iter().max().unwrap();
            let tied: Vec<usize> = (0..n_answers).filter(|&j| votes[j] == top).collect();
            let winner = tied[rng.below(tied.len() as u64) as usize];
            TrialResult::Done(winner == 0, steps)
        }
    }
}

/// Simulate `trials` independent runs of the strategy.
///
/// Deterministic given (spec, plan, trials, seed); trials are dispatched in
/// parallel and merged by exact integer summation.
pub fn simulate(
    spec: &TaskSpec,
    plan: &StrategyPlan,
    trials: u64,
    seed: u64,
) -> Result<EnsembleEstimate> {
    spec.validate()?;
    plan.validate(spec)?;
    if trials == 0 {
        return Err(WalkError::Domain);
    }

    let (successes, token_steps) = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = CounterRng::new(seed, trial);
            let TrialResult::Done(ok, steps) = run_trial(spec, plan, &mut rng);
            (ok as u64, steps as u128)
        })
        .reduce(|| (0u64, 0u128), |a, b| (a.0 + b.0, a.1 + b.1));

    let rate = successes as f64 / trials as f64;
    Ok(EnsembleEstimate {
        success_rate: rate,
        success_stderr: (rate * (1.0 - rate) / trials as f64).sqrt(),
        mean_output_tokens: token_steps as f64 * spec.omega as f64 / trials as f64,
        trials,
        seed,
    })
}
