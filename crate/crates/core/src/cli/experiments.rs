//! The nine experiment pipelines.

use super::config::{self, ArchParams, Envelope, ExperimentKind, LogSweep};
use super::io::{self, Cell, CsvOut};
use super::{Result, RunError, RunSummary};
use crate::{forecast, population, skillgraph, strategies, walk};
use serde::Deserialize;
use std::path::PathBuf;

pub fn dispatch(tree: toml::Value) -> Result<RunSummary> {
    let env = Envelope::from_tree(&tree)?;
    let kind = ExperimentKind::parse(&env.experiment)?;
    if kind.stochastic() && env.seed.is_none() {
        return Err(RunError::Schema(format!(
            "experiment `{}` is stochastic: `seed` is mandatory",
            kind.name()
        )));
    }
    let out_dir = io::output_dir(env.output_dir.as_deref());
    let result_csv = out_dir.join("result.csv");
    let summary_json = out_dir.join("summary.json");

    let (csv, extra) = match kind {
        ExperimentKind::StrategySweep => strategy_sweep(&env)?,
        ExperimentKind::WalkVerify => walk_verify(&env)?,
        ExperimentKind::CrossoverMap => crossover_map(&env)?,
        ExperimentKind::SkillGraph => skill_graph(&env)?,
        ExperimentKind::Allocate => allocate(&env)?,
        ExperimentKind::Tradeoff => tradeoff(&env)?,
        ExperimentKind::PasskFit => passk_fit(&env)?,
        ExperimentKind::MvFit => mv_fit(&env)?,
        ExperimentKind::Directionality => directionality(&env)?,
    };

    csv.write(&result_csv)?;
    io::write_summary(&summary_json, kind.name(), env.seed, &tree, extra)?;
    Ok(RunSummary {
        experiment: kind,
        rows: csv.len(),
        result_csv,
        summary_json,
    })
}

fn num_err(e: impl std::fmt::Display) -> RunError {
    RunError::Numerical(e.to_string())
}

// --- strategy-sweep ---------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrategySweepParams {
    m: u32,
    relevant_set: u32,
    delta: f64,
    p: f64,
    omega: u32,
    #[serde(default)]
    prompt_tokens: u64,
    arch: ArchParams,
    token_budgets: LogSweep,
    strategies: Vec<String>,
    /// Optional truncated-geometric spectrum for `mv:K` strategies.
    mv_lambda: Option<f64>,
    #[serde(default = "default_alphabet")]
    mv_alphabet: usize,
    /// `piecewise` (default) or `linear-gaussian`.
    #[serde(default)]
    token_model: Option<String>,
    #[serde(default = "default_z_star")]
    z_star: f64,
}

fn default_alphabet() -> usize {
    10
}
fn default_z_star() -> f64 {
    2.0
}

fn strategy_sweep(env: &Envelope) -> Result<(CsvOut, serde_json::Value)> {
    let p: StrategySweepParams = config::params(&env.params)?;
    let arch = p.arch.to_arch()?;
    let spectrum = match p.mv_lambda {
        Some(lambda) => Some(
            population::ErrorSpectrum::truncated_geometric(p.mv_alphabet, lambda)
                .map_err(num_err)?,
        ),
        None => None,
    };
    let token_model = match p.token_model.as_deref() {
        None | Some("piecewise") => strategies::TokenModel::PiecewiseLinear,
        Some("linear-gaussian") => strategies::TokenModel::LinearGaussian { z_star: p.z_star },
        Some(other) => {
            return Err(RunError::Schema(format!("unknown token_model `{other}`")))
        }
    };
    let plans: Vec<(String, walk::StrategyPlan)> = p
        .strategies
        .iter()
        .map(|s| Ok((s.clone(), config::parse_strategy(s, spectrum.as_ref())?)))
        .collect::<Result<_>>()?;

    let mut csv = CsvOut::new(&[
        "strategy",
        "token_budget",
        "success_prob",
        "expected_tokens",
        "cost_param",
        "cost_attn",
        "cost_eval",
    ]);
    for budget in p.token_budgets.values()? {
        let mut task = walk::TaskSpec::new(
            p.m,
            p.relevant_set,
            p.delta,
            p.p,
            p.omega,
            budget / p.omega as f64,
        )
        .map_err(num_err)?;
        task.prompt_tokens = p.prompt_tokens;
        for (name, plan) in &plans {
            let outcome = strategies::strategy_outcome(&task, plan, &arch, token_model)
                .map_err(num_err)?;
            csv.push(vec![
                name.as_str().into(),
                budget.into(),
                outcome.success_prob.into(),
                outcome.expected_tokens.into(),
                outcome.cost_param.into(),
                outcome.cost_attn.into(),
                outcome.cost_eval.into(),
            ]);
        }
    }
    Ok((csv, serde_json::json!({})))
}

// --- walk-verify ------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WalkVerifyParams {
    iota_p: Vec<f64>,
    m: Vec<u32>,
    t_max_multipliers: Vec<f64>,
    trials: u64,
    #[serde(default = "default_omega")]
    omega: u32,
    strategies: Vec<String>,
}

fn default_omega() -> u32 {
    25
}

/// Closed-form success for the verification grid.
fn closed_form(plan: &walk::StrategyPlan, x: f64, m: u32, t: f64) -> Result<f64> {
    use walk::{BasePolicy, StrategyPlan};
    let v = match plan {
        StrategyPlan::Cot => strategies::cot_success(x, m, t),
        StrategyPlan::Tot1 { b } => strategies::tot1_success(x, m, t, *b),
        StrategyPlan::Bon {
            k,
            base: BasePolicy::Cot,
        } => strategies::bon_success_cot(x, m, t, *k),
        StrategyPlan::Bon {
            k,
            base: BasePolicy::Tot1 { b },
        } => strategies::bon_success_tot1(x, m, t, *k, *b),
        StrategyPlan::Mv { k, spectrum } => {
            strategies::cot_success(x, m, (t / *k as f64).floor())
                .and_then(|per| strategies::mv_success_auto(per, spectrum, *k, 0))
        }
    };
    v.map_err(num_err)
}

fn walk_verify(env: &Envelope) -> Result<(CsvOut, serde_json::Value)> {
    let p: WalkVerifyParams = config::params(&env.params)?;
    let seed = env.seed.unwrap();
    let plans: Vec<(String, walk::StrategyPlan)> = p
        .strategies
        .iter()
        .map(|s| Ok((s.clone(), config::parse_strategy(s, None)?)))
        .collect::<Result<_>>()?;

    let mut csv = CsvOut::new(&[
        "strategy",
        "iota_p",
        "m",
        "t_max",
        "closed_form",
        "mc_estimate",
        "stderr",
        "z_score",
    ]);
    let mut max_abs_z = 0.0f64;
    let mut cell_seed = seed;
    for &x in &p.iota_p {
        for &m in &p.m {
            for &mult in &p.t_max_multipliers {
                let t = (mult * m as f64).floor();
                let spec =
                    walk::TaskSpec::from_iota_p(x, m, p.omega, t).map_err(num_err)?;
                for (name, plan) in &plans {
                    cell_seed = cell_seed.wrapping_add(0x9e3779b97f4a7c15);
                    let psi = closed_form(plan, x, m, t)?;
                    let est = match walk::simulate(&spec, plan, p.trials, cell_seed) {
                        Ok(e) => e,
                        Err(walk::WalkError::InfeasibleBudget) => continue,
                        Err(e) => return Err(num_err(e)),
                    };
                    let sigma = (psi * (1.0 - psi) / p.trials as f64).sqrt();
                    let z = if sigma == 0.0 {
                        if est.success_rate == psi {
                            0.0
                        } else {
                            f64::INFINITY
                        }
                    } else {
                        (est.success_rate - psi) / sigma
                    };
                    max_abs_z = max_abs_z.max(z.abs());
                    csv.push(vec![
                        name.as_str().into(),
                        x.into(),
                        m.into(),
                        t.into(),
                        psi.into(),
                        est.success_rate.into(),
                        est.success_stderr.into(),
                        z.into(),
                    ]);
                }
            }
        }
    }
    Ok((
        csv,
        serde_json::json!({ "max_abs_z": max_abs_z }),
    ))
}

// --- crossover-map ----------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CrossoverParams {
    m: u32,
    b: u32,
    #[serde(default = "default_omega_f")]
    omega: f64,
    arch: ArchParams,
    iota_p: LogSweep,
    cot_token_budgets: LogSweep,
}

fn default_omega_f() -> f64 {
    25.0
}

fn crossover_map(env: &Envelope) -> Result<(CsvOut, serde_json::Value)> {
    let p: CrossoverParams = config::params(&env.params)?;
    let arch = p.arch.to_arch()?;
    let iotas: Vec<f64> = p.iota_p.values()?.into_iter().filter(|&x| x <= 1.0).collect();
    let budgets = p.cot_token_budgets.values()?;
    let cells = strategies::crossover_map(&iotas, &budgets, p.m, p.b, &arch, p.omega)
        .map_err(num_err)?;
    let mut csv = CsvOut::new(&[
        "iota_p",
        "cot_tokens",
        "tot_tokens",
        "psi_cot",
        "psi_tot",
        "delta",
        "cot_feasible",
        "tot_feasible",
    ]);
    for c in &cells {
        csv.push(vec![
            c.iota_p.into(),
            c.cot_tokens.into(),
            c.tot_tokens.into(),
            c.psi_cot.into(),
            c.psi_tot.into(),
            c.delta.map(Cell::Float).unwrap_or(Cell::Str("".into())),
            c.cot_feasible.into(),
            c.tot_feasible.into(),
        ]);
    }
    let n_tot_pref = cells
        .iter()
        .filter(|c| c.delta.map(|d| d > 0.0).unwrap_or(false))
        .count();
    Ok((
        csv,
        serde_json::json!({
            "cells": cells.len(),
            "tot_preferred_cells": n_tot_pref,
        }),
    ))
}

// --- skill-graph ------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SkillGraphParams {
    /// Graph parameters; omitted fields fall back to the production preset.
    #[serde(default)]
    graph: Option<skillgraph::GraphParams>,
    train_compute: f64,
    #[serde(default = "default_kappa")]
    kappa: f64,
    task_levels: (u32, u32),
    task_skills: (u32, u32),
    #[serde(default = "default_omega_f")]
    omega: f64,
    token_budgets: LogSweep,
}

fn default_kappa() -> f64 {
    20.0
}

fn uniform_tasks(levels: (u32, u32), skills: (u32, u32)) -> Result<Vec<(u32, u32, f64)>> {
    if levels.1 < levels.0 || skills.1 < skills.0 {
        return Err(RunError::Schema("task ranges must be increasing".into()));
    }
    let count = ((levels.1 - levels.0 + 1) * (skills.1 - skills.0 + 1)) as f64;
    let w = 1.0 / count;
    let mut tasks = Vec::new();
    for l in levels.0..=levels.1 {
        for m in skills.0..=skills.1 {
            tasks.push((l, m, w));
        }
    }
    Ok(tasks)
}

fn skill_graph(env: &Envelope) -> Result<(CsvOut, serde_json::Value)> {
    let p: SkillGraphParams = config::params(&env.params)?;
    let graph = p.graph.unwrap_or_else(skillgraph::GraphParams::production_preset);
    let n = (p.train_compute / (6.0 * p.kappa)).sqrt();
    let r = n / graph.zeta;
    let profiles = skillgraph::level_recursion(&graph, r).map_err(num_err)?;
    let tasks = uniform_tasks(p.task_levels, p.task_skills)?;

    let mut csv = CsvOut::new(&["token_budget", "accuracy", "expected_tokens"]);
    let mut sweep = Vec::new();
    for budget in p.token_budgets.values()? {
        let acc = skillgraph::expected_accuracy(
            &profiles,
            &tasks,
            p.omega,
            budget,
            graph.beta_rel,
            graph.delta,
        )
        .map_err(num_err)?;
        sweep.push((budget, acc.accuracy));
        csv.push(vec![
            budget.into(),
            acc.accuracy.into(),
            acc.expected_tokens.into(),
        ]);
    }

    // Mid-range log-linearity diagnostic.
    let fit = mid_window_log_fit(&sweep);
    let profile_json: Vec<serde_json::Value> = profiles
        .iter()
        .map(|lp| {
            serde_json::json!({
                "level": lp.level,
                "p_bar": lp.p_bar,
                "d_rho": lp.d_rho,
                "p_s": lp.p_s,
                "p_compose": lp.p_compose,
                "gamma": lp.gamma,
                "degenerate": lp.degenerate,
                "vacuous": lp.vacuous,
            })
        })
        .collect();
    Ok((
        csv,
        serde_json::json!({
            "n_params": n,
            "r_concepts": r,
            "mid_window_fit": fit,
            "levels": profile_json,
        }),
    ))
}

/// Fit accuracy against log10(budget) over the 10%-90%-of-max window.
fn mid_window_log_fit(sweep: &[(f64, f64)]) -> serde_json::Value {
    let max = sweep.iter().map(|&(_, a)| a).fold(0.0f64, f64::max);
    let window: Vec<(f64, f64)> = sweep
        .iter()
        .filter(|&&(_, a)| a >= 0.1 * max && a <= 0.9 * max)
        .map(|&(b, a)| (b.log10(), a))
        .collect();
    if window.len() < 5 {
        return serde_json::json!({ "valid": false, "points": window.len() });
    }
    let n = window.len() as f64;
    let mx = window.iter().map(|p| p.0).sum::<f64>() / n;
    let my = window.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = window.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let syy: f64 = window.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let sxy: f64 = window.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let r2 = sxy * sxy / (sxx * syy);
    serde_json::json!({
        "valid": true,
        "points": window.len(),
        "slope_per_decade": slope,
        "r2": r2,
    })
}

// --- allocate ---------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AllocateParams {
    budgets: LogSweep,
    #[serde(default = "default_i_tasks")]
    i_tasks: f64,
    #[serde(default = "default_omega_f")]
    omega_step: f64,
    /// Modes: any of `unconstrained`, `chinchilla`, `fixed-omega`.
    modes: Vec<String>,
    #[serde(default = "default_kappa")]
    kappa: f64,
    fixed_omega: Option<f64>,
    #[serde(default)]
    sigmoid_slope: Option<f64>,
    #[serde(default)]
    n_count: Option<usize>,
    #[serde(default)]
    kappa_count: Option<usize>,
    #[serde(default)]
    refine_passes: Option<usize>,
    /// Moving-average window for the emitted paths (log-space, iso-compute
    /// preserving); 1 disables smoothing.
    #[serde(default = "default_smooth_window")]
    smooth_window: usize,
}

fn default_i_tasks() -> f64 {
    1e9
}

fn default_smooth_window() -> usize {
    5
}

fn allocate(env: &Envelope) -> Result<(CsvOut, serde_json::Value)> {
    let p: AllocateParams = config::params(&env.params)?;
    let loss = forecast::LossModel::chinchilla();
    let sigmoid = forecast::SigmoidMap {
        b_slope: p.sigmoid_slope.unwrap_or(5.0),
        ..forecast::SigmoidMap::slope5()
    };
    let tasks = forecast::TaskDistribution::allocation_preset();
    let mut grid = forecast::SearchGrid {
        kappa_ref: p.kappa,
        omega_ref: p.fixed_omega,
        ..forecast::SearchGrid::default()
    };
    if let Some(n) = p.n_count {
        grid.n_count = n;
    }
    if let Some(k) = p.kappa_count {
        grid.kappa_count = k;
    }
    if let Some(r) = p.refine_passes {
        grid.refine_passes = r;
    }

    let modes: Vec<forecast::ConstraintMode> = p
        .modes
        .iter()
        .map(|s| match s.as_str() {
            "unconstrained" => Ok(forecast::ConstraintMode::Unconstrained),
            "chinchilla" => Ok(forecast::ConstraintMode::Chinchilla { kappa: p.kappa }),
            "fixed-omega" => {
                let omega = p.fixed_omega.ok_or_else(|| {
                    RunError::Schema("fixed-omega mode needs `fixed_omega`".into())
                })?;
                Ok(forecast::ConstraintMode::FixedOmega { omega })
            }
            other => Err(RunError::Schema(format!("unknown mode `{other}`"))),
        })
        .collect::<Result<_>>()?;

    let mut csv = CsvOut::new(&[
        "budget", "N", "D", "omega", "kappa", "accuracy", "mode",
    ]);
    let budgets = p.budgets.values()?;
    let mut paths: std::collections::BTreeMap<String, Vec<(f64, forecast::AllocationPoint)>> =
        Default::default();
    for mode in &modes {
        let mut path = Vec::with_capacity(budgets.len());
        for &budget in &budgets {
            let point = forecast::optimize_allocation(
                budget,
                p.i_tasks,
                &loss,
                &sigmoid,
                &tasks,
                p.omega_step,
                *mode,
                &grid,
            )
            .map_err(num_err)?;
            path.push((budget, point));
        }
        let path = forecast::smooth_allocation_path(
            &path,
            p.smooth_window,
            p.i_tasks,
            &loss,
            &sigmoid,
            &tasks,
            p.omega_step,
            *mode,
        )
        .map_err(num_err)?;
        paths.insert(mode.label(), path);
    }
    for (i, &budget) in budgets.iter().enumerate() {
        for mode in &modes {
            let (_, point) = paths[&mode.label()][i];
            csv.push(vec![
                budget.into(),
                point.n_params.into(),
                point.d_tokens.into(),
                point.omega_tokens.into(),
                point.kappa.into(),
                point.accuracy.into(),
                mode.label().into(),
            ]);
        }
    }

    // Fitted exponents per mode for N, D and Ω against budget.
    let mut exponents = serde_json::Map::new();
    for (label, path) in &paths {
        let fit_of = |f: &dyn Fn(&forecast::AllocationPoint) -> f64| {
            forecast::scaling_fit(
                &path
                    .iter()
                    .map(|(b, pt)| (*b, f(pt)))
                    .collect::<Vec<_>>(),
            )
            .ok()
            .map(|fit| {
                serde_json::json!({
                    "exponent": fit.exponent,
                    "intercept": fit.intercept,
                    "r2": fit.r2,
                    "valid": fit.valid,
                })
            })
        };
        exponents.insert(
            label.clone(),
            serde_json::json!({
                "n": fit_of(&|pt| pt.n_params),
                "d": fit_of(&|pt| pt.d_tokens),
                "omega": fit_of(&|pt| pt.omega_tokens),
            }),
        );
    }
    Ok((csv, serde_json::json!({ "exponents": exponents })))
}

// --- tradeoff ---------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TradeoffParams {
    /// `two-step` or `skill-graph`.
    backend: String,
    train_compute: LogSweep,
    inf_compute: LogSweep,
    #[serde(default = "default_kappa")]
    kappa: f64,
    #[serde(default = "default_i_tasks")]
    i_tasks: f64,
    #[serde(default = "default_omega_f")]
    omega_step: f64,
    #[serde(default = "default_contour")]
    contour_level: f64,
    /// Skill-graph backend task ranges.
    #[serde(default)]
    task_levels: Option<(u32, u32)>,
    #[serde(default)]
    task_skills: Option<(u32, u32)>,
}

fn default_contour() -> f64 {
    0.5
}

fn tradeoff(env: &Envelope) -> Result<(CsvOut, serde_json::Value)> {
    let p: TradeoffParams = config::params(&env.params)?;
    let train = p.train_compute.values()?;
    let inf = p.inf_compute.values()?;

    let field = match p.backend.as_str() {
        "two-step" => {
            let loss = forecast::LossModel::chinchilla();
            let sigmoid = forecast::SigmoidMap::slope5();
            let tasks = forecast::TaskDistribution::allocation_preset();
            forecast::tradeoff_contours(
                &train,
                &inf,
                p.kappa,
                p.i_tasks,
                forecast::two_step_accuracy_backend(&loss, &sigmoid, &tasks, p.omega_step),
            )
            .map_err(num_err)?
        }
        "skill-graph" => {
            let graph = skillgraph::GraphParams::production_preset();
            let tasks = uniform_tasks(
                p.task_levels.unwrap_or((60, 70)),
                p.task_skills.unwrap_or((2, 15)),
            )?;
            let zeta = graph.zeta;
            let omega = p.omega_step;
            let mut cache: Option<(u64, Vec<skillgraph::LevelProfile>)> = None;
            forecast::tradeoff_contours(&train, &inf, p.kappa, p.i_tasks, move |n, _d, om| {
                let backend_err =
                    |e: skillgraph::SkillGraphError| forecast::ForecastError::Backend(e.to_string());
                let key = n.to_bits();
                if cache.as_ref().map(|c| c.0) != Some(key) {
                    let profiles =
                        skillgraph::level_recursion(&graph, n / zeta).map_err(backend_err)?;
                    cache = Some((key, profiles));
                }
                let profiles = &cache.as_ref().unwrap().1;
                let acc = skillgraph::expected_accuracy(
                    profiles,
                    &tasks,
                    omega,
                    om * omega,
                    graph.beta_rel,
                    graph.delta,
                )
                .map_err(backend_err)?;
                Ok(acc.accuracy)
            })
            .map_err(num_err)?
        }
        other => return Err(RunError::Schema(format!("unknown backend `{other}`"))),
    };

    let mut csv = CsvOut::new(&["train_compute", "inf_compute", "accuracy"]);
    for (i, &ct) in field.train_grid.iter().enumerate() {
        for (j, &ci) in field.inf_grid.iter().enumerate() {
            csv.push(vec![ct.into(), ci.into(), field.accuracy[i][j].into()]);
        }
    }
    let contour = field.iso_contour(p.contour_level);
    let contour_fit = if contour.len() >= 3 {
        forecast::scaling_fit(
            &contour
                .iter()
                .map(|&(x, y)| (10f64.powf(x), 10f64.powf(y)))
                .collect::<Vec<_>>(),
        )
        .ok()
        .map(|f| serde_json::json!({ "slope": f.exponent, "r2": f.r2 }))
    } else {
        None
    };
    Ok((
        csv,
        serde_json::json!({
            "contour_level": p.contour_level,
            "contour_points": contour,
            "contour_fit": contour_fit,
        }),
    ))
}

// --- passk-fit --------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PasskFitParams {
    data: PathBuf,
    #[serde(default = "default_resamples")]
    bootstrap_resamples: u32,
}

fn default_resamples() -> u32 {
    200
}

fn passk_fit(env: &Envelope) -> Result<(CsvOut, serde_json::Value)> {
    let p: PasskFitParams = config::params(&env.params)?;
    let seed = env.seed.unwrap();
    let curves = io::ingest_passk(&p.data)?;
    let mut csv = CsvOut::new(&["model", "k", "empirical", "fitted", "residual"]);
    let mut models = serde_json::Map::new();
    for curve in &curves {
        let (mix, report) = population::fit_beta_mixture(curve).map_err(num_err)?;
        for (&(k, rate), resid) in curve.samples.iter().zip(&report.residuals) {
            csv.push(vec![
                curve.model.as_str().into(),
                k.into(),
                rate.into(),
                population::bon_coverage(&mix, k).into(),
                (*resid).into(),
            ]);
        }
        let draws =
            population::bootstrap_beta_mixture(curve, &mix, p.bootstrap_resamples, seed)
                .map_err(num_err)?;
        let std_of = |f: &dyn Fn(&population::BetaMixture) -> f64| {
            let vals: Vec<f64> = draws.iter().map(f).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / vals.len() as f64)
                .sqrt()
        };
        models.insert(
            curve.model.clone(),
            serde_json::json!({
                "solvable_frac": mix.solvable_frac,
                "alpha": mix.alpha_shape,
                "beta": mix.beta_shape,
                "mse": report.mse,
                "baseline_mse": population::solvable_only_baseline_mse(curve),
                "converged": report.converged,
                "degenerate": report.degenerate,
                "bootstrap_std": {
                    "solvable_frac": std_of(&|m| m.solvable_frac),
                    "alpha": std_of(&|m| m.alpha_shape),
                    "beta": std_of(&|m| m.beta_shape),
                },
            }),
        );
    }
    Ok((csv, serde_json::json!({ "models": models })))
}

// --- mv-fit -----------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MvFitParams {
    solvable_frac: f64,
    alpha: f64,
    beta: f64,
    /// Observed majority-voting plateau.
    p_inf: f64,
    #[serde(default = "default_alphabet")]
    alphabet: usize,
    k_values: Vec<u32>,
    /// Largest k regarded as within the fitted range; larger rows are
    /// labeled extrapolated.
    k_max_fitted: Option<u32>,
    #[serde(default = "default_mc_samples")]
    mc_samples: u32,
}

fn default_mc_samples() -> u32 {
    10_000
}

fn mv_fit(env: &Envelope) -> Result<(CsvOut, serde_json::Value)> {
    let p: MvFitParams = config::params(&env.params)?;
    let seed = env.seed.unwrap();
    let mix = population::BetaMixture::new(p.solvable_frac, p.alpha, p.beta)
        .map_err(num_err)?;
    let c_star = population::c_star_from_plateau(&mix, p.p_inf).map_err(num_err)?;
    let lambda = population::lambda_from_cstar(c_star, p.alphabet).map_err(num_err)?;
    let spectrum =
        population::ErrorSpectrum::truncated_geometric(p.alphabet, lambda).map_err(num_err)?;
    let k_max_fitted = p.k_max_fitted.unwrap_or(u32::MAX);

    let mut csv = CsvOut::new(&["k", "mv_accuracy", "bon_coverage", "method", "extrapolated"]);
    for (i, &k) in p.k_values.iter().enumerate() {
        let exact_ok = crate::vote::support_size(k as u64, spectrum.weights().len())
            <= population::MV_EXACT_SUPPORT_LIMIT;
        let (mv, method) = if exact_ok {
            (
                population::mv_accuracy(&mix, &spectrum, k, population::MvEvalMethod::Exact)
                    .map_err(num_err)?,
                "exact",
            )
        } else {
            (
                population::mv_accuracy(
                    &mix,
                    &spectrum,
                    k,
                    population::MvEvalMethod::MonteCarlo {
                        samples: p.mc_samples,
                        seed: seed.wrapping_add(i as u64),
                    },
                )
                .map_err(num_err)?,
                "monte-carlo",
            )
        };
        csv.push(vec![
            k.into(),
            mv.into(),
            population::bon_coverage(&mix, k as u64).into(),
            method.into(),
            (k > k_max_fitted).into(),
        ]);
    }
    Ok((
        csv,
        serde_json::json!({
            "c_star": c_star,
            "lambda": lambda,
            "spectrum": spectrum.weights(),
            "saturation": population::mv_saturation(&mix, c_star).map_err(num_err)?,
        }),
    ))
}

// --- directionality ---------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DirectionalityParams {
    data: PathBuf,
    records: Vec<RecordParams>,
    #[serde(default)]
    sigmoid_slope: Option<f64>,
    #[serde(default)]
    population_size: Option<usize>,
    #[serde(default)]
    generations: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordParams {
    name: String,
    n_params: f64,
    d_tokens: f64,
    loss: f64,
    t_max: f64,
}

fn directionality(env: &Envelope) -> Result<(CsvOut, serde_json::Value)> {
    let p: DirectionalityParams = config::params(&env.params)?;
    let seed = env.seed.unwrap();
    let curves = io::ingest_passk(&p.data)?;
    // Records are matched to curves by model name.
    let mut records = Vec::new();
    for curve in &curves {
        let rp = p
            .records
            .iter()
            .find(|r| r.name == curve.model)
            .ok_or_else(|| {
                RunError::Schema(format!("no record for model `{}`", curve.model))
            })?;
        records.push(population::ModelRecord {
            name: rp.name.clone(),
            n_params: rp.n_params,
            d_tokens: rp.d_tokens,
            loss: rp.loss,
            t_max: rp.t_max,
        });
    }
    let sigmoid = forecast::SigmoidMap {
        b_slope: p.sigmoid_slope.unwrap_or(5.0),
        ..forecast::SigmoidMap::slope5()
    };
    // Solvable fractions come from per-curve Beta fits, as in the staged
    // pipeline: coverage fit first, directionality second.
    let mut solvable = Vec::new();
    for curve in &curves {
        let (mix, _) = population::fit_beta_mixture(curve).map_err(num_err)?;
        solvable.push(mix.solvable_frac);
    }
    let shape = population::PriorShape::two_mode_default();
    let mut opts = population::DirectionalityOptions {
        seed,
        ..Default::default()
    };
    if let Some(n) = p.population_size {
        opts.population = n;
    }
    if let Some(g) = p.generations {
        opts.generations = g;
    }
    let fit = population::fit_directionality(&curves, &records, &shape, &sigmoid, &solvable, opts)
        .map_err(num_err)?;

    let mut csv = CsvOut::new(&["model", "k", "empirical", "fitted"]);
    let modes: Vec<population::PriorMode> = shape
        .modes
        .iter()
        .zip(fit.mode_params.iter())
        .map(|(&(m, w), &(mu, sigma))| population::PriorMode {
            m,
            weight: w,
            mu,
            sigma,
        })
        .collect();
    for (j, curve) in curves.iter().enumerate() {
        let push = population::pushforward_density(
            &modes,
            fit.iota_hat[j],
            &sigmoid,
            &records[j],
            solvable[j],
        )
        .map_err(num_err)?;
        for &(k, rate) in &curve.samples {
            csv.push(vec![
                curve.model.as_str().into(),
                k.into(),
                rate.into(),
                push.coverage(k).into(),
            ]);
        }
    }
    let iota_json: serde_json::Map<String, serde_json::Value> = curves
        .iter()
        .zip(&fit.iota_hat)
        .map(|(c, &i)| (c.model.clone(), serde_json::json!(i)))
        .collect();
    Ok((
        csv,
        serde_json::json!({
            "iota_hat": iota_json,
            "mode_params": fit.mode_params,
            "solvable_frac": solvable,
            "sse": fit.sse,
        }),
    ))
}
