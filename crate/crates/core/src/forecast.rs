//! Two-step empirical forecasting and constrained compute allocation.
//!
//! Pretraining loss (irreducible error plus power-law terms in parameters
//! and data) is mapped through a sigmoid to a per-skill success probability,
//! which the CoT success law turns into task accuracy. On top of that
//! pipeline sit the allocation optimizers: maximize expected accuracy over
//! (N, D_tr, Ω) under a total-compute budget, optionally constrained to a
//! fixed data-to-parameter ratio or a pinned token budget, plus the
//! inference-compute-optimal sweeps and the training/inference tradeoff
//! contour field.

use crate::strategies;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForecastError {
    #[error("parameter outside its domain")]
    Domain,
    #[error("empty feasible set: {0}")]
    EmptyFeasibleSet(String),
    #[error("degenerate fit input: {0}")]
    DegenerateFit(String),
    #[error("strategy evaluation failed: {0}")]
    Strategy(#[from] strategies::StrategyError),
    #[error("accuracy backend failed: {0}")]
    Backend(String),
}

pub type Result<T> = std::result::Result<T, ForecastError>;

/// Pretraining loss model: E + A/N^α + B/D^β.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossModel {
    pub e_irr: f64,
    pub a_coef: f64,
    pub b_coef: f64,
    pub alpha_exp: f64,
    pub beta_exp: f64,
}

impl LossModel {
    /// The published Chinchilla fit: 1.69 + 406.4 N^-0.34 + 410.7 D^-0.28.
    pub fn chinchilla() -> Self {
        LossModel {
            e_irr: 1.69,
            a_coef: 406.4,
            b_coef: 410.7,
            alpha_exp: 0.34,
            beta_exp: 0.28,
        }
    }

    pub fn loss(&self, n: f64, d: f64) -> Result<f64> {
        if !(n > 0.0) || !(d > 0.0) {
            return Err(ForecastError::Domain);
        }
        Ok(self.e_irr + self.a_coef / n.powf(self.alpha_exp) + self.b_coef / d.powf(self.beta_exp))
    }

    /// Loss in the unbounded-data regime (the data term dropped).
    pub fn loss_infinite_data(&self, n: f64) -> Result<f64> {
        if !(n > 0.0) {
            return Err(ForecastError::Domain);
        }
        Ok(self.e_irr + self.a_coef / n.powf(self.alpha_exp))
    }
}

/// Free-function form of the loss evaluation.
pub fn pretraining_loss(model: &LossModel, n: f64, d: f64) -> Result<f64> {
    model.loss(n, d)
}

/// Loss-to-skill sigmoid: a / (1 + exp(-b (L0 - L))) + d, clamped to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SigmoidMap {
    pub a_amp: f64,
    pub b_slope: f64,
    pub d_offset: f64,
}

impl SigmoidMap {
    /// Allocation-study preset (slope 5).
    pub fn slope5() -> Self {
        SigmoidMap {
            a_amp: 1.0,
            b_slope: 5.0,
            d_offset: 0.0,
        }
    }

    /// Inference-optimal-sweep preset (slope 20).
    pub fn slope20() -> Self {
        SigmoidMap {
            a_amp: 1.0,
            b_slope: 20.0,
            d_offset: 0.0,
        }
    }

    pub fn skill_prob_from_loss(&self, loss: f64, l0: f64) -> f64 {
        let z = self.b_slope * (l0 - loss);
        let s = 1.0 / (1.0 + (-z).exp());
        (self.a_amp * s + self.d_offset).clamp(0.0, 1.0)
    }
}

/// Free-function form of the sigmoid evaluation.
pub fn skill_prob_from_loss(map: &SigmoidMap, loss: f64, l0: f64) -> f64 {
    map.skill_prob_from_loss(loss, l0)
}

/// Weighted discrete distribution over (difficulty L0, skill count m).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TaskDistribution {
    pub tasks: Vec<TaskPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TaskPoint {
    pub l0: f64,
    pub m: u32,
    pub weight: f64,
}

impl TaskDistribution {
    pub fn new(tasks: Vec<TaskPoint>) -> Result<Self> {
        if tasks.is_empty() || tasks.iter().any(|t| t.weight < 0.0 || t.m == 0) {
            return Err(ForecastError::Domain);
        }
        let sum: f64 = tasks.iter().map(|t| t.weight).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ForecastError::Domain);
        }
        Ok(TaskDistribution { tasks })
    }

    pub fn single(l0: f64, m: u32) -> Self {
        TaskDistribution {
            tasks: vec![TaskPoint { l0, m, weight: 1.0 }],
        }
    }

    /// Uniform product grid over difficulty levels and skill counts.
    pub fn uniform_grid(l0_values: &[f64], m_values: &[u32]) -> Result<Self> {
        if l0_values.is_empty() || m_values.is_empty() {
            return Err(ForecastError::Domain);
        }
        let w = 1.0 / (l0_values.len() * m_values.len()) as f64;
        let mut tasks = Vec::new();
        for &l0 in l0_values {
            for &m in m_values {
                tasks.push(TaskPoint { l0, m, weight: w });
            }
        }
        TaskDistribution::new(tasks)
    }

    /// The allocation-study preset: 8 difficulty levels over [0.1, 4.0]
    /// crossed with m = 1..=50, uniform.
    pub fn allocation_preset() -> Self {
        let l0s: Vec<f64> = (0..8).map(|i| 0.1 + i as f64 * (4.0 - 0.1) / 7.0).collect();
        let ms: Vec<u32> = (1..=50).collect();
        TaskDistribution::uniform_grid(&l0s, &ms).unwrap()
    }
}

/// Total parameter-only compute: 6 N D + 2 N I Ω.
pub fn total_compute(n: f64, d: f64, omega: f64, i_tasks: f64) -> f64 {
    6.0 * n * d + 2.0 * n * i_tasks * omega
}

/// Chinchilla-style allocation of a training budget: N = sqrt(C/(6κ)),
/// D = κN, so 6ND = C exactly.
pub fn chinchilla_pair(c_train: f64, kappa: f64) -> Result<(f64, f64)> {
    if !(c_train > 0.0) || !(kappa > 0.0) {
        return Err(ForecastError::Domain);
    }
    let n = (c_train / (6.0 * kappa)).sqrt();
    Ok((n, kappa * n))
}

/// Allocation constraint mode.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ConstraintMode {
    Unconstrained,
    Chinchilla { kappa: f64 },
    FixedOmega { omega: f64 },
}

impl ConstraintMode {
    pub fn label(&self) -> String {
        match self {
            ConstraintMode::Unconstrained => "unconstrained".into(),
            ConstraintMode::Chinchilla { .. } => "chinchilla".into(),
            ConstraintMode::FixedOmega { .. } => "fixed-omega".into(),
        }
    }
}

/// One optimized allocation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AllocationPoint {
    pub n_params: f64,
    pub d_tokens: f64,
    pub omega_tokens: f64,
    pub accuracy: f64,
    pub compute: f64,
    pub kappa: f64,
}

/// Log-spaced search specification for the allocation optimizers.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SearchGrid {
    /// Parameter-count range searched (log-spaced).
    pub n_range: (f64, f64),
    pub n_count: usize,
    /// Data-to-parameter ratio range for the unconstrained search.
    pub kappa_range: (f64, f64),
    pub kappa_count: usize,
    /// Reference ratio whose Chinchilla line is embedded in the
    /// unconstrained candidate set (so constrained feasible sets are
    /// subsets of the unconstrained one by construction).
    pub kappa_ref: f64,
    /// Reference pinned token budget likewise embedded.
    pub omega_ref: Option<f64>,
    /// Local refinement passes: after the coarse argmax, re-grid the
    /// bracket one coarse cell around the winner and search again.
    pub refine_passes: usize,
}

impl Default for SearchGrid {
    fn default() -> Self {
        SearchGrid {
            n_range: (1e7, 1e13),
            n_count: 60,
            kappa_range: (1.0, 1e4),
            kappa_count: 40,
            kappa_ref: 20.0,
            omega_ref: None,
            refine_passes: 0,
        }
    }
}

fn log_space(range: (f64, f64), count: usize) -> Vec<f64> {
    let (lo, hi) = range;
    if count <= 1 {
        return vec![lo];
    }
    let (la, lb) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (la + (lb - la) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Expected accuracy of the two-step pipeline at a concrete allocation.
pub fn expected_accuracy(
    loss_model: &LossModel,
    sigmoid: &SigmoidMap,
    tasks: &TaskDistribution,
    n: f64,
    d: f64,
    omega_tokens: f64,
    omega_step: f64,
) -> Result<f64> {
    let loss = loss_model.loss(n, d)?;
    let mut acc = 0.0;
    for t in &tasks.tasks {
        let p = sigmoid.skill_prob_from_loss(loss, t.l0);
        acc += t.weight * strategies::cot_success(p, t.m, omega_tokens / omega_step)?;
    }
    Ok(acc)
}

/// Log-odds variant of [`expected_accuracy`] for single-task objectives:
/// resolves ties that f64 saturation would otherwise create. Multi-task
/// mixtures fall back to the plain accuracy when it is representable.
fn accuracy_key(
    loss: f64,
    sigmoid: &SigmoidMap,
    tasks: &TaskDistribution,
    omega_tokens: f64,
    omega_step: f64,
) -> f64 {
    if tasks.tasks.len() == 1 {
        let t = tasks.tasks[0];
        let p = sigmoid.skill_prob_from_loss(loss, t.l0);
        return strategies::cot_success_log_odds(p, t.m, omega_tokens / omega_step)
            .unwrap_or(f64::NEG_INFINITY);
    }
    let mut acc = 0.0;
    for t in &tasks.tasks {
        let p = sigmoid.skill_prob_from_loss(loss, t.l0);
        acc += t.weight
            * strategies::cot_success(p, t.m, omega_tokens / omega_step).unwrap_or(0.0);
    }
    acc
}

/// Maximize expected accuracy subject to `total_compute <= budget` and the
/// constraint mode.
///
/// Accuracy is nondecreasing in Ω, so every candidate spends the full
/// budget: the search walks (N, D) shapes and derives Ω from the remainder.
/// The unconstrained mode's candidate set embeds the constrained modes'
/// candidate sets, making the dominance chain structural. Ties break toward
/// smaller N, then smaller D.
pub fn optimize_allocation(
    budget: f64,
    i_tasks: f64,
    loss_model: &LossModel,
    sigmoid: &SigmoidMap,
    tasks: &TaskDistribution,
    omega_step: f64,
    mode: ConstraintMode,
    grid: &SearchGrid,
) -> Result<AllocationPoint> {
    if !(budget > 0.0) || !(i_tasks > 0.0) || !(omega_step > 0.0) {
        return Err(ForecastError::Domain);
    }
    let full_ctr = (budget * 1e-8, budget * (1.0 - 1e-6));
    let mut n_range = grid.n_range;
    let mut kappa_range = grid.kappa_range;
    let mut ctr_range = full_ctr;

    let mut best: Option<(f64, AllocationPoint)> = None;
    for pass in 0..=grid.refine_passes {
        let mut candidates: Vec<(f64, f64)> = Vec::new(); // (n, d)
        let chinchilla_line =
            |kappa: f64, range: (f64, f64), out: &mut Vec<(f64, f64)>| {
                for c_tr in log_space(range, grid.n_count) {
                    if let Ok(pair) = chinchilla_pair(c_tr, kappa) {
                        out.push(pair);
                    }
                }
            };
        let fixed_omega_line = |omega: f64, range: (f64, f64), out: &mut Vec<(f64, f64)>| {
            for n in log_space(range, grid.n_count) {
                let d = (budget - 2.0 * n * i_tasks * omega) / (6.0 * n);
                if d > 0.0 {
                    out.push((n, d));
                }
            }
        };
        match mode {
            ConstraintMode::Unconstrained => {
                for n in log_space(n_range, grid.n_count) {
                    for kappa in log_space(kappa_range, grid.kappa_count) {
                        candidates.push((n, kappa * n));
                    }
                }
                // Reference constrained lines stay at full range so the
                // constrained feasible sets remain embedded on every pass.
                chinchilla_line(grid.kappa_ref, full_ctr, &mut candidates);
                if let Some(omega) = grid.omega_ref {
                    fixed_omega_line(omega, grid.n_range, &mut candidates);
                }
            }
            ConstraintMode::Chinchilla { kappa } => {
                if !(kappa > 0.0) {
                    return Err(ForecastError::Domain);
                }
                chinchilla_line(kappa, ctr_range, &mut candidates);
            }
            ConstraintMode::FixedOmega { omega } => {
                if !(omega > 0.0) {
                    return Err(ForecastError::Domain);
                }
                fixed_omega_line(omega, n_range, &mut candidates);
            }
        }

        for (n, d) in candidates {
            let train = 6.0 * n * d;
            if train >= budget {
                continue;
            }
            let omega = match mode {
                ConstraintMode::FixedOmega { omega } => omega,
                _ => (budget - train) / (2.0 * n * i_tasks),
            };
            if !(omega > 0.0) {
                continue;
            }
            let loss = loss_model.loss(n, d)?;
            let key = accuracy_key(loss, sigmoid, tasks, omega, omega_step);
            let better = match &best {
                None => true,
                Some((bk, bp)) => {
                    key > *bk
                        || (key == *bk
                            && (n < bp.n_params || (n == bp.n_params && d < bp.d_tokens)))
                }
            };
            if better {
                let accuracy =
                    expected_accuracy(loss_model, sigmoid, tasks, n, d, omega, omega_step)?;
                best = Some((
                    key,
                    AllocationPoint {
                        n_params: n,
                        d_tokens: d,
                        omega_tokens: omega,
                        accuracy,
                        compute: total_compute(n, d, omega, i_tasks),
                        kappa: d / n,
                    },
                ));
            }
        }

        // Narrow the bracket one coarse cell around the winner.
        if pass < grid.refine_passes {
            let Some((_, winner)) = &best else { break };
            let shrink = |range: (f64, f64), center: f64, count: usize| {
                let step = (range.1 / range.0).powf(1.0 / (count.max(2) - 1) as f64);
                (
                    (center / step).max(range.0),
                    (center * step).min(range.1),
                )
            };
            n_range = shrink(n_range, winner.n_params, grid.n_count);
            kappa_range = shrink(kappa_range, winner.kappa, grid.kappa_count);
            ctr_range = shrink(
                ctr_range,
                (6.0 * winner.n_params * winner.d_tokens).clamp(full_ctr.0, full_ctr.1),
                grid.n_count,
            );
        }
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| ForecastError::EmptyFeasibleSet(format!("budget {budget:.3e}")))
}

/// Moving-average smoothing of an allocation path along the budget sweep.
///
/// Averages the shape variables in log space over a centered window (edges
/// shrink), then projects each point back onto its iso-compute surface by
/// re-deriving the constrained variable (Ω for unconstrained/ratio modes,
/// D for the pinned-token mode) and re-evaluating accuracy. A window of 0
/// or 1 returns the path unchanged.
pub fn smooth_allocation_path(
    path: &[(f64, AllocationPoint)],
    window: usize,
    i_tasks: f64,
    loss_model: &LossModel,
    sigmoid: &SigmoidMap,
    tasks: &TaskDistribution,
    omega_step: f64,
    mode: ConstraintMode,
) -> Result<Vec<(f64, AllocationPoint)>> {
    if window <= 1 || path.len() < 2 {
        return Ok(path.to_vec());
    }
    let half = window / 2;
    let mut out = Vec::with_capacity(path.len());
    for i in 0..path.len() {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(path.len() - 1);
        let mean_ln = |f: &dyn Fn(&AllocationPoint) -> f64| {
            let vals: Vec<f64> = path[lo..=hi].iter().map(|(_, p)| f(p).ln()).collect();
            (vals.iter().sum::<f64>() / vals.len() as f64).exp()
        };
        let (budget, raw) = path[i];
        let n = mean_ln(&|p| p.n_params);
        let (n, d, omega) = match mode {
            ConstraintMode::FixedOmega { omega } => {
                let d = (budget - 2.0 * n * i_tasks * omega) / (6.0 * n);
                if d <= 0.0 {
                    out.push((budget, raw));
                    continue;
                }
                (n, d, omega)
            }
            ConstraintMode::Chinchilla { kappa } => {
                let d = kappa * n;
                let omega = (budget - 6.0 * n * d) / (2.0 * n * i_tasks);
                if omega <= 0.0 {
                    out.push((budget, raw));
                    continue;
                }
                (n, d, omega)
            }
            ConstraintMode::Unconstrained => {
                let kappa = mean_ln(&|p| p.kappa);
                let d = kappa * n;
                let omega = (budget - 6.0 * n * d) / (2.0 * n * i_tasks);
                if omega <= 0.0 {
                    out.push((budget, raw));
                    continue;
                }
                (n, d, omega)
            }
        };
        let accuracy = expected_accuracy(loss_model, sigmoid, tasks, n, d, omega, omega_step)?;
        out.push((
            budget,
            AllocationPoint {
                n_params: n,
                d_tokens: d,
                omega_tokens: omega,
                accuracy,
                compute: total_compute(n, d, omega, i_tasks),
                kappa: d / n,
            },
        ));
    }
    Ok(out)
}

/// Log-log least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
    /// False when R² fell below the 0.7 validity threshold.
    pub valid: bool,
}

/// R² validity threshold for scaling-law fits.
pub const FIT_R2_THRESHOLD: f64 = 0.7;

/// Fit log10(value) = exponent · log10(compute) + intercept.
pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 5 {
        return Err(ForecastError::DegenerateFit("need at least 5 points".into()));
    }
    if points.iter().any(|&(c, v)| !(c > 0.0) || !(v > 0.0)) {
        return Err(ForecastError::Domain);
    }
    let xs: Vec<f64> = points.iter().map(|&(c, _)| c.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, v)| v.log10()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 1e-24 {
        return Err(ForecastError::DegenerateFit("constant compute axis".into()));
    }
    if syy <= 1e-24 {
        return Err(ForecastError::DegenerateFit("constant value axis".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let r2 = (sxy * sxy) / (sxx * syy);
    Ok(ScalingFit {
        exponent,
        intercept,
        r2,
        valid: r2 >= FIT_R2_THRESHOLD,
    })
}

/// Optimal (N, Ω) trajectory and fits for one task under an inference-only
/// budget C_inf = 2 N I Ω in the infinite-data regime.
#[derive(Debug, Clone, serde::Serialize)]
pub struct InferenceOptimalTask {
    pub l0: f64,
    pub m: u32,
    /// (budget, N*, Ω*) per swept budget.
    pub path: Vec<(f64, f64, f64)>,
    pub n_fit: Option<ScalingFit>,
    pub omega_fit: Option<ScalingFit>,
}

/// Sweep inference-compute-optimal allocations for each task on the grid.
///
/// For each budget the (N, Ω) split maximizing single-task accuracy under
/// 2 N I Ω = C is found on a log grid in N, comparing cells on the log-odds
/// scale so the saturated region still orders meaningfully; then log-log
/// fits of N and Ω against the budget are attempted. Per-task fit failures
/// are recorded as `None`, not errors.
pub fn inference_optimal_sweep(
    task_grid: &[(f64, u32)],
    budgets: &[f64],
    loss_model: &LossModel,
    sigmoid: &SigmoidMap,
    i_tasks: f64,
    omega_step: f64,
    n_range: (f64, f64),
    n_count: usize,
) -> Result<Vec<InferenceOptimalTask>> {
    if budgets.len() < 5 {
        return Err(ForecastError::DegenerateFit("need at least 5 budgets".into()));
    }
    let n_grid = log_space(n_range, n_count);
    let mut out = Vec::with_capacity(task_grid.len());
    for &(l0, m) in task_grid {
        let dist = TaskDistribution::single(l0, m);
        let mut path = Vec::with_capacity(budgets.len());
        for &c in budgets {
            let mut best: Option<(f64, f64, f64)> = None;
            for &n in &n_grid {
                let omega = c / (2.0 * n * i_tasks);
                let loss = loss_model.loss_infinite_data(n)?;
                let key = accuracy_key(loss, sigmoid, &dist, omega, omega_step);
                if best.as_ref().map(|b| key > b.0).unwrap_or(true) {
                    best = Some((key, n, omega));
                }
            }
            let (_, n, omega) = best.unwrap();
            path.push((c, n, omega));
        }
        let n_fit = scaling_fit(&path.iter().map(|&(c, n, _)| (c, n)).collect::<Vec<_>>()).ok();
        let omega_fit =
            scaling_fit(&path.iter().map(|&(c, _, o)| (c, o)).collect::<Vec<_>>()).ok();
        out.push(InferenceOptimalTask {
            l0,
            m,
            path,
            n_fit,
            omega_fit,
        });
    }
    Ok(out)
}

/// Accuracy field over a (training compute, inference compute) grid.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TradeoffField {
    pub train_grid: Vec<f64>,
    pub inf_grid: Vec<f64>,
    /// Row-major accuracy\[i_train\]\[i_inf\].
    pub accuracy: Vec<Vec<f64>>,
}

impl TradeoffField {
    /// Extract the iso-accuracy contour at `level`: for each training
    /// budget, the log-interpolated inference compute where the level is
    /// first crossed.
    pub fn iso_contour(&self, level: f64) -> Vec<(f64, f64)> {
        let mut pts = Vec::new();
        for (i, &ct) in self.train_grid.iter().enumerate() {
            let row = &self.accuracy[i];
            for j in 1..row.len() {
                if row[j - 1] < level && row[j] >= level {
                    let x0 = self.inf_grid[j - 1].log10();
                    let x1 = self.inf_grid[j].log10();
                    let frac = (level - row[j - 1]) / (row[j] - row[j - 1]);
                    pts.push((ct.log10(), x0 + frac * (x1 - x0)));
                    break;
                }
            }
        }
        pts
    }
}

/// Evaluate accuracy over the (C_tr, C_inf) grid with N, D derived from the
/// training budget by the Chinchilla rule and Ω from the inference budget.
///
/// The accuracy backend is pluggable: the two-step pipeline here, or a
/// skill-graph pipeline supplied by the caller.
pub fn tradeoff_contours<F>(
    train_grid: &[f64],
    inf_grid: &[f64],
    kappa: f64,
    i_tasks: f64,
    mut accuracy_at: F,
) -> Result<TradeoffField>
where
    F: FnMut(f64, f64, f64) -> Result<f64>,
{
    if train_grid.is_empty() || inf_grid.is_empty() {
        return Err(ForecastError::Domain);
    }
    let mut accuracy = Vec::with_capacity(train_grid.len());
    for &c_tr in train_grid {
        let (n, d) = chinchilla_pair(c_tr, kappa)?;
        let mut row = Vec::with_capacity(inf_grid.len());
        for &c_inf in inf_grid {
            let omega = c_inf / (2.0 * n * i_tasks);
            row.push(accuracy_at(n, d, omega)?);
        }
        accuracy.push(row);
    }
    Ok(TradeoffField {
        train_grid: train_grid.to_vec(),
        inf_grid: inf_grid.to_vec(),
        accuracy,
    })
}

/// Two-step accuracy backend for [`tradeoff_contours`].
pub fn two_step_accuracy_backend<'a>(
    loss_model: &'a LossModel,
    sigmoid: &'a SigmoidMap,
    tasks: &'a TaskDistribution,
    omega_step: f64,
) -> impl FnMut(f64, f64, f64) -> Result<f64> + 'a {
    move |n, d, omega| expected_accuracy(loss_model, sigmoid, tasks, n, d, omega, omega_step)
}
