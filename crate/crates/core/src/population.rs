//! Population-level repeated-sampling analysis.
//!
//! Task success rates across a population are modeled as a point mass of
//! unsolvable tasks at ψ = 0 plus a Beta density over the solvable fraction.
//! From that prior the module derives pass@k (best-of-N with oracle
//! verifier) coverage and its power-law tail, the exact and Monte-Carlo
//! majority-voting accuracy, the large-k voting saturation level, and the
//! fitting procedures that recover mixture parameters and per-model search
//! directionality from empirical pass@k curves.

use crate::forecast::SigmoidMap;
use crate::rng::CounterRng;
use crate::specfun::{self, SpecFunError};
use crate::vote;
use rand_distr::Distribution;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PopulationError {
    #[error("parameter outside its domain")]
    Domain,
    #[error("infeasible request: {0}")]
    Infeasible(String),
    #[error("exact enumeration support too large; use Monte Carlo")]
    SupportTooLarge,
    #[error("fit failed to converge: {0}")]
    FitFailed(String),
    #[error("special function failure: {0}")]
    SpecFun(#[from] SpecFunError),
}

pub type Result<T> = std::result::Result<T, PopulationError>;

/// Beta-plus-point-mass model of per-task success rates: a fraction
/// `solvable_frac` of tasks draws ψ from Beta(alpha, beta), the rest sit at
/// ψ = 0.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BetaMixture {
    pub solvable_frac: f64,
    pub alpha_shape: f64,
    pub beta_shape: f64,
}

impl BetaMixture {
    pub fn new(solvable_frac: f64, alpha_shape: f64, beta_shape: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&solvable_frac)
            || !(alpha_shape > 0.0)
            || !(beta_shape > 0.0)
            || solvable_frac.is_nan()
        {
            return Err(PopulationError::Domain);
        }
        Ok(BetaMixture {
            solvable_frac,
            alpha_shape,
            beta_shape,
        })
    }

    /// Mean success rate 𝒜 α / (α + β).
    pub fn mean(&self) -> f64 {
        self.solvable_frac * self.alpha_shape / (self.alpha_shape + self.beta_shape)
    }
}

/// Distribution over incorrect answers: conditional weights c_j over the
/// |𝒴| - 1 incorrect ranks (the correct answer is rank 0 of an alphabet of
/// size |𝒴|).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ErrorSpectrum {
    weights: Vec<f64>,
}

impl ErrorSpectrum {
    /// Explicit weights; must be nonnegative and sum to 1 within 1e-12.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&c| c.is_nan() || c < 0.0) {
            return Err(PopulationError::Domain);
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(PopulationError::Domain);
        }
        Ok(ErrorSpectrum { weights })
    }

    /// Ordered truncated geometric: c_j ∝ (1-λ) λ^(j-1) over
    /// j = 1..=alphabet_size-1.
    pub fn truncated_geometric(alphabet_size: usize, lambda: f64) -> Result<Self> {
        if alphabet_size < 2 || !(lambda > 0.0 && lambda < 1.0) {
            return Err(PopulationError::Domain);
        }
        let n = alphabet_size - 1;
        let norm = 1.0 - lambda.powi(n as i32);
        let mut weights: Vec<f64> = (0..n)
            .map(|j| (1.0 - lambda) * lambda.powi(j as i32) / norm)
            .collect();
        let sum: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= sum;
        }
        Ok(ErrorSpectrum { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total alphabet size |𝒴| (correct answer included).
    pub fn alphabet_size(&self) -> usize {
        self.weights.len() + 1
    }

    /// Largest incorrect-answer weight c*.
    pub fn c_star(&self) -> f64 {
        self.weights.iter().cloned().fold(0.0, f64::max)
    }

    /// Sample an incorrect rank (0-based index into the weights).
    pub fn sample(&self, rng: &mut CounterRng) -> usize {
        let u = rng.uniform();
        let mut acc = 0.0;
        for (j, &c) in self.weights.iter().enumerate() {
            acc += c;
            if u < acc {
                return j;
            }
        }
        self.weights.len() - 1
    }
}

/// Empirical pass@k curve for one model.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EmpiricalCurve {
    pub model: String,
    /// (k, pass rate) with k strictly increasing.
    pub samples: Vec<(u64, f64)>,
}

impl EmpiricalCurve {
    pub fn new(model: impl Into<String>, samples: Vec<(u64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(PopulationError::Domain);
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(PopulationError::Domain);
            }
        }
        if samples
            .iter()
            .any(|&(k, r)| k == 0 || r.is_nan() || !(0.0..=1.0).contains(&r))
        {
            return Err(PopulationError::Domain);
        }
        Ok(EmpiricalCurve {
            model: model.into(),
            samples,
        })
    }
}

/// Compute/budget descriptor of one evaluated model.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelRecord {
    pub name: String,
    pub n_params: f64,
    pub d_tokens: f64,
    pub loss: f64,
    /// Effective step budget (output tokens / tokens per step).
    pub t_max: f64,
}

impl ModelRecord {
    /// Whether the recorded loss matches the loss model at (N, D) within
    /// 1e-3 absolute.
    pub fn consistent_with(&self, loss_model: &crate::forecast::LossModel) -> bool {
        loss_model
            .loss(self.n_params, self.d_tokens)
            .map(|l| (l - self.loss).abs() <= 1e-3)
            .unwrap_or(false)
    }
}

/// Pass@k coverage under the mixture: 𝒜 (1 - B(α, β+k)/B(α, β)).
pub fn bon_coverage(mix: &BetaMixture, k: u64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let (a, b) = (mix.alpha_shape, mix.beta_shape);
    let ln_ratio = specfun::log_beta(a, b + k as f64).unwrap() - specfun::log_beta(a, b).unwrap();
    mix.solvable_frac * (1.0 - ln_ratio.exp())
}

/// Large-k power-law asymptote of the coverage:
/// 𝒜 (1 - C k^(-α)) with C = Γ(α)/B(α, β).
pub fn bon_asymptote(mix: &BetaMixture, k: u64) -> f64 {
    let (a, b) = (mix.alpha_shape, mix.beta_shape);
    let ln_c = specfun::log_gamma(a).unwrap() - specfun::log_beta(a, b).unwrap();
    mix.solvable_frac * (1.0 - (ln_c - a * (k as f64).ln()).exp())
}

/// Coverage of a finite task population with explicit success rates.
pub fn bon_coverage_discrete(tasks: &[(f64, f64)], k: u64) -> f64 {
    let mut total = 0.0;
    for &(psi, w) in tasks {
        total += w * (1.0 - (1.0 - psi).powf(k as f64));
    }
    total
}

/// Large-k majority-voting accuracy 𝒜 (1 - I_rc(α, β)) with
/// r_c = c*/(1 + c*): only tasks whose success rate beats the largest
/// incorrect-answer rate keep winning the vote.
pub fn mv_saturation(mix: &BetaMixture, c_star: f64) -> Result<f64> {
    if !(c_star > 0.0) || c_star.is_nan() {
        return Err(PopulationError::Domain);
    }
    let rc = c_star / (1.0 + c_star);
    Ok(mix.solvable_frac * (1.0 - specfun::reg_inc_beta(rc, mix.alpha_shape, mix.beta_shape)?))
}

/// Invert the saturation level: the largest incorrect-answer weight
/// consistent with an observed MV plateau.
pub fn c_star_from_plateau(mix: &BetaMixture, p_inf: f64) -> Result<f64> {
    if !(p_inf > 0.0) || p_inf >= mix.solvable_frac {
        return Err(PopulationError::Infeasible(format!(
            "plateau {p_inf} must lie in (0, solvable fraction {})",
            mix.solvable_frac
        )));
    }
    let delta = 1.0 - p_inf / mix.solvable_frac;
    let rc = specfun::reg_inc_beta_inv(delta, mix.alpha_shape, mix.beta_shape)?;
    if rc >= 1.0 {
        return Err(PopulationError::Infeasible("plateau maps to r_c = 1".into()));
    }
    Ok(rc / (1.0 - rc))
}

/// Solve the truncated-geometric decay λ from the dominant weight:
/// c* = (1-λ)/(1-λ^(|𝒴|-1)).
pub fn lambda_from_cstar(c_star: f64, alphabet_size: usize) -> Result<f64> {
    if alphabet_size < 3 {
        return Err(PopulationError::Domain);
    }
    let n = (alphabet_size - 1) as i32;
    let uniform_limit = 1.0 / (alphabet_size - 1) as f64;
    if c_star <= uniform_limit {
        return Err(PopulationError::Infeasible(format!(
            "c* = {c_star} at or below the uniform limit {uniform_limit}"
        )));
    }
    if c_star >= 1.0 {
        return Err(PopulationError::Infeasible(
            "c* at or above the point-mass limit 1".into(),
        ));
    }
    let f = |lam: f64| (1.0 - lam) / (1.0 - lam.powi(n)) - c_star;
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-9);
    // f is decreasing in λ: f(lo) ≈ 1 - c* > 0, f(hi) ≈ 1/(n) - c* < 0.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// How to evaluate finite-k majority voting over the mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MvEvalMethod {
    Exact,
    MonteCarlo { samples: u32, seed: u64 },
}

/// Support limit for the exact multinomial enumeration.
pub const MV_EXACT_SUPPORT_LIMIT: f64 = 1e6;

/// Finite-k majority-voting accuracy under the Beta-plus-point-mass prior.
///
/// Exact mode integrates the plurality sum composition-by-composition
/// against the Beta kernel (each correct-count y0 contributes
/// B(α+y0, β+k-y0)/B(α, β)); Monte Carlo draws ψ from the Beta by inverse
/// CDF and simulates the votes.
pub fn mv_accuracy(
    mix: &BetaMixture,
    spectrum: &ErrorSpectrum,
    k: u32,
    method: MvEvalMethod,
) -> Result<f64> {
    if k == 0 {
        return Err(PopulationError::Domain);
    }
    match method {
        MvEvalMethod::Exact => {
            if vote::support_size(k as u64, spectrum.weights().len()) > MV_EXACT_SUPPORT_LIMIT {
                return Err(PopulationError::SupportTooLarge);
            }
            let ln_b0 = specfun::log_beta(mix.alpha_shape, mix.beta_shape)?;
            let inner = vote::plurality_sum(k, spectrum.weights(), |y0| {
                specfun::log_beta(
                    mix.alpha_shape + y0 as f64,
                    mix.beta_shape + (k - y0) as f64,
                )
                .unwrap()
                    - ln_b0
            })?;
            Ok(mix.solvable_frac * inner)
        }
        MvEvalMethod::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(PopulationError::Domain);
            }
            Ok(mix.solvable_frac * mv_monte_carlo_mixture(mix, spectrum, k, samples, seed))
        }
    }
}

/// Vote simulation for one value of ψ; returns the tie count on a win, or
/// None on a loss.
fn simulate_votes(
    psi: f64,
    spectrum: &ErrorSpectrum,
    k: u32,
    rng: &mut CounterRng,
) -> Option<u32> {
    // Correct votes, then multinomial split of the rest over the spectrum.
    let y0 = sample_binomial(k as u64, psi, rng);
    let mut remaining = k as u64 - y0;
    let mut max_inc = 0u64;
    let mut ties_at_max = 0u32;
    let mut mass_left = 1.0;
    for &c in spectrum.weights() {
        if remaining == 0 {
            break;
        }
        let p = if mass_left > 0.0 { (c / mass_left).clamp(0.0, 1.0) } else { 1.0 };
        let y = sample_binomial(remaining, p, rng);
        remaining -= y;
        mass_left -= c;
        if y > max_inc {
            max_inc = y;
            ties_at_max = 1;
        } else if y == max_inc && y > 0 {
            ties_at_max += 1;
        }
    }
    if y0 > max_inc {
        Some(0)
    } else if y0 == max_inc && y0 > 0 {
        Some(ties_at_max)
    } else {
        None
    }
}

fn sample_binomial(n: u64, p: f64, rng: &mut CounterRng) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    rand_distr::Binomial::new(n, p).unwrap().sample(rng)
}

/// Monte-Carlo MV success conditional on solvable tasks (the 𝒜 prefactor is
/// applied by the caller). Tie credits are accumulated as an exact integer
/// histogram so parallel merging stays deterministic.
fn mv_monte_carlo_mixture(
    mix: &BetaMixture,
    spectrum: &ErrorSpectrum,
    k: u32,
    samples: u32,
    seed: u64,
) -> f64 {
    use rayon::prelude::*;
    let hist = (0..samples as u64)
        .into_par_iter()
        .fold(
            || vec![0u64; spectrum.alphabet_size() + 1],
            |mut h, i| {
                let mut rng = CounterRng::new(seed, i);
                let u = rng.uniform();
                let psi =
                    specfun::reg_inc_beta_inv(u, mix.alpha_shape, mix.beta_shape).unwrap_or(0.0);
                if let Some(ties) = simulate_votes(psi, spectrum, k, &mut rng) {
                    h[ties as usize] += 1;
                }
                h
            },
        )
        .reduce(
            || vec![0u64; spectrum.alphabet_size() + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let mut total = 0.0;
    for (ties, &count) in hist.iter().enumerate() {
        total += count as f64 / (1.0 + ties as f64);
    }
    total / samples as f64
}

/// Monte-Carlo MV at a fixed per-trace success rate (degenerate point prior).
pub(crate) fn mv_monte_carlo_fixed(
    psi: f64,
    spectrum: &ErrorSpectrum,
    k: u32,
    samples: u32,
    seed: u64,
) -> f64 {
    use rayon::prelude::*;
    let hist = (0..samples as u64)
        .into_par_iter()
        .fold(
            || vec![0u64; spectrum.alphabet_size() + 1],
            |mut h, i| {
                let mut rng = CounterRng::new(seed, i);
                if let Some(ties) = simulate_votes(psi, spectrum, k, &mut rng) {
                    h[ties as usize] += 1;
                }
                h
            },
        )
        .reduce(
            || vec![0u64; spectrum.alphabet_size() + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let mut total = 0.0;
    for (ties, &count) in hist.iter().enumerate() {
        total += count as f64 / (1.0 + ties as f64);
    }
    total / samples as f64
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

/// Residual diagnostics of a curve fit.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FitReport {
    pub residuals: Vec<f64>,
    pub mse: f64,
    pub converged: bool,
    /// Set when the curve is (numerically) all-zero and the solvable
    /// fraction collapsed toward zero.
    pub degenerate: bool,
}

fn beta_mixture_from_theta(theta: &[f64]) -> BetaMixture {
    BetaMixture {
        solvable_frac: 1.0 / (1.0 + (-theta[2]).exp()),
        alpha_shape: theta[0].exp().clamp(1e-6, 1e6),
        beta_shape: theta[1].exp().clamp(1e-6, 1e6),
    }
}

fn beta_mixture_mse(curve: &EmpiricalCurve, mix: &BetaMixture) -> f64 {
    let mut sse = 0.0;
    for &(k, rate) in &curve.samples {
        let d = bon_coverage(mix, k) - rate;
        sse += d * d;
    }
    sse / curve.samples.len() as f64
}

/// Least-squares fit of the coverage law to an empirical pass@k curve.
///
/// Multi-start Nelder-Mead over (ln α, ln β, logit 𝒜) with bounds enforced
/// by the transform; uniform per-point MSE objective.
pub fn fit_beta_mixture(curve: &EmpiricalCurve) -> Result<(BetaMixture, FitReport)> {
    if curve.samples.len() < 4 {
        return Err(PopulationError::Infeasible(
            "need at least 4 pass@k points".into(),
        ));
    }
    let max_rate = curve
        .samples
        .iter()
        .map(|&(_, r)| r)
        .fold(0.0f64, f64::max);
    if max_rate <= 0.0 {
        // All-zero curve: solvable fraction collapses.
        let mix = BetaMixture::new(0.0, 1.0, 1.0)?;
        let residuals = curve.samples.iter().map(|_| 0.0).collect();
        return Ok((
            mix,
            FitReport {
                residuals,
                mse: 0.0,
                converged: true,
                degenerate: true,
            },
        ));
    }

    let logit = |p: f64| (p / (1.0 - p)).ln();
    let mut starts = Vec::new();
    for &a0 in &[0.3f64, 1.0, 3.0] {
        for &b0 in &[1.0f64, 4.0] {
            for &frac in &[max_rate.clamp(0.05, 0.99), 0.97] {
                starts.push(vec![a0.ln(), b0.ln(), logit(frac)]);
            }
        }
    }

    let objective = |theta: &[f64]| beta_mixture_mse(curve, &beta_mixture_from_theta(theta));
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for start in starts {
        let (theta, value, converged) = optim::nelder_mead(&objective, &start, 0.4, 800, 1e-14);
        if best.as_ref().map(|b| value < b.1).unwrap_or(true) {
            best = Some((theta, value, converged));
        }
    }
    let (theta, mse, converged) = best.unwrap();
    let mix = beta_mixture_from_theta(&theta);
    let residuals = curve
        .samples
        .iter()
        .map(|&(k, rate)| bon_coverage(&mix, k) - rate)
        .collect();
    Ok((
        mix,
        FitReport {
            residuals,
            mse,
            converged,
            degenerate: false,
        },
    ))
}

/// MSE of the best single-parameter (solvable-fraction only) coverage model
/// 𝒜 (1 - ... ) degenerate baseline: pass@k = 𝒜 for all k, with 𝒜 chosen
/// by least squares. Used to show the Beta fit earns its two extra degrees
/// of freedom.
pub fn solvable_only_baseline_mse(curve: &EmpiricalCurve) -> f64 {
    let mean: f64 =
        curve.samples.iter().map(|&(_, r)| r).sum::<f64>() / curve.samples.len() as f64;
    curve
        .samples
        .iter()
        .map(|&(_, r)| (r - mean) * (r - mean))
        .sum::<f64>()
        / curve.samples.len() as f64
}

/// Residual bootstrap around a fitted mixture: resample residuals with
/// replacement, refit, and return the resampled parameter draws.
pub fn bootstrap_beta_mixture(
    curve: &EmpiricalCurve,
    fit: &BetaMixture,
    resamples: u32,
    seed: u64,
) -> Result<Vec<BetaMixture>> {
    let fitted: Vec<f64> = curve
        .samples
        .iter()
        .map(|&(k, _)| bon_coverage(fit, k))
        .collect();
    let residuals: Vec<f64> = curve
        .samples
        .iter()
        .zip(&fitted)
        .map(|(&(_, r), &f)| r - f)
        .collect();
    let mut out = Vec::with_capacity(resamples as usize);
    for i in 0..resamples {
        let mut rng = CounterRng::new(seed, i as u64);
        let samples: Vec<(u64, f64)> = curve
            .samples
            .iter()
            .zip(&fitted)
            .map(|(&(k, _), &f)| {
                let r = residuals[rng.below(residuals.len() as u64) as usize];
                (k, (f + r).clamp(0.0, 1.0))
            })
            .collect();
        let resampled = EmpiricalCurve {
            model: curve.model.clone(),
            samples,
        };
        let (mix, _) = fit_beta_mixture(&resampled)?;
        out.push(mix);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Pushforward of a task prior through the two-step success map
// ---------------------------------------------------------------------------

/// One mode of the task prior: m required skills with Gaussian difficulty.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PriorMode {
    pub m: u32,
    pub weight: f64,
    pub mu: f64,
    pub sigma: f64,
}

/// Pushforward density over per-task success rates induced by mapping the
/// difficulty prior through sigmoid skill probability and the CoT success
/// law at the model's step budget.
#[derive(Debug, Clone)]
pub struct Pushforward {
    modes: Vec<PriorMode>,
    iota_hat: f64,
    sigmoid: SigmoidMap,
    loss: f64,
    t_max: f64,
    solvable_frac: f64,
    /// Total point mass at ψ = 0: the unsolvable fraction plus any prior
    /// mode whose skill count exceeds the step budget.
    spike_mass: f64,
}

impl Pushforward {
    pub fn spike_mass(&self) -> f64 {
        self.spike_mass
    }

    pub(crate) fn psi_of_l0(&self, mode: &PriorMode, l0: f64) -> f64 {
        let p = self.sigmoid.skill_prob_from_loss(self.loss, l0);
        let u = (self.iota_hat * p).clamp(0.0, 1.0);
        crate::strategies::cot_success(u, mode.m, self.t_max).unwrap_or(0.0)
    }

    /// Continuous density at ψ (the spike at 0 is reported separately).
    pub fn density(&self, psi: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&psi) || psi == 0.0 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for mode in &self.modes {
            if (mode.m as f64) > self.t_max {
                continue;
            }
            let mf = mode.m as f64;
            let n2 = self.t_max - mf + 1.0;
            // Invert ψ -> u -> p -> L0 along the monotone chain.
            let u = specfun::reg_inc_beta_inv(psi, mf, n2)?;
            let p = u / self.iota_hat;
            let s = (p - self.sigmoid.d_offset) / self.sigmoid.a_amp;
            if !(s > 0.0 && s < 1.0) {
                continue;
            }
            let l0 = self.loss + (s / (1.0 - s)).ln() / self.sigmoid.b_slope;
            // Jacobian dψ/dL0 = ι̂ a b s(1-s) · u^(m-1)(1-u)^(n-1)/B(m, n).
            let ln_pdf_u = (mf - 1.0) * u.ln() + (n2 - 1.0) * (1.0 - u).ln()
                - specfun::log_beta(mf, n2)?;
            let dpsi_dl0 = self.iota_hat
                * self.sigmoid.a_amp
                * self.sigmoid.b_slope
                * s
                * (1.0 - s)
                * ln_pdf_u.exp();
            if dpsi_dl0 <= 0.0 || !dpsi_dl0.is_finite() {
                continue;
            }
            let z = (l0 - mode.mu) / mode.sigma;
            let gauss = (-0.5 * z * z).exp() / (mode.sigma * (2.0 * std::f64::consts::PI).sqrt());
            total += self.solvable_frac * mode.weight * gauss / dpsi_dl0;
        }
        Ok(total)
    }

    /// E[(1-ψ)^k] over the full mixture (spike included), by quadrature in
    /// difficulty space.
    pub fn failure_moment(&self, k: f64) -> f64 {
        let mut total = self.spike_mass;
        for mode in &self.modes {
            if (mode.m as f64) > self.t_max {
                continue;
            }
            total += self.solvable_frac
                * mode.weight
                * gauss_expect(mode.mu, mode.sigma, |l0| {
                    (1.0 - self.psi_of_l0(mode, l0)).powf(k)
                });
        }
        total
    }

    /// Pass@k coverage implied by the pushforward.
    pub fn coverage(&self, k: u64) -> f64 {
        1.0 - self.failure_moment(k as f64)
    }
}

/// Expectation of f under N(mu, sigma²) by composite Simpson over ±8σ.
fn gauss_expect<F: Fn(f64) -> f64>(mu: f64, sigma: f64, f: F) -> f64 {
    const HALF_WIDTH: f64 = 8.0;
    const STEPS: usize = 160; // even
    let a = mu - HALF_WIDTH * sigma;
    let h = 2.0 * HALF_WIDTH * sigma / STEPS as f64;
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let g = |l0: f64| {
        let z = (l0 - mu) / sigma;
        norm * (-0.5 * z * z).exp() * f(l0)
    };
    let mut sum = g(a) + g(a + 2.0 * HALF_WIDTH * sigma);
    for i in 1..STEPS {
        let x = a + i as f64 * h;
        sum += g(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

/// Build the pushforward density for one model.
///
/// Requires the success map to be strictly monotone in difficulty: positive
/// sigmoid amplitude and slope, directionality in (0, 1], and the induced
/// per-step probability inside [0, 1].
pub fn pushforward_density(
    prior: &[PriorMode],
    iota_hat: f64,
    sigmoid: &SigmoidMap,
    record: &ModelRecord,
    solvable_frac: f64,
) -> Result<Pushforward> {
    if prior.is_empty() || !(iota_hat > 0.0 && iota_hat <= 1.0) {
        return Err(PopulationError::Domain);
    }
    let wsum: f64 = prior.iter().map(|m| m.weight).sum();
    if (wsum - 1.0).abs() > 1e-9 || prior.iter().any(|m| m.weight < 0.0 || m.sigma <= 0.0) {
        return Err(PopulationError::Domain);
    }
    if !(sigmoid.a_amp > 0.0) || !(sigmoid.b_slope > 0.0) {
        return Err(PopulationError::Infeasible(
            "success map must be strictly monotone in difficulty".into(),
        ));
    }
    if iota_hat * (sigmoid.a_amp + sigmoid.d_offset) > 1.0 + 1e-12 {
        return Err(PopulationError::Domain);
    }
    if !(0.0..=1.0).contains(&solvable_frac) {
        return Err(PopulationError::Domain);
    }
    let feasible_weight: f64 = prior
        .iter()
        .filter(|m| (m.m as f64) <= record.t_max)
        .map(|m| m.weight)
        .sum();
    let infeasible_weight = 1.0 - feasible_weight;
    Ok(Pushforward {
        modes: prior.to_vec(),
        iota_hat,
        sigmoid: *sigmoid,
        loss: record.loss,
        t_max: record.t_max,
        solvable_frac,
        spike_mass: (1.0 - solvable_frac) + solvable_frac * infeasible_weight,
    })
}

// ---------------------------------------------------------------------------
// Directionality fitting
// ---------------------------------------------------------------------------

/// Shape of the two-mode task prior used in directionality estimation: the
/// skill counts and weights are fixed, the Gaussian difficulty parameters
/// are fitted.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct PriorShape {
    /// (m, weight) per mode; weights must sum to 1.
    pub modes: Vec<(u32, f64)>,
}

impl PriorShape {
    /// The canonical two-mode shape: 93% single-skill tasks, 7% hundred-skill
    /// tasks.
    pub fn two_mode_default() -> Self {
        PriorShape {
            modes: vec![(1, 0.93), (100, 0.07)],
        }
    }
}

/// Differential-evolution options for the directionality fit.
#[derive(Debug, Clone, Copy)]
pub struct DirectionalityOptions {
    pub seed: u64,
    pub population: usize,
    pub generations: usize,
}

impl Default for DirectionalityOptions {
    fn default() -> Self {
        DirectionalityOptions {
            seed: 0,
            population: 48,
            generations: 260,
        }
    }
}

/// Result of the joint prior + per-model directionality fit.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DirectionalityFit {
    /// Fitted (mu, sigma) per prior mode, in mode order.
    pub mode_params: Vec<(f64, f64)>,
    /// Fitted directionality per model, in input order.
    pub iota_hat: Vec<f64>,
    /// Final sum of squared errors across all curves.
    pub sse: f64,
    /// Best objective value per generation (likelihood trace).
    pub trace: Vec<f64>,
}

/// Quadrature-node success rates for one model under one parameter vector,
/// so coverage at every k is a cheap power sum.
struct CoverageNodes {
    spike: f64,
    /// (quadrature weight x prior weight x solvable fraction, ψ at node).
    nodes: Vec<(f64, f64)>,
}

impl CoverageNodes {
    fn build(
        modes: &[PriorMode],
        iota_hat: f64,
        sigmoid: &SigmoidMap,
        record: &ModelRecord,
        solvable_frac: f64,
    ) -> Option<Self> {
        let push = pushforward_density(modes, iota_hat, sigmoid, record, solvable_frac).ok()?;
        const HALF_WIDTH: f64 = 8.0;
        const STEPS: usize = 160;
        let mut nodes = Vec::new();
        for mode in modes {
            if (mode.m as f64) > record.t_max {
                continue;
            }
            let a = mode.mu - HALF_WIDTH * mode.sigma;
            let h = 2.0 * HALF_WIDTH * mode.sigma / STEPS as f64;
            let norm = 1.0 / (mode.sigma * (2.0 * std::f64::consts::PI).sqrt());
            for i in 0..=STEPS {
                let l0 = a + i as f64 * h;
                let z = (l0 - mode.mu) / mode.sigma;
                let simpson = if i == 0 || i == STEPS {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let w = solvable_frac
                    * mode.weight
                    * simpson
                    * norm
                    * (-0.5 * z * z).exp()
                    * h
                    / 3.0;
                nodes.push((w, push.psi_of_l0(mode, l0)));
            }
        }
        Some(CoverageNodes {
            spike: push.spike_mass(),
            nodes,
        })
    }

    fn coverage(&self, k: f64) -> f64 {
        let mut fail = self.spike;
        for &(w, psi) in &self.nodes {
            fail += w * (1.0 - psi).powf(k);
        }
        1.0 - fail
    }
}

/// Jointly fit the prior's Gaussian difficulty parameters and one
/// directionality coefficient per model to the observed pass@k curves by
/// seeded differential evolution (Gaussian-residual maximum likelihood, i.e.
/// least squares).
pub fn fit_directionality(
    curves: &[EmpiricalCurve],
    records: &[ModelRecord],
    prior_shape: &PriorShape,
    sigmoid: &SigmoidMap,
    solvable_frac: &[f64],
    opts: DirectionalityOptions,
) -> Result<DirectionalityFit> {
    if curves.len() < 2 || curves.len() != records.len() || curves.len() != solvable_frac.len() {
        return Err(PopulationError::Infeasible(
            "need at least two models with matching records".into(),
        ));
    }
    let wsum: f64 = prior_shape.modes.iter().map(|&(_, w)| w).sum();
    if (wsum - 1.0).abs() > 1e-9 {
        return Err(PopulationError::Domain);
    }
    let n_modes = prior_shape.modes.len();
    let n_models = curves.len();
    // θ = [mu_1, sigma_1, ..., mu_M, sigma_M, iota_1, ..., iota_J]
    let mut bounds = Vec::new();
    for _ in 0..n_modes {
        bounds.push((-1.0, 6.0)); // mu
        bounds.push((0.02, 3.0)); // sigma
    }
    for _ in 0..n_models {
        bounds.push((1e-3, 1.0)); // iota
    }

    let objective = |theta: &[f64]| -> f64 {
        let modes: Vec<PriorMode> = prior_shape
            .modes
            .iter()
            .enumerate()
            .map(|(i, &(m, w))| PriorMode {
                m,
                weight: w,
                mu: theta[2 * i],
                sigma: theta[2 * i + 1],
            })
            .collect();
        let mut sse = 0.0;
        for (j, curve) in curves.iter().enumerate() {
            let iota = theta[2 * n_modes + j];
            let Some(nodes) =
                CoverageNodes::build(&modes, iota, sigmoid, &records[j], solvable_frac[j])
            else {
                return f64::INFINITY;
            };
            for &(k, rate) in &curve.samples {
                let d = nodes.coverage(k as f64) - rate;
                sse += d * d;
            }
        }
        sse
    };

    let (theta, sse, trace) = optim::differential_evolution(
        &objective,
        &bounds,
        opts.population,
        opts.generations,
        opts.seed,
    );
    Ok(DirectionalityFit {
        mode_params: (0..n_modes)
            .map(|i| (theta[2 * i], theta[2 * i + 1]))
            .collect(),
        iota_hat: (0..n_models).map(|j| theta[2 * n_modes + j]).collect(),
        sse,
        trace,
    })
}

// ---------------------------------------------------------------------------
// Local optimizers
// ---------------------------------------------------------------------------

pub(crate) mod optim {
    use crate::rng::CounterRng;

    /// Plain Nelder-Mead with a diagonal initial simplex.
    /// Returns (best point, best value, converged flag).
    pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
        f: &F,
        start: &[f64],
        scale: f64,
        max_iter: usize,
        tol: f64,
    ) -> (Vec<f64>, f64, bool) {
        let n = start.len();
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((start.to_vec(), f(start)));
        for i in 0..n {
            let mut p = start.to_vec();
            p[i] += scale;
            let v = f(&p);
            simplex.push((p, v));
        }
        let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
        let mut converged = false;
        for _ in 0..max_iter {
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            if (simplex[n].1 - simplex[0].1).abs() <= tol * (1.0 + simplex[0].1.abs()) {
                converged = true;
                break;
            }
            let centroid: Vec<f64> = (0..n)
                .map(|d| simplex[..n].iter().map(|(p, _)| p[d]).sum::<f64>() / n as f64)
                .collect();
            let worst = simplex[n].clone();
            let refl: Vec<f64> = (0..n)
                .map(|d| centroid[d] + alpha * (centroid[d] - worst.0[d]))
                .collect();
            let f_refl = f(&refl);
            if f_refl < simplex[0].1 {
                let exp: Vec<f64> = (0..n)
                    .map(|d| centroid[d] + gamma * (refl[d] - centroid[d]))
                    .collect();
                let f_exp = f(&exp);
                simplex[n] = if f_exp < f_refl { (exp, f_exp) } else { (refl, f_refl) };
            } else if f_refl < simplex[n - 1].1 {
                simplex[n] = (refl, f_refl);
            } else {
                let contr: Vec<f64> = (0..n)
                    .map(|d| centroid[d] + rho * (worst.0[d] - centroid[d]))
                    .collect();
                let f_contr = f(&contr);
                if f_contr < worst.1 {
                    simplex[n] = (contr, f_contr);
                } else {
                    let best = simplex[0].0.clone();
                    for item in simplex.iter_mut().skip(1) {
                        for (coord, &anchor) in item.0.iter_mut().zip(&best) {
                            *coord = anchor + sigma * (*coord - anchor);
                        }
                        item.1 = f(&item.0);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        (simplex[0].0.clone(), simplex[0].1, converged)
    }

    /// Seeded rand/1/bin differential evolution with reflection at bounds.
    /// Returns (best point, best value, per-generation best trace).
    pub fn differential_evolution<F: Fn(&[f64]) -> f64>(
        f: &F,
        bounds: &[(f64, f64)],
        population: usize,
        generations: usize,
        seed: u64,
    ) -> (Vec<f64>, f64, Vec<f64>) {
        let dim = bounds.len();
        let np = population.max(4 + dim);
        let mut rng = CounterRng::new(seed, 0);
        let mut pop: Vec<Vec<f64>> = (0..np)
            .map(|_| {
                bounds
                    .iter()
                    .map(|&(lo, hi)| lo + (hi - lo) * rng.uniform())
                    .collect()
            })
            .collect();
        let mut vals: Vec<f64> = pop.iter().map(|p| f(p)).collect();
        let (fw, cr) = (0.7, 0.9);
        let mut trace = Vec::with_capacity(generations);
        for _ in 0..generations {
            for i in 0..np {
                let mut pick = || rng.below(np as u64) as usize;
                let (mut a, mut b, mut c) = (pick(), pick(), pick());
                while a == i {
                    a = pick();
                }
                while b == i || b == a {
                    b = pick();
                }
                while c == i || c == a || c == b {
                    c = pick();
                }
                let j_rand = rng.below(dim as u64) as usize;
                let mut trial = pop[i].clone();
                for d in 0..dim {
                    if d == j_rand || rng.uniform() < cr {
                        let mut v = pop[a][d] + fw * (pop[b][d] - pop[c][d]);
                        let (lo, hi) = bounds[d];
                        if v < lo {
                            v = lo + (lo - v).min(hi - lo);
                        }
                        if v > hi {
                            v = hi - (v - hi).min(hi - lo);
                        }
                        trial[d] = v.clamp(lo, hi);
                    }
                }
                let tv = f(&trial);
                if tv <= vals[i] {
                    pop[i] = trial;
                    vals[i] = tv;
                }
            }
            let best = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            trace.push(best);
        }
        let (bi, bv) = vals
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, &v)| (i, v))
            .unwrap();
        (pop[bi].clone(), bv, trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::SigmoidMap;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn coverage_values() {
        let uniform = BetaMixture::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(bon_coverage(&uniform, 0), 0.0);
        close(bon_coverage(&uniform, 3), 0.75, 1e-12);
        close(bon_coverage(&uniform, 1_000_000), 1.0, 1e-5);
        let half = BetaMixture::new(0.5, 1.0, 1.0).unwrap();
        close(bon_coverage(&half, 3), 0.375, 1e-12);
    }

    #[test]
    fn coverage_strictly_increasing() {
        let mix = BetaMixture::new(0.9, 0.4, 3.0).unwrap();
        let mut prev = 0.0;
        for k in [1u64, 2, 4, 8, 64, 1024, 65536] {
            let c = bon_coverage(&mix, k);
            assert!(c > prev);
            prev = c;
        }
        assert!(prev < 0.9);
    }

    #[test]
    fn asymptote_matches_uniform_closed_form() {
        // α = β = 1: C = 1, failure ≈ 1/k vs exact 1/(k+1).
        let uniform = BetaMixture::new(1.0, 1.0, 1.0).unwrap();
        for k in [100u64, 1000] {
            let exact_fail = 1.0 - bon_coverage(&uniform, k);
            let asym_fail = 1.0 - bon_asymptote(&uniform, k);
            close(exact_fail, 1.0 / (k as f64 + 1.0), 1e-12);
            close(asym_fail, 1.0 / k as f64, 1e-12);
        }
    }

    #[test]
    fn two_task_sanity_model() {
        let tasks = [(0.7, 0.5), (0.2, 0.5)];
        for k in [1u64, 2, 8] {
            let expect =
                1.0 - 0.5 * (0.3f64).powf(k as f64) - 0.5 * (0.8f64).powf(k as f64);
            close(bon_coverage_discrete(&tasks, k), expect, 1e-12);
        }
    }

    #[test]
    fn spectrum_construction() {
        assert!(ErrorSpectrum::from_weights(vec![0.5, 0.4]).is_err());
        let geo = ErrorSpectrum::truncated_geometric(10, 0.5).unwrap();
        assert_eq!(geo.alphabet_size(), 10);
        close(geo.c_star(), 0.5 / (1.0 - 0.5f64.powi(9)), 1e-12);
        close(geo.weights().iter().sum::<f64>(), 1.0, 1e-15);
    }

    #[test]
    fn mv_saturation_values() {
        let uniform = BetaMixture::new(1.0, 1.0, 1.0).unwrap();
        // c* = 0.25 -> r_c = 0.2 -> P∞ = 0.8 under the uniform Beta.
        close(mv_saturation(&uniform, 0.25).unwrap(), 0.8, 1e-12);
        close(mv_saturation(&uniform, 1e-12).unwrap(), 1.0, 1e-9);
        assert!(mv_saturation(&uniform, 1e12).unwrap() < 1e-9);
    }

    #[test]
    fn c_star_round_trip() {
        let mix = BetaMixture::new(0.9, 2.0, 3.0).unwrap();
        for &c in &[0.2f64, 0.5, 1.5] {
            let p_inf = mv_saturation(&mix, c).unwrap();
            let back = c_star_from_plateau(&mix, p_inf).unwrap();
            close(mv_saturation(&mix, back).unwrap(), p_inf, 1e-9);
            close(back, c, 1e-6);
        }
        assert!(c_star_from_plateau(&mix, 0.95).is_err());
    }

    #[test]
    fn lambda_round_trip() {
        // λ = 0.5, |𝒴| = 10 gives c* ≈ 0.50098; inversion recovers λ.
        let c = 0.5 / (1.0 - 0.5f64.powi(9));
        close(c, 0.5009784735812133, 1e-12);
        let lam = lambda_from_cstar(c, 10).unwrap();
        close(lam, 0.5, 1e-9);
        assert!(lambda_from_cstar(0.05, 10).is_err());
        assert!(lambda_from_cstar(1.2, 10).is_err());
    }

    #[test]
    fn mv_accuracy_k1_is_mean() {
        let mix = BetaMixture::new(0.8, 2.0, 5.0).unwrap();
        let spec = ErrorSpectrum::truncated_geometric(4, 0.6).unwrap();
        let v = mv_accuracy(&mix, &spec, 1, MvEvalMethod::Exact).unwrap();
        close(v, mix.mean(), 1e-12);
    }

    #[test]
    fn mv_exact_matches_quadrature_brute_force() {
        // Integrate the fixed-ψ plurality success against the Beta by
        // Simpson quadrature and compare with the closed-form enumeration.
        let mix = BetaMixture::new(1.0, 1.7, 2.4).unwrap();
        let spec = ErrorSpectrum::from_weights(vec![0.6, 0.3, 0.1]).unwrap();
        for k in [2u32, 4, 6] {
            let exact = mv_accuracy(&mix, &spec, k, MvEvalMethod::Exact).unwrap();
            let n = 4000;
            let mut sum = 0.0;
            for i in 0..=n {
                let x = i as f64 / n as f64;
                let x = x.clamp(1e-9, 1.0 - 1e-9);
                let pdf = ((mix.alpha_shape - 1.0) * x.ln()
                    + (mix.beta_shape - 1.0) * (1.0 - x).ln()
                    - crate::specfun::log_beta(mix.alpha_shape, mix.beta_shape).unwrap())
                .exp();
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                sum += w * pdf * crate::vote::plurality_success_fixed(x, spec.weights(), k).unwrap();
            }
            let quad = sum / (3.0 * n as f64);
            close(exact, quad, 1e-5);
        }
    }

    #[test]
    fn mv_monte_carlo_agrees_with_exact() {
        let mix = BetaMixture::new(0.9, 2.0, 3.0).unwrap();
        let spec = ErrorSpectrum::truncated_geometric(10, 0.6).unwrap();
        let exact = mv_accuracy(&mix, &spec, 5, MvEvalMethod::Exact).unwrap();
        let mc = mv_accuracy(
            &mix,
            &spec,
            5,
            MvEvalMethod::MonteCarlo {
                samples: 200_000,
                seed: 9,
            },
        )
        .unwrap();
        close(mc, exact, 0.005);
    }

    #[test]
    fn mv_below_bon_everywhere_tested() {
        let mix = BetaMixture::new(0.85, 1.2, 2.0).unwrap();
        let spec = ErrorSpectrum::truncated_geometric(6, 0.5).unwrap();
        for k in [1u32, 2, 3, 5, 8] {
            let mv = mv_accuracy(&mix, &spec, k, MvEvalMethod::Exact).unwrap();
            let bon = bon_coverage(&mix, k as u64);
            assert!(mv <= bon + 1e-12, "k={k}: mv={mv} bon={bon}");
        }
    }

    #[test]
    fn binary_mv_saturation_splits_at_half() {
        // Binary alphabet: c* = 1, r_c = 1/2. Mass above 1/2 converges to
        // (nearly) the solvable fraction; symmetric mass saturates at half.
        let spec = ErrorSpectrum::from_weights(vec![1.0]).unwrap();
        let high = BetaMixture::new(0.9, 8.0, 2.0).unwrap();
        let sat_high = mv_saturation(&high, spec.c_star()).unwrap();
        assert!(sat_high > 0.9 * 0.97, "sat {sat_high}");
        let split = BetaMixture::new(0.9, 3.0, 3.0).unwrap();
        let sat_split = mv_saturation(&split, spec.c_star()).unwrap();
        close(sat_split, 0.45, 1e-12);
        // Finite-k Monte Carlo approaches the saturation level.
        let mc = mv_accuracy(
            &split,
            &spec,
            4001,
            MvEvalMethod::MonteCarlo {
                samples: 60_000,
                seed: 3,
            },
        )
        .unwrap();
        assert!((mc - sat_split).abs() < 0.02, "{mc} vs {sat_split}");
    }

    #[test]
    fn solvable_frac_scales_coverage_linearly() {
        let full = BetaMixture::new(1.0, 0.7, 2.0).unwrap();
        let scaled = BetaMixture::new(0.6, 0.7, 2.0).unwrap();
        for k in [1u64, 4, 64, 1024] {
            close(
                bon_coverage(&scaled, k),
                0.6 * bon_coverage(&full, k),
                1e-12,
            );
        }
    }

    #[test]
    fn mv_support_guard() {
        let mix = BetaMixture::new(0.9, 2.0, 3.0).unwrap();
        let spec = ErrorSpectrum::truncated_geometric(10, 0.6).unwrap();
        assert!(matches!(
            mv_accuracy(&mix, &spec, 2000, MvEvalMethod::Exact),
            Err(PopulationError::SupportTooLarge)
        ));
    }

    #[test]
    fn beta_fit_round_trip() {
        let truth = BetaMixture::new(0.96, 0.4, 3.0).unwrap();
        let ks: Vec<u64> = (0..11).map(|i| 1u64 << i).collect();
        let curve = EmpiricalCurve::new(
            "synthetic",
            ks.iter().map(|&k| (k, bon_coverage(&truth, k))).collect(),
        )
        .unwrap();
        let (fit, report) = fit_beta_mixture(&curve).unwrap();
        assert!(report.mse < 1e-10, "mse {}", report.mse);
        assert!(
            (fit.solvable_frac / truth.solvable_frac - 1.0).abs() < 0.01,
            "A {}",
            fit.solvable_frac
        );
        assert!((fit.alpha_shape / truth.alpha_shape - 1.0).abs() < 0.01);
        assert!((fit.beta_shape / truth.beta_shape - 1.0).abs() < 0.01);
    }

    #[test]
    fn beta_fit_degenerate_zero_curve() {
        let curve = EmpiricalCurve::new(
            "zero",
            vec![(1, 0.0), (2, 0.0), (4, 0.0), (8, 0.0)],
        )
        .unwrap();
        let (fit, report) = fit_beta_mixture(&curve).unwrap();
        assert!(report.degenerate);
        assert!(fit.solvable_frac < 1e-6);
    }

    #[test]
    fn bootstrap_is_seeded_and_stable() {
        let truth = BetaMixture::new(0.9, 0.6, 2.0).unwrap();
        let ks = [1u64, 2, 4, 8, 16, 32, 64, 128];
        let curve = EmpiricalCurve::new(
            "m",
            ks.iter().map(|&k| (k, bon_coverage(&truth, k))).collect(),
        )
        .unwrap();
        let (fit, _) = fit_beta_mixture(&curve).unwrap();
        let a = bootstrap_beta_mixture(&curve, &fit, 8, 5).unwrap();
        let b = bootstrap_beta_mixture(&curve, &fit, 8, 5).unwrap();
        assert_eq!(a.len(), 8);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.solvable_frac, y.solvable_frac);
        }
    }

    #[test]
    fn record_loss_consistency() {
        let loss_model = crate::forecast::LossModel::chinchilla();
        let good = test_record(1.9485, 327.68);
        assert!(good.consistent_with(&loss_model));
        let bad = test_record(2.05, 327.68);
        assert!(!bad.consistent_with(&loss_model));
    }

    fn test_record(loss: f64, t_max: f64) -> ModelRecord {
        ModelRecord {
            name: "test".into(),
            n_params: 8e9,
            d_tokens: 1.5e13,
            loss,
            t_max,
        }
    }

    #[test]
    fn pushforward_point_mass_limit() {
        // Perfect directionality, saturated sigmoid and ample budget pushes
        // all mass to ψ ≈ 1: the failure moment at k = 1 vanishes.
        let sigmoid = SigmoidMap {
            a_amp: 1.0,
            b_slope: 50.0,
            d_offset: 0.0,
        };
        let prior = [PriorMode {
            m: 2,
            weight: 1.0,
            mu: 4.0,
            sigma: 0.05,
        }];
        let push =
            pushforward_density(&prior, 1.0, &sigmoid, &test_record(1.9, 500.0), 1.0).unwrap();
        assert!(push.failure_moment(1.0) < 1e-6);
        assert!(push.spike_mass() < 1e-12);
    }

    #[test]
    fn pushforward_density_integrates_to_one() {
        // A configuration whose pushforward mass is spread over the interior
        // of (0, 1): moderate budget and skill counts near it, so the beta
        // CDF transition is wide. (With m ≪ T the density concentrates
        // within machine epsilon of ψ = 1 and ψ-space quadrature is
        // meaningless; the coverage path integrates in difficulty space and
        // has no such restriction.)
        let sigmoid = SigmoidMap {
            a_amp: 1.0,
            b_slope: 5.0,
            d_offset: 0.0,
        };
        let prior = [
            PriorMode {
                m: 5,
                weight: 0.6,
                mu: 2.0,
                sigma: 0.3,
            },
            PriorMode {
                m: 12,
                weight: 0.4,
                mu: 2.4,
                sigma: 0.25,
            },
        ];
        let record = test_record(2.0, 20.0);
        let push = pushforward_density(&prior, 0.7, &sigmoid, &record, 0.95).unwrap();
        // Double-graded substitution ψ = u³/(u³ + (1-u)³) clusters
        // quadrature nodes at both endpoints.
        let n = 200_000;
        let mut integral = 0.0;
        let mut prev_psi = 0.0f64;
        let mut prev_f = 0.0f64;
        for i in 1..=n {
            let u = i as f64 / n as f64;
            let u3 = u * u * u;
            let v3 = (1.0 - u) * (1.0 - u) * (1.0 - u);
            let psi = (u3 / (u3 + v3)).min(1.0 - 1e-15);
            let f = push.density(psi).unwrap();
            integral += 0.5 * (f + prev_f) * (psi - prev_psi);
            prev_psi = psi;
            prev_f = f;
        }
        let total = integral + push.spike_mass();
        close(total, 1.0, 1e-6);
    }

    #[test]
    fn pushforward_rejects_non_monotone() {
        let bad = SigmoidMap {
            a_amp: 1.0,
            b_slope: -3.0,
            d_offset: 0.0,
        };
        let prior = [PriorMode {
            m: 1,
            weight: 1.0,
            mu: 2.0,
            sigma: 0.3,
        }];
        assert!(matches!(
            pushforward_density(&prior, 0.5, &bad, &test_record(2.0, 100.0), 1.0),
            Err(PopulationError::Infeasible(_))
        ));
    }

    #[test]
    fn coverage_nodes_agree_with_failure_moment() {
        // The precomputed-node fast path used inside the directionality
        // objective must match the direct quadrature.
        let sigmoid = SigmoidMap {
            a_amp: 1.0,
            b_slope: 5.0,
            d_offset: 0.0,
        };
        let modes = [
            PriorMode {
                m: 1,
                weight: 0.93,
                mu: 0.8,
                sigma: 0.5,
            },
            PriorMode {
                m: 100,
                weight: 0.07,
                mu: 2.1,
                sigma: 0.25,
            },
        ];
        let record = test_record(1.9485, 327.68);
        let push = pushforward_density(&modes, 0.6, &sigmoid, &record, 0.9).unwrap();
        let nodes = CoverageNodes::build(&modes, 0.6, &sigmoid, &record, 0.9).unwrap();
        for &k in &[1u64, 7, 64, 1000, 50_000] {
            let a = push.coverage(k);
            let b = nodes.coverage(k as f64);
            assert!((a - b).abs() < 1e-12, "k={k}: {a} vs {b}");
        }
    }

    #[test]
    fn directionality_round_trip() {
        let sigmoid = SigmoidMap {
            a_amp: 1.0,
            b_slope: 5.0,
            d_offset: 0.0,
        };
        let shape = PriorShape::two_mode_default();
        let truth_modes = [
            PriorMode {
                m: 1,
                weight: 0.93,
                mu: 2.0,
                sigma: 0.5,
            },
            PriorMode {
                m: 100,
                weight: 0.07,
                mu: 2.6,
                sigma: 0.2,
            },
        ];
        // Three models sharing the task prior pin the (mu, sigma) trade
        // against the per-model directionality.
        let records = vec![
            test_record(2.1014, 81.92),
            test_record(1.9485, 327.68),
            test_record(1.8575, 327.68),
        ];
        let iotas = [0.3, 0.55, 0.8];
        let ks = [
            1u64, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 4096, 10000, 100_000,
        ];
        let curves: Vec<EmpiricalCurve> = records
            .iter()
            .zip(iotas)
            .enumerate()
            .map(|(j, (rec, iota))| {
                let push =
                    pushforward_density(&truth_modes, iota, &sigmoid, rec, 1.0).unwrap();
                EmpiricalCurve::new(
                    format!("model{j}"),
                    ks.iter().map(|&k| (k, push.coverage(k))).collect(),
                )
                .unwrap()
            })
            .collect();
        let fit = fit_directionality(
            &curves,
            &records,
            &shape,
            &sigmoid,
            &[1.0, 1.0, 1.0],
            DirectionalityOptions::default(),
        )
        .unwrap();
        for (est, truth) in fit.iota_hat.iter().zip(iotas) {
            assert!(
                (est - truth).abs() <= 0.02,
                "iota {est} vs {truth} (sse {})",
                fit.sse
            );
        }
        // Permutation invariance.
        let curves_rev: Vec<EmpiricalCurve> = curves.iter().rev().cloned().collect();
        let records_rev: Vec<ModelRecord> = records.iter().rev().cloned().collect();
        let solv = [1.0, 1.0, 1.0];
        let fit_rev = fit_directionality(
            &curves_rev,
            &records_rev,
            &shape,
            &sigmoid,
            &solv,
            DirectionalityOptions::default(),
        )
        .unwrap();
        for (a, b) in fit.iota_hat.iter().zip(fit_rev.iota_hat.iter().rev()) {
            assert!((a - b).abs() < 0.02, "{a} vs {b}");
        }
    }
}
