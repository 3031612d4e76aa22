//! Shared plurality-vote kernel.
//!
//! Enumerates vote-count outcomes of k draws over an alphabet of one correct
//! answer plus the incorrect answers, weighting each outcome by the
//! plurality-with-random-tie-break success credit. The probability weight
//! attached to the correct count is pluggable, so the same kernel serves
//! fixed success probabilities and Beta-integrated ones.

use crate::specfun::{self, Result};

/// Number of vote-count compositions enumerated for k samples over an
/// alphabet of `n_incorrect + 1` answers.
pub fn support_size(k: u64, n_incorrect: usize) -> f64 {
    // C(k + n_incorrect, n_incorrect)
    let n = n_incorrect as f64;
    let k = k as f64;
    (specfun::log_gamma(k + n + 1.0).unwrap()
        - specfun::log_gamma(k + 1.0).unwrap()
        - specfun::log_gamma(n + 1.0).unwrap())
    .exp()
}

fn recurse(
    idx: usize,
    remaining: usize,
    counts: &mut Vec<u32>,
    ln_c: &[f64],
    ln_fact: &[f64],
    k: usize,
    acc_ln: f64,
    total: &mut f64,
    correct_ln_weight: &mut dyn FnMut(u32) -> f64,
) {
    if idx == ln_c.len() {
        let y0 = remaining as u32;
        let max_inc = counts.iter().copied().max().unwrap_or(0);
        if y0 < max_inc {
            return;
        }
        let ties = counts.iter().filter(|&&c| c == y0 && y0 > 0).count();
        let credit = if y0 == 0 && max_inc == 0 {
            // k = 0 edge: no votes at all, nothing to win.
            0.0
        } else {
            1.0 / (1.0 + ties as f64)
        };
        let ln_w = ln_fact[k] - ln_fact[remaining] + acc_ln + correct_ln_weight(y0);
        if ln_w > -745.0 {
            *total += credit * ln_w.exp();
        }
        return;
    }
    for y in 0..=remaining {
        let term = if y == 0 {
            0.0
        } else if ln_c[idx] == f64::NEG_INFINITY {
            break;
        } else {
            y as f64 * ln_c[idx] - ln_fact[y]
        };
        counts[idx] = y as u32;
        recurse(
            idx + 1,
            remaining - y,
            counts,
            ln_c,
            ln_fact,
            k,
            acc_ln + term,
            total,
            correct_ln_weight,
        );
    }
    counts[idx] = 0;
}

/// Exact plurality success sum.
///
/// `incorrect_weights` are the conditional probabilities c_j of each
/// incorrect answer given an incorrect draw; `correct_ln_weight(y0)` must
/// return the log-weight carried by the correct count (the incorrect counts'
/// own log-probabilities and the multinomial coefficient are handled here).
pub fn plurality_sum<F>(k: u32, incorrect_weights: &[f64], mut correct_ln_weight: F) -> Result<f64>
where
    F: FnMut(u32) -> f64,
{
    let k = k as usize;
    let mut ln_fact = vec![0.0f64; k + 1];
    for i in 1..=k {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let ln_c: Vec<f64> = incorrect_weights
        .iter()
        .map(|&c| if c > 0.0 { c.ln() } else { f64::NEG_INFINITY })
        .collect();
    let mut counts = vec![0u32; incorrect_weights.len()];
    let mut total = 0.0;
    recurse(
        0,
        k,
        &mut counts,
        &ln_c,
        &ln_fact,
        k,
        0.0,
        &mut total,
        &mut correct_ln_weight,
    );
    Ok(total.clamp(0.0, 1.0))
}

/// Plurality success probability at a fixed per-draw success rate.
///
/// The incorrect answers receive the remaining mass (1 - psi) split by the
/// conditional weights; a binary alphabet reduces to majority voting with
/// halved tie mass.
pub fn plurality_success_fixed(psi: f64, incorrect_weights: &[f64], k: u32) -> Result<f64> {
    let ln_psi = if psi > 0.0 {
        psi.ln()
    } else {
        f64::NEG_INFINITY
    };
    let ln_fail = if psi < 1.0 {
        (1.0 - psi).ln()
    } else {
        f64::NEG_INFINITY
    };
    plurality_sum(k, incorrect_weights, |y0| {
        let y_inc = k - y0;
        let a = if y0 == 0 { 0.0 } else { y0 as f64 * ln_psi };
        let b = if y_inc == 0 {
            0.0
        } else {
            y_inc as f64 * ln_fail
        };
        a + b
    })
}
