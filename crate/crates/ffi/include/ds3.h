#ifndef DS3_FFI_H
#define DS3_FFI_H

/* Generated by cbindgen from the ds3-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum {
  DS3_STATUS_OK = 0,
  /**
   * An argument was outside its mathematical domain.
   */
  DS3_STATUS_DOMAIN = 1,
  /**
   * The request was structurally infeasible (budget below one step,
   * plateau above the solvable fraction, ...).
   */
  DS3_STATUS_INFEASIBLE = 2,
  /**
   * An iteration failed to converge.
   */
  DS3_STATUS_CONVERGENCE = 3,
  /**
   * A required pointer argument was null.
   */
  DS3_STATUS_NULL_ARGUMENT = 4,
  /**
   * Exact enumeration would exceed the supported size; use the
   * Monte-Carlo variant.
   */
  DS3_STATUS_SUPPORT_TOO_LARGE = 5,
} Ds3Status;

/**
 * Opaque Beta-plus-point-mass success-rate mixture.
 */
typedef struct Ds3BetaMixture Ds3BetaMixture;

/**
 * Opaque idealized-task handle.
 */
typedef struct Ds3Task Ds3Task;

/**
 * Ensemble statistics of a simulated strategy.
 */
typedef struct {
  double success_rate;
  double success_stderr;
  double mean_output_tokens;
  uint64_t trials;
  uint64_t seed;
} Ds3Estimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Regularized incomplete beta I_x(a, b).
 */
Ds3Status ds3_reg_inc_beta(double x, double a, double b, double *out);

/**
 * Inverse of the regularized incomplete beta in its first argument.
 */
Ds3Status ds3_reg_inc_beta_inv(double y, double a, double b, double *out);

/**
 * Principal branch of the Lambert W function.
 */
Ds3Status ds3_lambert_w0(double z, double *out);

/**
 * Complementary Gaussian CDF Q(z).
 */
Ds3Status ds3_q_function(double z, double *out);

/**
 * Chain-of-thought success probability for m skills at per-step success
 * iota_p within a budget of t_max steps.
 */
Ds3Status ds3_cot_success(double iota_p, uint32_t m, double t_max, double *out);

/**
 * Tree-of-thought(1) success with branching factor b.
 */
Ds3Status ds3_tot1_success(double iota_p, uint32_t m, double t_max, uint32_t b, double *out);

/**
 * Best-of-N over k equal-budget chain-of-thought traces.
 */
Ds3Status ds3_bon_success_cot(double iota_p, uint32_t m, double t_max, uint32_t k, double *out);

/**
 * Exact expected step count under a capped budget.
 */
Ds3Status ds3_cot_expected_steps(double iota_p, uint32_t m, double t_max, double *out);

/**
 * Piecewise linear-Gaussian expected-token approximation.
 */
Ds3Status ds3_cot_expected_tokens_lga(double iota_p,
                                      uint32_t m,
                                      double omega,
                                      double token_budget,
                                      double z_star,
                                      double *out);

/**
 * Maximum reasoning-depth amplification factor g(r).
 */
Ds3Status ds3_amplification_g(double r, double *out);

/**
 * Create a task: m required skills out of a relevant set of size
 * relevant_set, directionality coefficient delta, per-skill success p,
 * omega tokens per step, and a budget of step_budget steps.
 */
Ds3Status ds3_task_new(uint32_t m,
                       uint32_t relevant_set,
                       double delta,
                       double p,
                       uint32_t omega,
                       double step_budget,
                       Ds3Task **out);

/**
 * Free a task handle. Passing null is a no-op.
 *
 * # Safety
 * `task` must be a pointer previously returned by [`ds3_task_new`] that has
 * not yet been freed.
 */
void ds3_task_free(Ds3Task *task);

/**
 * Effective directionality ι̂ = δ + (1-δ)/M of a task.
 */
Ds3Status ds3_task_iota_hat(const Ds3Task *task, double *out);

/**
 * Monte-Carlo estimate of chain-of-thought success on a task.
 * Deterministic for a fixed (task, trials, seed).
 */
Ds3Status ds3_simulate_cot(const Ds3Task *task, uint64_t trials, uint64_t seed, Ds3Estimate *out);

/**
 * Monte-Carlo estimate of tree-of-thought(1) success with branching b.
 */
Ds3Status ds3_simulate_tot1(const Ds3Task *task,
                            uint32_t b,
                            uint64_t trials,
                            uint64_t seed,
                            Ds3Estimate *out);

/**
 * Monte-Carlo estimate of best-of-N over k chain-of-thought traces.
 */
Ds3Status ds3_simulate_bon_cot(const Ds3Task *task,
                               uint32_t k,
                               uint64_t trials,
                               uint64_t seed,
                               Ds3Estimate *out);

/**
 * Create a mixture: a solvable fraction of tasks with Beta(alpha, beta)
 * success rates, the rest unsolvable.
 */
Ds3Status ds3_beta_mixture_new(double solvable_frac,
                               double alpha,
                               double beta,
                               Ds3BetaMixture **out);

/**
 * Free a mixture handle. Passing null is a no-op.
 *
 * # Safety
 * `mix` must be a pointer previously returned by [`ds3_beta_mixture_new`]
 * that has not yet been freed.
 */
void ds3_beta_mixture_free(Ds3BetaMixture *mix);

/**
 * Pass@k coverage (best-of-N with an oracle verifier) under the mixture.
 */
Ds3Status ds3_bon_coverage(const Ds3BetaMixture *mix, uint64_t k, double *out);

/**
 * Large-k majority-voting saturation level for a dominant incorrect-answer
 * weight c_star.
 */
Ds3Status ds3_mv_saturation(const Ds3BetaMixture *mix, double c_star, double *out);

/**
 * Finite-k majority-voting accuracy with a truncated-geometric error
 * spectrum over `alphabet` answers. Uses exact enumeration while the
 * multinomial support is small, otherwise `mc_samples` seeded Monte-Carlo
 * draws.
 */
Ds3Status ds3_mv_accuracy_geometric(const Ds3BetaMixture *mix,
                                    uintptr_t alphabet,
                                    double lambda,
                                    uint32_t k,
                                    uint32_t mc_samples,
                                    uint64_t seed,
                                    double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DS3_FFI_H */
