#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pacbandit/errors.hpp"

namespace pacbandit {

// Every bound here controls, with probability >= 1 - beta, the two-sided
// deviation |E_pi[rhat] - E_pi[rbar]| of the importance-sampling estimate of
// a policy whose KL divergence to the prior is kl, after t logged steps with
// logging probabilities floored at eps.
//
// Inputs common to all kinds: kl >= 0 (finite), t >= 1, 0 < eps <= 1,
// 0 < beta < 1.

enum class BoundKind {
  hoeffding_parametric,   // fixed lambda > 0
  bernstein_parametric,   // fixed lambda in (0, 1)
  hoeffding_oracle,       // parametric Hoeffding at its minimizing lambda
  bernstein_oracle,       // parametric Bernstein at its unconstrained minimizer
  hoeffding_grid,         // union bound over a finite lambda grid
  hoeffding_optimized,    // lambda-free, holds uniformly over kl
  bernstein_optimized,    // lambda-free, needs kl within an admissible budget
};

std::string to_string(BoundKind k);
BoundKind bound_kind_from_string(const std::string& s);

// --- parametric bounds ------------------------------------------------------

// lambda / (8 t eps^2) + (kl + ln(2/beta)) / lambda, for any lambda > 0.
double hoeffding_parametric(double kl, double lambda, long long t, double eps,
                            double beta);

// 2 lambda (e-2) / (t eps) + (kl + ln(2/beta)) / lambda, for lambda in (0, 1).
double bernstein_parametric(double kl, double lambda, long long t, double eps,
                            double beta);

// --- oracle (closed-form minimizer) bounds ----------------------------------
// These plug the deviation-optimal lambda back in. The optimal lambda depends
// on kl, which depends on the data, so oracle values are benchmarks rather
// than a-priori certificates.

double oracle_lambda_hoeffding(double kl, long long t, double eps, double beta);
double hoeffding_oracle(double kl, long long t, double eps, double beta);

struct BernsteinOracle {
  double lambda = 0.0;  // unconstrained minimizer, may be >= 1
  double value = 0.0;   // bound at that lambda
  bool feasible = false;  // lambda < 1, i.e. inside the parametric range
};

double oracle_lambda_bernstein(double kl, long long t, double eps, double beta);

// Reports infeasibility via the flag instead of clamping lambda, so the
// mathematical object being compared never silently changes.
BernsteinOracle bernstein_oracle(double kl, long long t, double eps, double beta);

// --- grid union bound -------------------------------------------------------

// min over the grid of hoeffding_parametric with beta split evenly over the
// grid points. Grid entries must be positive and the grid nonempty.
double hoeffding_grid_union(double kl, const std::vector<double>& grid,
                            long long t, double eps, double beta);

// Geometric grid of `size` points spanning `decades` decades centered (in
// log space) at the kl=0 oracle lambda.
std::vector<double> default_lambda_grid(long long t, double eps, double beta,
                                        int size = 16, double decades = 3.0);

// --- lambda-free optimized bounds -------------------------------------------

// Per-level failure budget of the countable union over lambda levels
// k = 1, 2, ...: 6 beta / (pi^2 k^2), which sums to beta exactly.
double beta_allocation(int k, double beta);

// (1/eps) sqrt((kl + ln(4 pi / (3 beta))) / t). Holds for all kl at once.
double optimized_hoeffding(double kl, long long t, double eps, double beta);

// Largest kl the optimized Bernstein bound can certify:
//   (2(e-2) - t eps (2 + ln(2/beta))) / (2 t eps).
// May be negative, in which case no kl is admissible at these (t, eps, beta).
// An alternative derivation yields the same expression with ln(pi/(3 beta))
// in place of ln(2/beta); this implementation uses ln(2/beta).
double bernstein_admissible_kl(long long t, double eps, double beta);

// 2 sqrt((e-2) (kl + ln(4 pi / (3 beta))) / (t eps)). Requires
// kl <= bernstein_admissible_kl(t, eps, beta); throws inadmissible_kl_error
// otherwise.
double bernstein_optimized(double kl, long long t, double eps, double beta);

// Cost of lambda-level discretization: the optimized-Hoeffding exponent
// minus the envelope inf_k over real k >= 1. Equals
//   x + ln 4 - 1 - 2 ln(1 + x)
// independent of beta; convex in x > 0 with minimum 0 at x = 1.
double envelope_gap(double x, double beta);

// --- uniform dispatch -------------------------------------------------------

struct BoundSpec {
  BoundKind kind = BoundKind::hoeffding_optimized;
  double beta = 0.05;
  std::optional<double> lambda;      // required iff kind is parametric
  std::vector<double> grid;          // required iff kind is hoeffding_grid
};

void validate(const BoundSpec& spec);

struct BoundResult {
  BoundKind kind = BoundKind::hoeffding_optimized;
  double value = 0.0;
  double kl = 0.0;
  long long t = 0;
  double eps = 0.0;
  double beta = 0.0;
  std::optional<double> lambda;      // the lambda actually used, if any
  std::optional<bool> admissible;    // optimized Bernstein only
};

BoundResult evaluate_bound(const BoundSpec& spec, double kl, long long t,
                           double eps);

// {"kind", "value", "kl", "t", "eps", "beta", "lambda", "admissible"},
// with null for absent lambda/admissible.
std::string bound_result_to_json(const BoundResult& r);
// One row with the same fields; empty cells for null.
std::string bound_result_to_csv(const BoundResult& r);

}  // namespace pacbandit
