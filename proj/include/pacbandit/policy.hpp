#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pacbandit/errors.hpp"

namespace pacbandit {

// Tolerance for "this probability vector sums to 1" checks.
inline constexpr double kProbSumTol = 1e-12;

// Finite action set {0, ..., size-1}.
struct ActionSpace {
  explicit ActionSpace(std::size_t size);
  std::size_t size;
};

// Finite context set with its sampling distribution.
class ContextSpace {
 public:
  explicit ContextSpace(std::vector<double> probs);
  static ContextSpace uniform(std::size_t size);

  std::size_t size() const { return probs_.size(); }
  double prob(std::size_t x) const { return probs_.at(x); }
  std::span<const double> probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

// A stochastic policy over K actions. Non-contextual policies hold one
// probability row; contextual ones hold one row per context. Rows are
// validated on construction: nonnegative entries summing to 1 within
// kProbSumTol.
class Policy {
 public:
  static Policy uniform(std::size_t num_actions);
  static Policy point_mass(std::size_t num_actions, std::size_t action);
  static Policy from_row(std::vector<double> probs);
  static Policy from_rows(std::vector<std::vector<double>> rows);

  std::size_t num_actions() const { return rows_[0].size(); }
  std::size_t num_contexts() const { return rows_.size(); }
  bool contextual() const { return contextual_; }

  // Row accessors. The context-free forms require a non-contextual policy.
  double prob(std::size_t action) const;
  double prob(std::size_t action, std::size_t context) const;
  std::span<const double> row() const;
  std::span<const double> row(std::size_t context) const;

  bool operator==(const Policy&) const = default;

 private:
  Policy(std::vector<std::vector<double>> rows, bool contextual);
  std::vector<std::vector<double>> rows_;
  bool contextual_;
};

// KL(p || q) in nats. Returns +infinity when p puts mass where q has none;
// 0 log 0 is treated as 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Row-wise wrapper for non-contextual policies.
double kl_divergence(const Policy& p, const Policy& q);

// Mixes every row with the uniform distribution, (1 - K eps) pi + eps, so
// all probabilities are >= eps. Requires 0 < eps <= 1/K. The floor holds
// exactly in floating point, not just up to rounding.
Policy epsilon_floor_policy(const Policy& pi, double eps);

}  // namespace pacbandit
