#include "pacbandit/policy.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace pacbandit {

ActionSpace::ActionSpace(std::size_t size_in) : size(size_in) {
  if (size == 0) throw precondition_error("action space must be nonempty");
}

namespace {

void check_prob_row(const std::vector<double>& row) {
  if (row.empty()) throw precondition_error("probability row must be nonempty");
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw precondition_error("probabilities must be finite and nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbSumTol)
    throw precondition_error("probability row must sum to 1");
}

}  // namespace

ContextSpace::ContextSpace(std::vector<double> probs) : probs_(std::move(probs)) {
  check_prob_row(probs_);
}

ContextSpace ContextSpace::uniform(std::size_t size) {
  if (size == 0) throw precondition_error("context space must be nonempty");
  return ContextSpace(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

Policy::Policy(std::vector<std::vector<double>> rows, bool contextual)
    : rows_(std::move(rows)), contextual_(contextual) {
  if (rows_.empty()) throw precondition_error("policy must have at least one row");
  const std::size_t k = rows_[0].size();
  for (const auto& row : rows_) {
    if (row.size() != k)
      throw precondition_error("policy rows must all have the same length");
    check_prob_row(row);
  }
}

Policy Policy::uniform(std::size_t num_actions) {
  if (num_actions == 0) throw precondition_error("policy needs at least one action");
  return Policy({std::vector<double>(num_actions, 1.0 / static_cast<double>(num_actions))},
                false);
}

Policy Policy::point_mass(std::size_t num_actions, std::size_t action) {
  if (action >= num_actions)
    throw precondition_error("point mass action out of range");
  std::vector<double> row(num_actions, 0.0);
  row[action] = 1.0;
  return Policy({std::move(row)}, false);
}

Policy Policy::from_row(std::vector<double> probs) {
  return Policy({std::move(probs)}, false);
}

Policy Policy::from_rows(std::vector<std::vector<double>> rows) {
  return Policy(std::move(rows), true);
}

double Policy::prob(std::size_t action) const {
  auto r = row();
  if (action >= r.size()) throw precondition_error("action out of range");
  return r[action];
}

double Policy::prob(std::size_t action, std::size_t context) const {
  auto r = row(context);
  if (action >= r.size()) throw precondition_error("action out of range");
  return r[action];
}

std::span<const double> Policy::row() const {
  if (contextual_)
    throw precondition_error("contextual policy used where a single row is required");
  return rows_[0];
}

std::span<const double> Policy::row(std::size_t context) const {
  if (!contextual_) return rows_[0];
  if (context >= rows_.size()) throw precondition_error("context out of range");
  return rows_[context];
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw precondition_error("kl_divergence: dimension mismatch");
  if (p.empty()) throw precondition_error("kl_divergence: empty distributions");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;  // 0 log 0 = 0
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    kl += p[i] * std::log(p[i] / q[i]);
  }
  // Rounding can leave a tiny negative when p and q are (nearly) equal.
  return kl < 0.0 && kl > -1e-12 ? 0.0 : kl;
}

double kl_divergence(const Policy& p, const Policy& q) {
  return kl_divergence(p.row(), q.row());
}

Policy epsilon_floor_policy(const Policy& pi, double eps) {
  const double k = static_cast<double>(pi.num_actions());
  if (!(eps > 0.0) || !(eps <= 1.0 / k))
    throw precondition_error("epsilon floor requires 0 < eps <= 1/K");
  const double shrink = 1.0 - k * eps;  // >= 0
  std::vector<std::vector<double>> rows;
  rows.reserve(pi.num_contexts());
  for (std::size_t x = 0; x < pi.num_contexts(); ++x) {
    auto src = pi.row(x);
    std::vector<double> row(src.size());
    for (std::size_t a = 0; a < src.size(); ++a) {
      // shrink * src[a] rounds to something >= 0, and rounding is monotone,
      // so the computed entry is >= eps exactly, not just approximately.
      row[a] = shrink * src[a] + eps;
    }
    rows.push_back(std::move(row));
  }
  if (!pi.contextual()) return Policy::from_row(std::move(rows[0]));
  return Policy::from_rows(std::move(rows));
}

}  // namespace pacbandit
