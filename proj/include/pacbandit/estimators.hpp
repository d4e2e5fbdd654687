#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pacbandit/history.hpp"
#include "pacbandit/policy.hpp"
#include "pacbandit/reward_model.hpp"

namespace pacbandit {

// Importance-sampling estimate of the mean reward of one action:
//   (1/t) sum_n 1{a_n = a} r_n / p_n
// where p_n is the logged probability of the action actually taken.
// Values lie in [0, 1/eps]. Requires a non-contextual history.
double is_estimate_action(std::size_t action, const History& h);

// All K per-action estimates in one pass over the history. The policy and
// optimizer variants below reuse this, so they agree bit for bit.
std::vector<double> is_estimate_all_actions(const History& h);

// sum_a pi(a) * is_estimate_action(a, h).
double is_estimate_policy(const Policy& pi, const History& h);

// Contextual variants, conditioning on steps with the given context:
//   (1 / n(x)) sum_{n: x_n = x} 1{a_n = a} r_n / p_n.
// Requires the context to appear in the history.
double contextual_is_estimate(std::size_t action, std::size_t context,
                              const History& h);
long long context_count(std::size_t context, const History& h);

// Empirical-context-mixture value of a contextual policy:
//   sum_{x seen} (n(x)/t) sum_a pi(a|x) chat(a, x).
double contextual_is_estimate_policy(const Policy& pi, const History& h);

// One martingale increment of the estimate for action a:
//   Z = 1{a_n = a} r_n / p_n - rbar(a).
// Mean-zero under the logging distribution whatever the logging policy.
double martingale_difference(std::size_t action, const LoggedStep& step,
                             const RewardModel& model);

// E[Z^2 | logging row] for one step, by exact enumeration of the action draw
// and the reward support. Bounded by 1/pi(a) <= 1/eps for floored rows.
double conditional_variance_step(std::size_t action,
                                 std::span<const double> logging_row,
                                 const RewardModel& model);

struct EstimateReport {
  long long t = 0;
  double eps = 0.0;
  // Multi-armed: one estimate per action. Contextual: per_context[x][a],
  // with rows absent for contexts never seen in the log.
  std::vector<double> per_action;
  std::vector<std::optional<std::vector<double>>> per_context;
  std::vector<long long> context_counts;
  std::vector<std::size_t> unseen_contexts;
  std::optional<double> policy_value;
};

EstimateReport make_estimate_report(const History& h);
EstimateReport make_estimate_report(const History& h, const Policy& pi);

std::string estimate_report_to_json(const EstimateReport& r);
// Non-contextual columns: action,estimate. Contextual columns:
// context,action,estimate,count (unseen contexts omitted). When a policy
// value is present it is appended as a row with "policy" in the first column.
std::string estimate_report_to_csv(const EstimateReport& r);

}  // namespace pacbandit
