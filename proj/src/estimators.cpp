#include "pacbandit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace pacbandit {

namespace {

void require_multi_armed(const History& h) {
  if (h.contextual())
    throw precondition_error(
        "contextual history passed to a non-contextual estimator");
  if (h.size() == 0) throw precondition_error("history must have t >= 1 steps");
}

void require_action(std::size_t action, const History& h) {
  if (action >= h.num_actions())
    throw precondition_error("action out of range for this history");
}

}  // namespace

std::vector<double> is_estimate_all_actions(const History& h) {
  require_multi_armed(h);
  std::vector<double> sums(h.num_actions(), 0.0);
  for (const LoggedStep& s : h.steps())
    sums[s.action] += s.reward / s.logging_prob;
  const double t = static_cast<double>(h.size());
  for (double& v : sums) v /= t;
  return sums;
}

double is_estimate_action(std::size_t action, const History& h) {
  require_multi_armed(h);
  require_action(action, h);
  double sum = 0.0;
  for (const LoggedStep& s : h.steps())
    if (s.action == action) sum += s.reward / s.logging_prob;
  return sum / static_cast<double>(h.size());
}

double is_estimate_policy(const Policy& pi, const History& h) {
  const std::vector<double> per_action = is_estimate_all_actions(h);
  auto row = pi.row();
  if (row.size() != per_action.size())
    throw precondition_error("policy and history disagree on K");
  double v = 0.0;
  for (std::size_t a = 0; a < row.size(); ++a) v += row[a] * per_action[a];
  return v;
}

long long context_count(std::size_t context, const History& h) {
  if (!h.contextual())
    throw precondition_error("context_count needs a contextual history");
  if (context >= *h.num_contexts())
    throw precondition_error("context out of range for this history");
  long long n = 0;
  for (const LoggedStep& s : h.steps())
    if (*s.context == context) ++n;
  return n;
}

double contextual_is_estimate(std::size_t action, std::size_t context,
                              const History& h) {
  if (!h.contextual())
    throw precondition_error("contextual estimator needs a contextual history");
  require_action(action, h);
  if (context >= *h.num_contexts())
    throw precondition_error("context out of range for this history");
  long long n = 0;
  double sum = 0.0;
  for (const LoggedStep& s : h.steps()) {
    if (*s.context != context) continue;
    ++n;
    if (s.action == action) sum += s.reward / s.logging_prob;
  }
  if (n == 0)
    throw precondition_error("context never appears in the history");
  return sum / static_cast<double>(n);
}

double contextual_is_estimate_policy(const Policy& pi, const History& h) {
  if (!h.contextual())
    throw precondition_error("contextual estimator needs a contextual history");
  if (h.size() == 0) throw precondition_error("history must have t >= 1 steps");
  if (pi.num_actions() != h.num_actions())
    throw precondition_error("policy and history disagree on K");
  if (pi.contextual() && pi.num_contexts() != *h.num_contexts())
    throw precondition_error("policy and history disagree on C");
  const std::size_t c = *h.num_contexts();
  std::vector<std::vector<double>> sums(c,
                                        std::vector<double>(h.num_actions(), 0.0));
  std::vector<long long> counts(c, 0);
  for (const LoggedStep& s : h.steps()) {
    ++counts[*s.context];
    sums[*s.context][s.action] += s.reward / s.logging_prob;
  }
  const double t = static_cast<double>(h.size());
  double v = 0.0;
  for (std::size_t x = 0; x < c; ++x) {
    if (counts[x] == 0) continue;
    auto row = pi.row(x);
    double vx = 0.0;
    for (std::size_t a = 0; a < row.size(); ++a)
      vx += row[a] * (sums[x][a] / static_cast<double>(counts[x]));
    v += (static_cast<double>(counts[x]) / t) * vx;
  }
  return v;
}

double martingale_difference(std::size_t action, const LoggedStep& step,
                             const RewardModel& model) {
  if (action >= model.num_actions())
    throw precondition_error("action out of range for this model");
  const double rbar = step.context ? model.mean(action, *step.context)
                                   : model.mean(action);
  const double hit = step.action == action ? step.reward / step.logging_prob : 0.0;
  return hit - rbar;
}

double conditional_variance_step(std::size_t action,
                                 std::span<const double> logging_row,
                                 const RewardModel& model) {
  if (model.contextual())
    throw precondition_error(
        "conditional_variance_step expects a multi-armed model");
  if (logging_row.size() != model.num_actions())
    throw precondition_error("logging row and model disagree on K");
  if (action >= model.num_actions())
    throw precondition_error("action out of range for this model");
  // Exact enumeration of the (action, reward) draw at one step. The
  // increment Z is mean-zero whenever the row has full support, so its
  // second moment is its variance.
  const double rbar = model.mean(action);
  double second_moment = 0.0;
  auto visit = [&](double prob, double z) { second_moment += prob * z * z; };
  for (std::size_t a = 0; a < logging_row.size(); ++a) {
    const double pa = logging_row[a];
    if (pa == 0.0) continue;
    if (model.family() == RewardFamily::bernoulli) {
      const double m = model.mean(a);
      visit(pa * m, (a == action ? 1.0 / pa : 0.0) - rbar);  // reward 1
      visit(pa * (1.0 - m), -rbar);                          // reward 0
    } else {
      visit(pa, (a == action ? model.mean(a) / pa : 0.0) - rbar);
    }
  }
  return second_moment;
}

namespace {

EstimateReport report_impl(const History& h, const Policy* pi) {
  EstimateReport r;
  r.t = h.size();
  r.eps = h.eps();
  if (!h.contextual()) {
    r.per_action = is_estimate_all_actions(h);
    if (pi) r.policy_value = is_estimate_policy(*pi, h);
    return r;
  }
  if (h.size() == 0) throw precondition_error("history must have t >= 1 steps");
  const std::size_t c = *h.num_contexts();
  for (std::size_t x = 0; x < c; ++x) r.context_counts.push_back(0);
  std::vector<std::vector<double>> sums(c,
                                        std::vector<double>(h.num_actions(), 0.0));
  for (const LoggedStep& s : h.steps()) {
    ++r.context_counts[*s.context];
    sums[*s.context][s.action] += s.reward / s.logging_prob;
  }
  r.per_context.resize(c);
  for (std::size_t x = 0; x < c; ++x) {
    if (r.context_counts[x] == 0) {
      r.unseen_contexts.push_back(x);
      continue;
    }
    std::vector<double> row(h.num_actions());
    for (std::size_t a = 0; a < row.size(); ++a)
      row[a] = sums[x][a] / static_cast<double>(r.context_counts[x]);
    r.per_context[x] = std::move(row);
  }
  if (pi) r.policy_value = contextual_is_estimate_policy(*pi, h);
  return r;
}

}  // namespace

EstimateReport make_estimate_report(const History& h) {
  return report_impl(h, nullptr);
}

EstimateReport make_estimate_report(const History& h, const Policy& pi) {
  return report_impl(h, &pi);
}

std::string estimate_report_to_json(const EstimateReport& r) {
  nlohmann::ordered_json j;
  j["t"] = r.t;
  j["epsilon"] = r.eps;
  if (!r.per_context.empty()) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : r.per_context) {
      if (row)
        rows.push_back(*row);
      else
        rows.push_back(nullptr);
    }
    j["per_context"] = rows;
    j["context_counts"] = r.context_counts;
    j["unseen_contexts"] = r.unseen_contexts;
  } else {
    j["per_action"] = r.per_action;
  }
  if (r.policy_value)
    j["policy_value"] = *r.policy_value;
  else
    j["policy_value"] = nullptr;
  return j.dump(2) + "\n";
}

std::string estimate_report_to_csv(const EstimateReport& r) {
  const auto fmt = [](double v) { return nlohmann::ordered_json(v).dump(); };
  std::ostringstream os;
  if (r.per_context.empty()) {
    os << "action,estimate\n";
    for (std::size_t a = 0; a < r.per_action.size(); ++a)
      os << a << ',' << fmt(r.per_action[a]) << '\n';
    if (r.policy_value) os << "policy," << fmt(*r.policy_value) << '\n';
    return os.str();
  }
  os << "context,action,estimate,count\n";
  for (std::size_t x = 0; x < r.per_context.size(); ++x) {
    if (!r.per_context[x]) continue;
    for (std::size_t a = 0; a < r.per_context[x]->size(); ++a)
      os << x << ',' << a << ',' << fmt((*r.per_context[x])[a]) << ','
         << r.context_counts[x] << '\n';
  }
  if (r.policy_value) os << "policy,," << fmt(*r.policy_value) << ",\n";
  return os.str();
}

}  // namespace pacbandit
