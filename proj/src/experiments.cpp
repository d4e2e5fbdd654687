#include "pacbandit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "pacbandit/estimators.hpp"

namespace pacbandit {

using ordered_json = nlohmann::ordered_json;

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (threads < 1) throw precondition_error("thread count must be >= 1");
  if (threads == 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, n);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const int lo = static_cast<int>(static_cast<long long>(n) * w / workers);
      const int hi = static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string to_string(PolicyMode m) {
  return m == PolicyMode::fixed ? "fixed" : "optimized";
}

PolicyMode policy_mode_from_string(const std::string& s) {
  if (s == "fixed") return PolicyMode::fixed;
  if (s == "optimized") return PolicyMode::optimized;
  throw parse_error("unknown policy mode: " + s);
}

CoverageReport run_coverage(const SimConfig& cfg, int m, const BoundSpec& spec,
                            PolicyMode mode, const std::optional<Policy>& prior,
                            const std::optional<Policy>& fixed_policy,
                            int threads) {
  validate(cfg);
  validate(spec);
  if (m < 1) throw precondition_error("coverage needs at least one trial");
  if (cfg.num_contexts)
    throw precondition_error("coverage runs on multi-armed configurations");
  const RewardModel model = build_reward_model(cfg);
  const Policy prior_pi = prior ? *prior : Policy::uniform(cfg.num_actions);
  if (prior_pi.contextual() || prior_pi.num_actions() != cfg.num_actions)
    throw precondition_error("prior does not match the configuration");
  const Policy fixed_pi = fixed_policy ? *fixed_policy : prior_pi;
  if (mode == PolicyMode::fixed) {
    if (fixed_pi.contextual() || fixed_pi.num_actions() != cfg.num_actions)
      throw precondition_error("fixed policy does not match the configuration");
    if (!std::isfinite(kl_divergence(fixed_pi.row(), prior_pi.row())))
      throw precondition_error(
          "fixed policy puts mass outside the prior's support");
  }

  CoverageReport report;
  report.m = m;
  report.beta = spec.beta;
  report.bound_kind = spec.kind;
  report.mode = mode;
  report.trials.resize(static_cast<std::size_t>(m));
  parallel_for(m, threads, [&](int i) {
    const History h = generate_history_replicate(cfg, static_cast<std::uint64_t>(i));
    CoverageTrial& trial = report.trials[static_cast<std::size_t>(i)];
    if (mode == PolicyMode::optimized) {
      const Certificate cert = optimize_policy(h, prior_pi, spec);
      trial.kl = cert.kl_to_prior;
      trial.estimate = cert.is_estimate;
      trial.bound_value = cert.bound_value;
      trial.true_value = true_expected_reward(cert.policy, model);
    } else {
      trial.kl = kl_divergence(fixed_pi.row(), prior_pi.row());
      trial.estimate = is_estimate_policy(fixed_pi, h);
      trial.bound_value = evaluate_bound(spec, trial.kl, h.size(), h.eps()).value;
      trial.true_value = true_expected_reward(fixed_pi, model);
    }
    trial.violated = std::abs(trial.estimate - trial.true_value) > trial.bound_value;
  });
  for (const CoverageTrial& trial : report.trials)
    if (trial.violated) ++report.violations;
  report.violation_rate =
      static_cast<double>(report.violations) / static_cast<double>(m);
  return report;
}

namespace {

std::string fmt(double v) { return ordered_json(v).dump(); }

}  // namespace

std::string coverage_to_json(const CoverageReport& r) {
  ordered_json j;
  j["m"] = r.m;
  j["violations"] = r.violations;
  j["violation_rate"] = r.violation_rate;
  j["beta"] = r.beta;
  j["bound_kind"] = to_string(r.bound_kind);
  j["mode"] = to_string(r.mode);
  ordered_json trials = ordered_json::array();
  for (std::size_t i = 0; i < r.trials.size(); ++i) {
    const CoverageTrial& t = r.trials[i];
    ordered_json row;
    row["trial"] = i;
    row["kl"] = t.kl;
    row["estimate"] = t.estimate;
    row["true_value"] = t.true_value;
    row["bound_value"] = t.bound_value;
    row["violated"] = t.violated;
    trials.push_back(row);
  }
  j["trials"] = trials;
  return j.dump(2) + "\n";
}

std::string coverage_to_csv(const CoverageReport& r) {
  std::ostringstream os;
  os << "trial,kl,estimate,true_value,bound_value,violated\n";
  for (std::size_t i = 0; i < r.trials.size(); ++i) {
    const CoverageTrial& t = r.trials[i];
    os << i << ',' << fmt(t.kl) << ',' << fmt(t.estimate) << ','
       << fmt(t.true_value) << ',' << fmt(t.bound_value) << ','
       << (t.violated ? "true" : "false") << '\n';
  }
  return os.str();
}

CompareTable compare_bounds(double kl, long long t, double eps, double beta,
                            std::optional<double> lambda,
                            const std::vector<double>& grid) {
  CompareTable tbl;
  tbl.kl = kl;
  tbl.t = t;
  tbl.eps = eps;
  tbl.beta = beta;
  if (lambda && !(*lambda > 0.0 && std::isfinite(*lambda)))
    throw precondition_error("compare lambda must be positive");

  if (lambda) {
    CompareRow hp;
    hp.kind = BoundKind::hoeffding_parametric;
    hp.lambda = *lambda;
    hp.value = hoeffding_parametric(kl, *lambda, t, eps, beta);
    tbl.rows.push_back(hp);

    CompareRow bp;
    bp.kind = BoundKind::bernstein_parametric;
    bp.lambda = *lambda;
    bp.feasible = *lambda < 1.0;
    if (bp.feasible) bp.value = bernstein_parametric(kl, *lambda, t, eps, beta);
    tbl.rows.push_back(bp);
  }

  CompareRow ho;
  ho.kind = BoundKind::hoeffding_oracle;
  ho.lambda = oracle_lambda_hoeffding(kl, t, eps, beta);
  ho.value = hoeffding_oracle(kl, t, eps, beta);
  ho.valid_apriori = false;
  tbl.rows.push_back(ho);

  const BernsteinOracle bo = bernstein_oracle(kl, t, eps, beta);
  CompareRow bor;
  bor.kind = BoundKind::bernstein_oracle;
  bor.lambda = bo.lambda;
  bor.value = bo.value;
  bor.feasible = bo.feasible;
  bor.valid_apriori = false;
  tbl.rows.push_back(bor);

  const std::vector<double> g = grid.empty() ? default_lambda_grid(t, eps, beta)
                                             : grid;
  BoundSpec grid_spec;
  grid_spec.kind = BoundKind::hoeffding_grid;
  grid_spec.beta = beta;
  grid_spec.grid = g;
  const BoundResult gr = evaluate_bound(grid_spec, kl, t, eps);
  CompareRow grow;
  grow.kind = BoundKind::hoeffding_grid;
  grow.lambda = gr.lambda;
  grow.value = gr.value;
  tbl.rows.push_back(grow);

  CompareRow hopt;
  hopt.kind = BoundKind::hoeffding_optimized;
  hopt.value = optimized_hoeffding(kl, t, eps, beta);
  tbl.rows.push_back(hopt);

  CompareRow bopt;
  bopt.kind = BoundKind::bernstein_optimized;
  bopt.feasible = kl <= bernstein_admissible_kl(t, eps, beta);
  if (bopt.feasible) bopt.value = bernstein_optimized(kl, t, eps, beta);
  tbl.rows.push_back(bopt);

  return tbl;
}

std::string compare_to_json(const CompareTable& tbl) {
  ordered_json j;
  j["kl"] = tbl.kl;
  j["t"] = tbl.t;
  j["eps"] = tbl.eps;
  j["beta"] = tbl.beta;
  ordered_json rows = ordered_json::array();
  for (const CompareRow& r : tbl.rows) {
    ordered_json row;
    row["kind"] = to_string(r.kind);
    if (r.value)
      row["value"] = *r.value;
    else
      row["value"] = nullptr;
    if (r.lambda)
      row["lambda"] = *r.lambda;
    else
      row["lambda"] = nullptr;
    row["feasible"] = r.feasible;
    row["valid_apriori"] = r.valid_apriori;
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

std::string compare_to_csv(const CompareTable& tbl) {
  std::ostringstream os;
  os << "kind,value,lambda,feasible,valid_apriori\n";
  for (const CompareRow& r : tbl.rows) {
    os << to_string(r.kind) << ',';
    if (r.value) os << fmt(*r.value);
    os << ',';
    if (r.lambda) os << fmt(*r.lambda);
    os << ',' << (r.feasible ? "true" : "false") << ','
       << (r.valid_apriori ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace pacbandit
