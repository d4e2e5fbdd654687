#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pacbandit/bounds.hpp"
#include "pacbandit/optimizer.hpp"
#include "pacbandit/simulator.hpp"

namespace pacbandit {

// Runs fn(i) for i in [0, n) across `threads` workers. Results must be
// written to per-index slots; the partition is deterministic but the
// interleaving is not, so fn must not touch shared state.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

enum class PolicyMode { fixed, optimized };
std::string to_string(PolicyMode m);
PolicyMode policy_mode_from_string(const std::string& s);

struct CoverageTrial {
  double kl = 0.0;
  double estimate = 0.0;
  double true_value = 0.0;
  double bound_value = 0.0;
  bool violated = false;  // |estimate - true_value| > bound_value
};

struct CoverageReport {
  int m = 0;
  int violations = 0;
  double violation_rate = 0.0;
  double beta = 0.0;
  BoundKind bound_kind = BoundKind::hoeffding_optimized;
  PolicyMode mode = PolicyMode::optimized;
  std::vector<CoverageTrial> trials;
};

// Monte Carlo check that the bound's failure probability stays below beta.
// Each trial simulates one replicate history, picks a policy (the fixed one,
// or the data-dependent optimizer output), and tests the two-sided deviation
// of its estimate from the model truth against the bound at its realized KL.
// Deterministic in cfg.seed regardless of thread count. The fixed policy
// defaults to the prior; the prior defaults to uniform.
CoverageReport run_coverage(const SimConfig& cfg, int m, const BoundSpec& spec,
                            PolicyMode mode,
                            const std::optional<Policy>& prior = std::nullopt,
                            const std::optional<Policy>& fixed_policy = std::nullopt,
                            int threads = 1);

std::string coverage_to_json(const CoverageReport& r);
// Columns: trial,kl,estimate,true_value,bound_value,violated
std::string coverage_to_csv(const CoverageReport& r);

struct CompareRow {
  BoundKind kind = BoundKind::hoeffding_optimized;
  std::optional<double> value;   // absent when the row is skipped
  std::optional<double> lambda;
  bool feasible = true;          // lambda/kl constraints satisfied
  bool valid_apriori = true;     // false for oracle benchmarks
};

struct CompareTable {
  double kl = 0.0;
  long long t = 0;
  double eps = 0.0;
  double beta = 0.0;
  std::vector<CompareRow> rows;
};

// All bound kinds side by side at one (kl, t, eps, beta). Parametric rows
// appear only when a lambda is supplied; the grid row uses the given grid or
// the default one; infeasible rows keep their value (oracle) or drop it
// (inadmissible optimized Bernstein) but are always flagged.
CompareTable compare_bounds(double kl, long long t, double eps, double beta,
                            std::optional<double> lambda = std::nullopt,
                            const std::vector<double>& grid = {});

std::string compare_to_json(const CompareTable& tbl);
// Columns: kind,value,lambda,feasible,valid_apriori
std::string compare_to_csv(const CompareTable& tbl);

}  // namespace pacbandit
