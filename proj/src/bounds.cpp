#include "pacbandit/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace pacbandit {

namespace {

const double kEMinus2 = std::exp(1.0) - 2.0;
constexpr double kPi = std::numbers::pi;

void check_common(double kl, long long t, double eps, double beta) {
  if (!(kl >= 0.0) || !std::isfinite(kl))
    throw precondition_error("kl must be finite and >= 0");
  if (t < 1) throw precondition_error("t must be >= 1");
  if (!(eps > 0.0) || !(eps <= 1.0))
    throw precondition_error("eps must lie in (0, 1]");
  if (!(beta > 0.0) || !(beta < 1.0))
    throw precondition_error("beta must lie in (0, 1)");
}

double confidence_budget(double kl, double beta) {
  return kl + std::log(2.0 / beta);
}

}  // namespace

std::string to_string(BoundKind k) {
  switch (k) {
    case BoundKind::hoeffding_parametric: return "hoeffding-parametric";
    case BoundKind::bernstein_parametric: return "bernstein-parametric";
    case BoundKind::hoeffding_oracle: return "hoeffding-oracle";
    case BoundKind::bernstein_oracle: return "bernstein-oracle";
    case BoundKind::hoeffding_grid: return "hoeffding-grid";
    case BoundKind::hoeffding_optimized: return "hoeffding-optimized";
    case BoundKind::bernstein_optimized: return "bernstein-optimized";
  }
  throw precondition_error("unknown bound kind");
}

BoundKind bound_kind_from_string(const std::string& s) {
  for (BoundKind k : {BoundKind::hoeffding_parametric, BoundKind::bernstein_parametric,
                      BoundKind::hoeffding_oracle, BoundKind::bernstein_oracle,
                      BoundKind::hoeffding_grid, BoundKind::hoeffding_optimized,
                      BoundKind::bernstein_optimized})
    if (to_string(k) == s) return k;
  throw parse_error("unknown bound kind: " + s);
}

double hoeffding_parametric(double kl, double lambda, long long t, double eps,
                            double beta) {
  check_common(kl, t, eps, beta);
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw precondition_error("Hoeffding lambda must be positive");
  const double td = static_cast<double>(t);
  return lambda / (8.0 * td * eps * eps) + confidence_budget(kl, beta) / lambda;
}

double bernstein_parametric(double kl, double lambda, long long t, double eps,
                            double beta) {
  check_common(kl, t, eps, beta);
  if (!(lambda > 0.0) || !(lambda < 1.0))
    throw precondition_error("Bernstein lambda must lie in (0, 1)");
  const double td = static_cast<double>(t);
  return 2.0 * lambda * kEMinus2 / (td * eps) + confidence_budget(kl, beta) / lambda;
}

double oracle_lambda_hoeffding(double kl, long long t, double eps, double beta) {
  check_common(kl, t, eps, beta);
  return 2.0 * eps * std::sqrt(2.0 * static_cast<double>(t) * confidence_budget(kl, beta));
}

double hoeffding_oracle(double kl, long long t, double eps, double beta) {
  check_common(kl, t, eps, beta);
  return std::sqrt(confidence_budget(kl, beta) / (2.0 * static_cast<double>(t))) / eps;
}

double oracle_lambda_bernstein(double kl, long long t, double eps, double beta) {
  check_common(kl, t, eps, beta);
  return std::sqrt(static_cast<double>(t) * eps * confidence_budget(kl, beta) /
                   (2.0 * kEMinus2));
}

BernsteinOracle bernstein_oracle(double kl, long long t, double eps, double beta) {
  BernsteinOracle o;
  o.lambda = oracle_lambda_bernstein(kl, t, eps, beta);
  o.value = std::sqrt(8.0 * kEMinus2 * confidence_budget(kl, beta) /
                      (static_cast<double>(t) * eps));
  o.feasible = o.lambda < 1.0;
  return o;
}

double hoeffding_grid_union(double kl, const std::vector<double>& grid,
                            long long t, double eps, double beta) {
  check_common(kl, t, eps, beta);
  if (grid.empty()) throw precondition_error("lambda grid must be nonempty");
  const double beta_each = beta / static_cast<double>(grid.size());
  double best = std::numeric_limits<double>::infinity();
  for (double lambda : grid)
    best = std::min(best, hoeffding_parametric(kl, lambda, t, eps, beta_each));
  return best;
}

std::vector<double> default_lambda_grid(long long t, double eps, double beta,
                                        int size, double decades) {
  check_common(0.0, t, eps, beta);
  if (size < 1) throw precondition_error("grid size must be >= 1");
  if (!(decades > 0.0)) throw precondition_error("grid span must be positive");
  const double center = oracle_lambda_hoeffding(0.0, t, eps, beta);
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(size));
  if (size == 1) return {center};
  for (int i = 0; i < size; ++i) {
    const double exponent =
        -decades / 2.0 + decades * static_cast<double>(i) / (size - 1);
    grid.push_back(center * std::pow(10.0, exponent));
  }
  return grid;
}

double beta_allocation(int k, double beta) {
  if (k < 1) throw precondition_error("level index must be >= 1");
  if (!(beta > 0.0) || !(beta < 1.0))
    throw precondition_error("beta must lie in (0, 1)");
  const double kd = static_cast<double>(k);
  return 6.0 * beta / (kPi * kPi * kd * kd);
}

double optimized_hoeffding(double kl, long long t, double eps, double beta) {
  check_common(kl, t, eps, beta);
  return std::sqrt((kl + std::log(4.0 * kPi / (3.0 * beta))) /
                   static_cast<double>(t)) /
         eps;
}

double bernstein_admissible_kl(long long t, double eps, double beta) {
  check_common(0.0, t, eps, beta);
  const double te = static_cast<double>(t) * eps;
  // An alternative derivation gives the same expression with ln(pi/(3 beta))
  // in place of ln(2/beta).
  return (2.0 * kEMinus2 - te * (2.0 + std::log(2.0 / beta))) / (2.0 * te);
}

double bernstein_optimized(double kl, long long t, double eps, double beta) {
  check_common(kl, t, eps, beta);
  const double admissible = bernstein_admissible_kl(t, eps, beta);
  if (kl > admissible) throw inadmissible_kl_error(kl, admissible);
  return 2.0 * std::sqrt(kEMinus2 * (kl + std::log(4.0 * kPi / (3.0 * beta))) /
                         (static_cast<double>(t) * eps));
}

double envelope_gap(double x, double beta) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw precondition_error("envelope gap needs x > 0");
  if (!(beta > 0.0) || !(beta < 1.0))
    throw precondition_error("beta must lie in (0, 1)");
  // Written as the literal difference; beta cancels analytically, and the
  // tests confirm the computed value does not depend on it.
  const double discrete = 2.0 * x + std::log(4.0 * kPi / (3.0 * beta));
  const double envelope =
      x + std::log(std::numbers::e * kPi * (1.0 + x) * (1.0 + x) / (3.0 * beta));
  return discrete - envelope;
}

void validate(const BoundSpec& spec) {
  if (!(spec.beta > 0.0) || !(spec.beta < 1.0))
    throw precondition_error("beta must lie in (0, 1)");
  const bool parametric = spec.kind == BoundKind::hoeffding_parametric ||
                          spec.kind == BoundKind::bernstein_parametric;
  if (parametric && !spec.lambda)
    throw precondition_error("parametric bounds require a lambda");
  if (!parametric && spec.lambda)
    throw precondition_error(to_string(spec.kind) + " does not take a lambda");
  if (spec.kind == BoundKind::hoeffding_grid && spec.grid.empty())
    throw precondition_error("grid bound requires a lambda grid");
  if (spec.kind != BoundKind::hoeffding_grid && !spec.grid.empty())
    throw precondition_error(to_string(spec.kind) + " does not take a grid");
  if (spec.kind == BoundKind::hoeffding_parametric &&
      !(*spec.lambda > 0.0 && std::isfinite(*spec.lambda)))
    throw precondition_error("Hoeffding lambda must be positive");
  if (spec.kind == BoundKind::bernstein_parametric &&
      !(*spec.lambda > 0.0 && *spec.lambda < 1.0))
    throw precondition_error("Bernstein lambda must lie in (0, 1)");
}

BoundResult evaluate_bound(const BoundSpec& spec, double kl, long long t,
                           double eps) {
  validate(spec);
  check_common(kl, t, eps, spec.beta);
  BoundResult r;
  r.kind = spec.kind;
  r.kl = kl;
  r.t = t;
  r.eps = eps;
  r.beta = spec.beta;
  switch (spec.kind) {
    case BoundKind::hoeffding_parametric:
      r.lambda = *spec.lambda;
      r.value = hoeffding_parametric(kl, *spec.lambda, t, eps, spec.beta);
      break;
    case BoundKind::bernstein_parametric:
      r.lambda = *spec.lambda;
      r.value = bernstein_parametric(kl, *spec.lambda, t, eps, spec.beta);
      break;
    case BoundKind::hoeffding_oracle:
      r.lambda = oracle_lambda_hoeffding(kl, t, eps, spec.beta);
      r.value = hoeffding_oracle(kl, t, eps, spec.beta);
      break;
    case BoundKind::bernstein_oracle: {
      const BernsteinOracle o = bernstein_oracle(kl, t, eps, spec.beta);
      r.lambda = o.lambda;
      r.value = o.value;
      break;
    }
    case BoundKind::hoeffding_grid: {
      r.value = hoeffding_grid_union(kl, spec.grid, t, eps, spec.beta);
      const double beta_each = spec.beta / static_cast<double>(spec.grid.size());
      double best_lambda = spec.grid[0];
      for (double lambda : spec.grid)
        if (hoeffding_parametric(kl, lambda, t, eps, beta_each) <=
            hoeffding_parametric(kl, best_lambda, t, eps, beta_each))
          best_lambda = lambda;
      r.lambda = best_lambda;
      break;
    }
    case BoundKind::hoeffding_optimized:
      r.value = optimized_hoeffding(kl, t, eps, spec.beta);
      break;
    case BoundKind::bernstein_optimized:
      r.value = bernstein_optimized(kl, t, eps, spec.beta);
      r.admissible = true;
      break;
  }
  return r;
}

std::string bound_result_to_json(const BoundResult& r) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(r.kind);
  j["value"] = r.value;
  j["kl"] = r.kl;
  j["t"] = r.t;
  j["eps"] = r.eps;
  j["beta"] = r.beta;
  if (r.lambda)
    j["lambda"] = *r.lambda;
  else
    j["lambda"] = nullptr;
  if (r.admissible)
    j["admissible"] = *r.admissible;
  else
    j["admissible"] = nullptr;
  return j.dump(2) + "\n";
}

std::string bound_result_to_csv(const BoundResult& r) {
  const auto fmt = [](double v) { return nlohmann::ordered_json(v).dump(); };
  std::ostringstream os;
  os << "kind,value,kl,t,eps,beta,lambda,admissible\n";
  os << to_string(r.kind) << ',' << fmt(r.value) << ',' << fmt(r.kl) << ','
     << r.t << ',' << fmt(r.eps) << ',' << fmt(r.beta) << ',';
  if (r.lambda) os << fmt(*r.lambda);
  os << ',';
  if (r.admissible) os << (*r.admissible ? "true" : "false");
  os << '\n';
  return os.str();
}

}  // namespace pacbandit
