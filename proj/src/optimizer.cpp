#include "pacbandit/optimizer.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "pacbandit/estimators.hpp"

namespace pacbandit {

using ordered_json = nlohmann::ordered_json;

Policy gibbs_policy(const Policy& prior, std::span<const double> scores,
                    double eta) {
  auto mu = prior.row();
  if (scores.size() != mu.size())
    throw precondition_error("scores and prior disagree on K");
  for (double s : scores)
    if (!std::isfinite(s)) throw precondition_error("scores must be finite");
  if (!(eta >= 0.0) || !std::isfinite(eta))
    throw precondition_error("Gibbs eta must be finite and >= 0");
  if (eta == 0.0) return prior;
  double smax = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < mu.size(); ++a)
    if (mu[a] > 0.0 && scores[a] > smax) smax = scores[a];
  std::vector<double> w(mu.size(), 0.0);
  double sum = 0.0;
  for (std::size_t a = 0; a < mu.size(); ++a) {
    if (mu[a] == 0.0) continue;
    w[a] = mu[a] * std::exp(eta * (scores[a] - smax));
    sum += w[a];
  }
  for (double& v : w) v /= sum;
  return Policy::from_row(std::move(w));
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double v = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) v += a[i] * b[i];
  return v;
}

constexpr double kGoldenTol = 1e-10;
constexpr int kGoldenMaxIter = 200;
constexpr double kEtaCap = 1e9;

double golden_section_maximize(const std::function<double(double)>& f, double a,
                               double b) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < kGoldenMaxIter && (b - a) > kGoldenTol; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

Certificate certify(const Policy& pi, const History& h, const Policy& prior,
                    const BoundSpec& spec) {
  validate(spec);
  if (h.contextual())
    throw precondition_error("certification requires a multi-armed history");
  if (pi.contextual() || prior.contextual())
    throw precondition_error("certification requires non-contextual policies");
  if (pi.num_actions() != h.num_actions() ||
      prior.num_actions() != h.num_actions())
    throw precondition_error("policy, prior and history disagree on K");
  const std::vector<double> scores = is_estimate_all_actions(h);
  const double kl = kl_divergence(pi.row(), prior.row());
  if (!std::isfinite(kl))
    throw precondition_error(
        "policy puts mass outside the prior's support (infinite kl)");
  const BoundResult b = evaluate_bound(spec, kl, h.size(), h.eps());
  Certificate c;
  c.policy = pi;
  c.prior = prior;
  c.is_estimate = dot(pi.row(), scores);
  c.kl_to_prior = kl;
  c.bound_kind = b.kind;
  c.lambda = b.lambda;
  c.grid = spec.grid;
  c.bound_value = b.value;
  c.lower_bound = c.is_estimate - c.bound_value;
  c.beta = spec.beta;
  c.t = h.size();
  c.eps = h.eps();
  return c;
}

Certificate optimize_policy(const History& h, const Policy& prior,
                            const BoundSpec& spec) {
  validate(spec);
  if (h.contextual())
    throw precondition_error("the optimizer requires a multi-armed history");
  if (prior.contextual())
    throw precondition_error("the optimizer requires a non-contextual prior");
  if (prior.num_actions() != h.num_actions())
    throw precondition_error("prior and history disagree on K");
  const std::vector<double> scores = is_estimate_all_actions(h);
  const long long t = h.size();
  const double eps = h.eps();

  const auto kl_at = [&](double eta) {
    return kl_divergence(gibbs_policy(prior, scores, eta).row(), prior.row());
  };
  const auto objective = [&](double eta) -> double {
    const Policy pi = gibbs_policy(prior, scores, eta);
    const double kl = kl_divergence(pi.row(), prior.row());
    try {
      return dot(pi.row(), scores) - evaluate_bound(spec, kl, t, eps).value;
    } catch (const inadmissible_kl_error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  // The optimized Bernstein bound certifies only a bounded KL ball around
  // the prior; KL is nondecreasing in eta along the Gibbs path, so the
  // feasible etas form an interval [0, eta_max].
  double eta_cap = kEtaCap;
  if (spec.kind == BoundKind::bernstein_optimized) {
    const double budget = bernstein_admissible_kl(t, eps, spec.beta);
    if (budget < 0.0) throw inadmissible_kl_error(0.0, budget);
    if (kl_at(kEtaCap) > budget) {
      // kl(0) = 0 <= budget, so the invariant kl(lo) <= budget < kl(hi) holds
      // throughout and lo ends on the certifiable side.
      double lo = 0.0;
      double hi = kEtaCap;
      for (int i = 0; i < 200 && hi - lo > kGoldenTol; ++i) {
        const double mid = 0.5 * (lo + hi);
        (kl_at(mid) <= budget ? lo : hi) = mid;
      }
      eta_cap = lo;
    }
  }

  // Coarse log-spaced scan, then golden-section refinement around the best
  // scan point.
  std::vector<double> etas = {0.0};
  for (int i = 0; i <= 60; ++i) {
    const double eta = std::pow(10.0, -3.0 + 0.1 * static_cast<double>(i));
    if (eta < eta_cap) etas.push_back(eta);
  }
  etas.push_back(eta_cap);
  std::size_t best = 0;
  double best_val = objective(etas[0]);
  for (std::size_t i = 1; i < etas.size(); ++i) {
    const double v = objective(etas[i]);
    if (v > best_val) {
      best = i;
      best_val = v;
    }
  }
  const double lo = best > 0 ? etas[best - 1] : 0.0;
  const double hi = best + 1 < etas.size() ? etas[best + 1] : etas.back();
  const double refined = golden_section_maximize(objective, lo, hi);

  double eta_star = 0.0;
  double f_star = objective(0.0);
  for (double candidate : {etas[best], refined}) {
    const double v = objective(candidate);
    if (v > f_star) {
      eta_star = candidate;
      f_star = v;
    }
  }
  return certify(gibbs_policy(prior, scores, eta_star), h, prior, spec);
}

namespace {

std::vector<double> row_vector(const Policy& p) {
  auto r = p.row();
  return {r.begin(), r.end()};
}

}  // namespace

std::string certificate_to_json(const Certificate& c) {
  ordered_json j;
  j["policy"] = row_vector(c.policy);
  j["prior"] = row_vector(c.prior);
  j["is_estimate"] = c.is_estimate;
  j["kl"] = c.kl_to_prior;
  j["bound_kind"] = to_string(c.bound_kind);
  if (c.lambda)
    j["lambda"] = *c.lambda;
  else
    j["lambda"] = nullptr;
  if (c.grid.empty())
    j["grid"] = nullptr;
  else
    j["grid"] = c.grid;
  j["bound_value"] = c.bound_value;
  j["lower_bound"] = c.lower_bound;
  j["beta"] = c.beta;
  j["t"] = c.t;
  j["eps"] = c.eps;
  return j.dump(2) + "\n";
}

Certificate certificate_from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw parse_error(std::string("invalid certificate JSON: ") + e.what());
  }
  // auto-mode optimizer output wraps the winning certificate in a
  // {selected, candidates} envelope; accept that shape too
  if (j.is_object() && !j.contains("policy") && j.contains("selected"))
    j = j.at("selected");
  Certificate c;
  try {
    c.policy = Policy::from_row(j.at("policy").get<std::vector<double>>());
    c.prior = Policy::from_row(j.at("prior").get<std::vector<double>>());
    c.is_estimate = j.at("is_estimate").get<double>();
    c.kl_to_prior = j.at("kl").get<double>();
    c.bound_kind = bound_kind_from_string(j.at("bound_kind").get<std::string>());
    if (j.contains("lambda") && !j.at("lambda").is_null())
      c.lambda = j.at("lambda").get<double>();
    if (j.contains("grid") && !j.at("grid").is_null())
      c.grid = j.at("grid").get<std::vector<double>>();
    c.bound_value = j.at("bound_value").get<double>();
    c.lower_bound = j.at("lower_bound").get<double>();
    c.beta = j.at("beta").get<double>();
    c.t = j.at("t").get<long long>();
    c.eps = j.at("eps").get<double>();
  } catch (const ordered_json::exception& e) {
    throw parse_error(std::string("invalid certificate: ") + e.what());
  } catch (const precondition_error& e) {
    throw parse_error(std::string("invalid certificate: ") + e.what());
  }
  return c;
}

Certificate read_certificate_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open certificate file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return certificate_from_json_text(buf.str());
}

BoundSpec bound_spec_of(const Certificate& c) {
  BoundSpec spec;
  spec.kind = c.bound_kind;
  spec.beta = c.beta;
  if (c.bound_kind == BoundKind::hoeffding_parametric ||
      c.bound_kind == BoundKind::bernstein_parametric)
    spec.lambda = c.lambda;
  if (c.bound_kind == BoundKind::hoeffding_grid) spec.grid = c.grid;
  return spec;
}

}  // namespace pacbandit
