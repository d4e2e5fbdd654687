#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "pacbandit/estimators.hpp"
#include "pacbandit/optimizer.hpp"
#include "pacbandit/simulator.hpp"
#include "test_util.hpp"

using namespace pacbandit;
using testutil::rel_err;

namespace {

History demo_history(std::size_t k = 4, long long t = 400, double eps = 0.02,
                     std::uint64_t seed = 2026) {
  SimConfig cfg;
  cfg.num_actions = k;
  cfg.horizon = t;
  cfg.eps = eps;
  cfg.seed = seed;
  std::vector<double> means(k);
  for (std::size_t a = 0; a < k; ++a)
    means[a] = 0.15 + 0.7 * static_cast<double>(a) / static_cast<double>(k - 1);
  cfg.reward_means = {means};
  return generate_history(cfg);
}

double objective_of(const History& h, const Policy& prior,
                    const BoundSpec& spec, const Policy& pi) {
  const std::vector<double> scores = is_estimate_all_actions(h);
  auto row = pi.row();
  double est = 0.0;
  for (std::size_t a = 0; a < row.size(); ++a) est += row[a] * scores[a];
  const double kl = kl_divergence(pi.row(), prior.row());
  return est - evaluate_bound(spec, kl, h.size(), h.eps()).value;
}

}  // namespace

TEST_CASE("gibbs reweighting by hand") {
  const std::vector<double> scores = {1.0, 0.0};
  const Policy pi = gibbs_policy(Policy::uniform(2), scores, std::log(2.0));
  // weights 0.5 and 0.25, normalized
  CHECK(pi.prob(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(pi.prob(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("eta zero returns the prior unchanged") {
  const Policy prior = Policy::from_row({0.125, 0.375, 0.5});
  const std::vector<double> scores = {3.0, 1.0, 2.0};
  CHECK(gibbs_policy(prior, scores, 0.0) == prior);
}

TEST_CASE("zero prior mass stays zero") {
  const Policy prior = Policy::from_row({0.5, 0.5, 0.0});
  const std::vector<double> scores = {0.0, 0.0, 50.0};
  const Policy pi = gibbs_policy(prior, scores, 10.0);
  CHECK(pi.prob(2) == 0.0);
  CHECK(pi.prob(0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("large eta concentrates on the best score") {
  const std::vector<double> scores = {0.1, 0.9, 0.4, 0.2};
  const Policy pi = gibbs_policy(Policy::uniform(4), scores, 1000.0);
  CHECK(pi.prob(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kl_divergence(pi, Policy::uniform(4)) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-6));
}

TEST_CASE("gibbs preserves the score ranking of density ratios") {
  SplitMix64 rng(55);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t k = 3 + (rng.next() % 4);
    const Policy prior = Policy::from_row(testutil::random_prob_row(rng, k));
    std::vector<double> scores(k);
    for (double& s : scores) s = rng.next_double();
    const double eta = 0.1 + 5.0 * rng.next_double();
    const Policy pi = gibbs_policy(prior, scores, eta);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b)
        if (scores[a] > scores[b])
          CHECK(pi.prob(a) / prior.prob(a) >=
                pi.prob(b) / prior.prob(b) * (1.0 - 1e-12));
  }
}

TEST_CASE("kl to the prior grows with eta") {
  SplitMix64 rng(56);
  const std::size_t k = 5;
  const Policy prior = Policy::from_row(testutil::random_prob_row(rng, k));
  std::vector<double> scores(k);
  for (double& s : scores) s = rng.next_double();
  double prev = -1.0;
  for (double eta : {0.0, 0.1, 0.5, 1.0, 3.0, 10.0, 100.0}) {
    const double kl =
        kl_divergence(gibbs_policy(prior, scores, eta), prior);
    CHECK(kl >= prev - 1e-14);
    prev = kl;
  }
}

TEST_CASE("gibbs input validation") {
  const std::vector<double> scores = {1.0, 0.0};
  CHECK_THROWS_AS(gibbs_policy(Policy::uniform(2), scores, -1.0),
                  precondition_error);
  CHECK_THROWS_AS(gibbs_policy(Policy::uniform(3), scores, 1.0),
                  precondition_error);
  const std::vector<double> bad = {1.0, std::nan("")};
  CHECK_THROWS_AS(gibbs_policy(Policy::uniform(2), bad, 1.0),
                  precondition_error);
  CHECK_THROWS_AS(
      gibbs_policy(Policy::from_rows({{0.5, 0.5}, {0.5, 0.5}}), scores, 1.0),
      precondition_error);
}

TEST_CASE("certify a point mass against a uniform prior") {
  const History h = demo_history();
  BoundSpec spec;
  spec.kind = BoundKind::hoeffding_optimized;
  spec.beta = 0.05;
  const Certificate c = certify(Policy::point_mass(4, 3), h, Policy::uniform(4), spec);
  CHECK(c.kl_to_prior == std::log(4.0));
  const std::vector<double> scores = is_estimate_all_actions(h);
  CHECK(c.is_estimate == scores[3]);
  CHECK(c.bound_value ==
        optimized_hoeffding(std::log(4.0), h.size(), h.eps(), 0.05));
  CHECK(c.lower_bound == c.is_estimate - c.bound_value);
  CHECK(c.t == h.size());
  CHECK(c.eps == h.eps());
}

TEST_CASE("certify rejects unusable inputs") {
  const History h = demo_history();
  BoundSpec spec;
  spec.kind = BoundKind::hoeffding_optimized;
  // policy puts mass where the prior has none
  CHECK_THROWS_AS(
      certify(Policy::uniform(4), h, Policy::point_mass(4, 0), spec),
      precondition_error);
  CHECK_THROWS_AS(certify(Policy::uniform(3), h, Policy::uniform(3), spec),
                  precondition_error);
  const History ctx(2, 2, 0.25, {{0, 1.0, 0.5, 0}});
  CHECK_THROWS_AS(certify(Policy::uniform(2), ctx, Policy::uniform(2), spec),
                  precondition_error);
}

TEST_CASE("optimizer never does worse than the prior") {
  const History h = demo_history();
  const Policy prior = Policy::uniform(4);
  for (BoundKind kind : {BoundKind::hoeffding_optimized, BoundKind::hoeffding_grid,
                         BoundKind::hoeffding_parametric}) {
    BoundSpec spec;
    spec.kind = kind;
    spec.beta = 0.05;
    if (kind == BoundKind::hoeffding_parametric) spec.lambda = 50.0;
    if (kind == BoundKind::hoeffding_grid)
      spec.grid = default_lambda_grid(h.size(), h.eps(), spec.beta);
    const Certificate c = optimize_policy(h, prior, spec);
    CHECK(c.lower_bound >= objective_of(h, prior, spec, prior) - 1e-12);
  }
}

TEST_CASE("optimizer matches a dense eta scan") {
  const History h = demo_history();
  const Policy prior = Policy::uniform(4);
  BoundSpec spec;
  spec.kind = BoundKind::hoeffding_optimized;
  spec.beta = 0.05;
  const Certificate c = optimize_policy(h, prior, spec);

  const std::vector<double> scores = is_estimate_all_actions(h);
  double dense_best = objective_of(h, prior, spec, prior);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double eta = std::pow(10.0, -4.0 + 8.0 * i / (n - 1.0));
    dense_best = std::max(
        dense_best,
        objective_of(h, prior, spec, gibbs_policy(prior, scores, eta)));
  }
  CHECK(c.lower_bound >= dense_best - 1e-4);
}

TEST_CASE("optimizer dominates random policies of any admissible kl") {
  const History h = demo_history();
  const Policy prior = Policy::uniform(4);
  BoundSpec spec;
  spec.kind = BoundKind::hoeffding_optimized;
  spec.beta = 0.05;
  const Certificate c = optimize_policy(h, prior, spec);
  SplitMix64 rng(808);
  for (int i = 0; i < 10000; ++i) {
    const Policy pi = Policy::from_row(testutil::random_prob_row(rng, 4));
    CHECK(c.lower_bound >= objective_of(h, prior, spec, pi) - 1e-6);
  }
}

TEST_CASE("re-certification reproduces the certificate exactly") {
  const History h = demo_history();
  const Policy prior = Policy::from_row({0.4, 0.3, 0.2, 0.1});
  for (BoundKind kind : {BoundKind::hoeffding_optimized, BoundKind::hoeffding_grid,
                         BoundKind::bernstein_parametric}) {
    BoundSpec spec;
    spec.kind = kind;
    spec.beta = 0.1;
    if (kind == BoundKind::bernstein_parametric) spec.lambda = 0.25;
    if (kind == BoundKind::hoeffding_grid)
      spec.grid = default_lambda_grid(h.size(), h.eps(), spec.beta);
    const Certificate c = optimize_policy(h, prior, spec);
    const Certificate again = certify(c.policy, h, c.prior, bound_spec_of(c));
    CHECK(certificate_to_json(again) == certificate_to_json(c));
    CHECK(again.is_estimate == c.is_estimate);
    CHECK(again.kl_to_prior == c.kl_to_prior);
    CHECK(again.bound_value == c.bound_value);
    CHECK(again.lower_bound == c.lower_bound);
  }
}

TEST_CASE("certificate json round trip") {
  const History h = demo_history();
  BoundSpec spec;
  spec.kind = BoundKind::hoeffding_grid;
  spec.beta = 0.05;
  spec.grid = default_lambda_grid(h.size(), h.eps(), spec.beta, 8);
  const Certificate c = optimize_policy(h, Policy::uniform(4), spec);
  const std::string text = certificate_to_json(c);
  const Certificate back = certificate_from_json_text(text);
  CHECK(certificate_to_json(back) == text);
  CHECK(back.policy == c.policy);
  CHECK(back.prior == c.prior);
  CHECK(back.grid == c.grid);
  CHECK(back.bound_kind == c.bound_kind);

  // the auto-mode envelope parses down to its selected certificate
  const std::string wrapped =
      "{\"selected\": " + text + ", \"candidates\": [" + text + "]}";
  const Certificate sel = certificate_from_json_text(wrapped);
  CHECK(certificate_to_json(sel) == text);

  CHECK_THROWS_AS(certificate_from_json_text("not json"), parse_error);
  CHECK_THROWS_AS(certificate_from_json_text("{\"policy\": [0.5, 0.5]}"),
                  parse_error);
  CHECK_THROWS_AS(read_certificate_file("/tmp/missing_certificate.json"),
                  parse_error);
}

TEST_CASE("equal scores leave the optimizer at the prior") {
  // A constant-reward log gives every action the same estimate.
  std::vector<LoggedStep> steps;
  for (int n = 0; n < 40; ++n)
    steps.push_back({static_cast<std::size_t>(n % 2), 0.5, 0.5, std::nullopt});
  const History h(2, std::nullopt, 0.25, std::move(steps));
  const std::vector<double> scores = is_estimate_all_actions(h);
  CHECK(scores[0] == scores[1]);
  BoundSpec spec;
  spec.kind = BoundKind::hoeffding_optimized;
  spec.beta = 0.05;
  const Certificate c = optimize_policy(h, Policy::uniform(2), spec);
  CHECK(c.kl_to_prior <= 1e-12);
  CHECK(c.policy.prob(0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("optimized bernstein keeps the policy inside the kl budget") {
  const History h = demo_history(4, 100, 0.002, 11);
  const double budget = bernstein_admissible_kl(h.size(), h.eps(), 0.05);
  REQUIRE(budget > 0.0);
  REQUIRE(budget < std::log(4.0));  // the cap actually matters here
  BoundSpec spec;
  spec.kind = BoundKind::bernstein_optimized;
  spec.beta = 0.05;
  const Certificate c = optimize_policy(h, Policy::uniform(4), spec);
  CHECK(c.kl_to_prior <= budget);
  CHECK(std::isfinite(c.bound_value));
  CHECK(c.lower_bound >=
        objective_of(h, Policy::uniform(4), spec, Policy::uniform(4)) - 1e-12);
}

TEST_CASE("optimized bernstein with no budget at all") {
  const History h = demo_history(4, 100, 0.01, 12);
  BoundSpec spec;
  spec.kind = BoundKind::bernstein_optimized;
  spec.beta = 0.05;
  REQUIRE(bernstein_admissible_kl(h.size(), h.eps(), 0.05) < 0.0);
  CHECK_THROWS_AS(optimize_policy(h, Policy::uniform(4), spec),
                  inadmissible_kl_error);
}

TEST_CASE("bound spec of a certificate") {
  const History h = demo_history();
  BoundSpec spec;
  spec.kind = BoundKind::hoeffding_parametric;
  spec.lambda = 25.0;
  spec.beta = 0.05;
  const Certificate c = certify(Policy::uniform(4), h, Policy::uniform(4), spec);
  const BoundSpec back = bound_spec_of(c);
  CHECK(back.kind == spec.kind);
  CHECK(back.beta == spec.beta);
  REQUIRE(back.lambda.has_value());
  CHECK(*back.lambda == 25.0);
  CHECK(back.grid.empty());
}
