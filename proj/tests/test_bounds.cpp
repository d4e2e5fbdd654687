#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "pacbandit/bounds.hpp"
#include "pacbandit/rng.hpp"
#include "test_util.hpp"

using namespace pacbandit;
using testutil::rel_err;

namespace {

constexpr double kEM2 = 0.7182818284590452;  // e - 2

// Random (kl, t, eps, beta) with eps kept away from the extremes.
struct Tuple {
  double kl;
  long long t;
  double eps;
  double beta;
};

Tuple random_tuple(SplitMix64& rng) {
  Tuple x;
  x.kl = 5.0 * rng.next_double();
  x.t = 1 + static_cast<long long>(rng.next() % 100000);
  x.eps = 0.001 + 0.5 * rng.next_double();
  x.beta = 0.01 + 0.4 * rng.next_double();
  return x;
}

}  // namespace

TEST_CASE("bound kind strings round trip") {
  for (BoundKind k :
       {BoundKind::hoeffding_parametric, BoundKind::bernstein_parametric,
        BoundKind::hoeffding_oracle, BoundKind::bernstein_oracle,
        BoundKind::hoeffding_grid, BoundKind::hoeffding_optimized,
        BoundKind::bernstein_optimized})
    CHECK(bound_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(bound_kind_from_string("nonsense"), parse_error);
}

TEST_CASE("parametric hoeffding pinned value") {
  // lambda/(8 t eps^2) = 100/2000 = 0.05; ln(2/beta)/lambda = ln(20)/100.
  CHECK(rel_err(hoeffding_parametric(0.0, 100.0, 1000, 0.5, 0.1),
                0.07995732273553991) <= 1e-12);
}

TEST_CASE("parametric bernstein pinned value") {
  CHECK(rel_err(bernstein_parametric(0.0, 0.5, 100, 0.1, 0.05),
                7.449587091073777) <= 1e-12);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(hoeffding_parametric(-0.1, 1.0, 100, 0.1, 0.05),
                  precondition_error);
  CHECK_THROWS_AS(hoeffding_parametric(0.0, 0.0, 100, 0.1, 0.05),
                  precondition_error);
  CHECK_THROWS_AS(hoeffding_parametric(0.0, 1.0, 0, 0.1, 0.05),
                  precondition_error);
  CHECK_THROWS_AS(hoeffding_parametric(0.0, 1.0, 100, 0.0, 0.05),
                  precondition_error);
  CHECK_THROWS_AS(hoeffding_parametric(0.0, 1.0, 100, 1.5, 0.05),
                  precondition_error);
  CHECK_THROWS_AS(hoeffding_parametric(0.0, 1.0, 100, 0.1, 0.0),
                  precondition_error);
  CHECK_THROWS_AS(hoeffding_parametric(0.0, 1.0, 100, 0.1, 1.0),
                  precondition_error);
  CHECK_THROWS_AS(bernstein_parametric(0.0, 1.0, 100, 0.1, 0.05),
                  precondition_error);
  CHECK_THROWS_AS(bernstein_parametric(0.0, 0.0, 100, 0.1, 0.05),
                  precondition_error);
  CHECK_NOTHROW(bernstein_parametric(0.0, 0.999, 100, 0.1, 0.05));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(optimized_hoeffding(inf, 100, 0.1, 0.05), precondition_error);
}

TEST_CASE("hoeffding oracle pinned values") {
  CHECK(rel_err(oracle_lambda_hoeffding(1.0, 100, 0.2, 0.05),
                12.249250692660591) <= 1e-12);
  CHECK(rel_err(hoeffding_oracle(1.0, 100, 0.2, 0.05),
                0.7655781682912869) <= 1e-12);
  CHECK(rel_err(hoeffding_oracle(0.0, 1000, 0.1, 0.05),
                0.4294694083467376) <= 1e-12);
}

TEST_CASE("bernstein oracle pinned values") {
  CHECK(rel_err(oracle_lambda_bernstein(0.0, 100, 0.001, 0.05),
                0.5067395415260957) <= 1e-12);
  const BernsteinOracle o = bernstein_oracle(0.0, 100, 0.001, 0.05);
  CHECK(o.feasible);
  CHECK(rel_err(o.value, 14.559272177594491) <= 1e-12);

  const BernsteinOracle big = bernstein_oracle(0.0, 1000, 0.1, 0.05);
  CHECK(!big.feasible);
  CHECK(rel_err(big.lambda, 16.024511316919391) <= 1e-12);
}

TEST_CASE("parametric bound at the oracle lambda equals the oracle value") {
  SplitMix64 rng(2024);
  int bernstein_checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const Tuple x = random_tuple(rng);
    const double lh = oracle_lambda_hoeffding(x.kl, x.t, x.eps, x.beta);
    CHECK(rel_err(hoeffding_parametric(x.kl, lh, x.t, x.eps, x.beta),
                  hoeffding_oracle(x.kl, x.t, x.eps, x.beta)) <= 1e-12);

    const BernsteinOracle o = bernstein_oracle(x.kl, x.t, x.eps, x.beta);
    if (o.feasible) {
      ++bernstein_checked;
      CHECK(rel_err(bernstein_parametric(x.kl, o.lambda, x.t, x.eps, x.beta),
                    o.value) <= 1e-12);
    }
  }
  // generic tuples rarely land where the Bernstein oracle is feasible
  // (t eps (kl + ln(2/beta)) < 2(e-2)), so sample that region directly
  for (int i = 0; i < 500; ++i) {
    const double kl = 5.0 * rng.next_double();
    const double beta = 0.01 + 0.4 * rng.next_double();
    const long long t = 1 + static_cast<long long>(rng.next() % 30);
    const double cap = 2.0 * kEM2 / (kl + std::log(2.0 / beta));
    const double eps =
        std::min(1.0, (0.01 + 0.98 * rng.next_double()) * cap /
                          static_cast<double>(t));
    const BernsteinOracle o = bernstein_oracle(kl, t, eps, beta);
    if (!o.feasible) continue;
    ++bernstein_checked;
    CHECK(rel_err(bernstein_parametric(kl, o.lambda, t, eps, beta), o.value) <=
          1e-12);
  }
  CHECK(bernstein_checked > 100);
}

TEST_CASE("oracle is the parametric minimum") {
  SplitMix64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const Tuple x = random_tuple(rng);
    const double lam = std::exp(-3.0 + 9.0 * rng.next_double());
    CHECK(hoeffding_parametric(x.kl, lam, x.t, x.eps, x.beta) >=
          hoeffding_oracle(x.kl, x.t, x.eps, x.beta) * (1.0 - 1e-12));
    if (lam < 1.0)
      CHECK(bernstein_parametric(x.kl, lam, x.t, x.eps, x.beta) >=
            bernstein_oracle(x.kl, x.t, x.eps, x.beta).value * (1.0 - 1e-12));
  }
}

TEST_CASE("grid union with a singleton grid is the parametric bound") {
  SplitMix64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const Tuple x = random_tuple(rng);
    const double lam = std::exp(-2.0 + 6.0 * rng.next_double());
    CHECK(hoeffding_grid_union(x.kl, {lam}, x.t, x.eps, x.beta) ==
          hoeffding_parametric(x.kl, lam, x.t, x.eps, x.beta));
  }
}

TEST_CASE("grid union dominates the oracle at the split budget") {
  SplitMix64 rng(12);
  for (int i = 0; i < 200; ++i) {
    const Tuple x = random_tuple(rng);
    const std::vector<double> grid = default_lambda_grid(x.t, x.eps, x.beta);
    const double beta_each = x.beta / static_cast<double>(grid.size());
    CHECK(hoeffding_grid_union(x.kl, grid, x.t, x.eps, x.beta) >=
          hoeffding_oracle(x.kl, x.t, x.eps, beta_each) * (1.0 - 1e-12));
  }
}

TEST_CASE("a dense grid gets within 1e-4 of the oracle") {
  const Tuple x = {2.0, 500, 0.05, 0.05};
  const int n = 2001;
  const double beta_each = x.beta / n;
  const double center = oracle_lambda_hoeffding(x.kl, x.t, x.eps, beta_each);
  std::vector<double> grid;
  for (int i = 0; i < n; ++i)
    grid.push_back(center * std::pow(10.0, -1.0 + 2.0 * i / (n - 1)));
  const double got = hoeffding_grid_union(x.kl, grid, x.t, x.eps, x.beta);
  const double oracle = hoeffding_oracle(x.kl, x.t, x.eps, beta_each);
  CHECK(got >= oracle * (1.0 - 1e-12));
  CHECK(got <= oracle * (1.0 + 1e-4));
}

TEST_CASE("default lambda grid shape") {
  const std::vector<double> grid = default_lambda_grid(500, 0.05, 0.05);
  CHECK(grid.size() == 16);
  const double center = oracle_lambda_hoeffding(0.0, 500, 0.05, 0.05);
  CHECK(grid.front() == doctest::Approx(center * std::pow(10.0, -1.5)));
  CHECK(grid.back() == doctest::Approx(center * std::pow(10.0, 1.5)));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(grid[i] > 0.0);
    if (i > 0) CHECK(grid[i] > grid[i - 1]);
  }
  CHECK_THROWS_AS(hoeffding_grid_union(0.0, {}, 100, 0.1, 0.05),
                  precondition_error);
  CHECK_THROWS_AS(hoeffding_grid_union(0.0, {0.0, 1.0}, 100, 0.1, 0.05),
                  precondition_error);
}

TEST_CASE("per level budgets sum to the total") {
  for (double beta : {0.01, 0.05, 0.25}) {
    double sum = 0.0;
    for (int k = 1000000; k >= 1; --k) sum += beta_allocation(k, beta);
    CHECK(std::abs(sum - beta) <= 1e-5);
  }
  CHECK_THROWS_AS(beta_allocation(0, 0.05), precondition_error);
}

TEST_CASE("optimized hoeffding pinned value") {
  CHECK(rel_err(optimized_hoeffding(0.0, 1000, 0.1, 0.05),
                0.6654430277533286) <= 1e-12);
  // within the coarse tolerance of the published figure as well
  CHECK(std::abs(optimized_hoeffding(0.0, 1000, 0.1, 0.05) - 0.6654) <= 1e-3);
}

TEST_CASE("optimized hoeffding dominates its oracle benchmark") {
  SplitMix64 rng(31);
  for (int i = 0; i < 1000; ++i) {
    const Tuple x = random_tuple(rng);
    CHECK(optimized_hoeffding(x.kl, x.t, x.eps, x.beta) >=
          hoeffding_oracle(x.kl, x.t, x.eps, x.beta));
  }
}

TEST_CASE("ratio of optimized to oracle hoeffding") {
  const double beta = 0.05;
  const double l1 = std::log(4.0 * std::numbers::pi / (3.0 * beta));
  const double l2 = std::log(2.0 / beta);
  for (double kl : {0.0, 1.0, 5.0, 20.0}) {
    const double ratio = optimized_hoeffding(kl, 1000, 0.1, beta) /
                         hoeffding_oracle(kl, 1000, 0.1, beta);
    const double want = std::sqrt(2.0) * std::sqrt((kl + l1) / (kl + l2));
    CHECK(rel_err(ratio, want) <= 1e-12);
  }
  const double at_zero = optimized_hoeffding(0.0, 1000, 0.1, beta) /
                         hoeffding_oracle(0.0, 1000, 0.1, beta);
  CHECK(rel_err(at_zero, 1.5494538489132029) <= 1e-12);
  CHECK(std::abs(at_zero - 1.5493) <= 1e-3);

  // the ratio decreases toward sqrt(2) as kl grows
  double prev = at_zero;
  for (double kl : {1.0, 10.0, 100.0, 1e4, 1e6}) {
    const double r = optimized_hoeffding(kl, 1000, 0.1, beta) /
                     hoeffding_oracle(kl, 1000, 0.1, beta);
    CHECK(r < prev);
    CHECK(r > std::sqrt(2.0));
    prev = r;
  }
}

TEST_CASE("admissible kl threshold pinned value") {
  CHECK(rel_err(bernstein_admissible_kl(100, 0.001, 0.05),
                4.338378557533484) <= 1e-12);
  CHECK(std::abs(bernstein_admissible_kl(100, 0.001, 0.05) - 4.3384) <= 1e-3);
}

TEST_CASE("optimized bernstein pinned value and admissibility") {
  CHECK(rel_err(bernstein_optimized(1.0, 100, 0.001, 0.05),
                12.488294301459031) <= 1e-12);

  const double thr = bernstein_admissible_kl(100, 0.001, 0.05);
  CHECK_NOTHROW(bernstein_optimized(thr, 100, 0.001, 0.05));
  try {
    bernstein_optimized(std::nextafter(thr, 1e9), 100, 0.001, 0.05);
    FAIL("expected inadmissible_kl_error");
  } catch (const inadmissible_kl_error& e) {
    CHECK(e.kl > thr);
    CHECK(e.admissible_kl == thr);
    CHECK(std::string(e.what()).find("admissible") != std::string::npos);
  }

  // t eps too large: no kl is admissible at all
  CHECK(bernstein_admissible_kl(1000, 0.1, 0.05) < 0.0);
  CHECK_THROWS_AS(bernstein_optimized(0.0, 1000, 0.1, 0.05),
                  inadmissible_kl_error);
}

TEST_CASE("discretized level lambda stays in the parametric range") {
  // lambda at level K = ceil(threshold), the largest level the admissible
  // budget can reach: sqrt(t eps (K + ln(2 pi K^2 / (6 beta))) / (2 (e-2))).
  SplitMix64 rng(77);
  int checked = 0;
  while (checked < 1000) {
    const double beta = 0.01 + 0.29 * rng.next_double();
    const long long t = 1 + static_cast<long long>(rng.next() % 1000000);
    const double cap = 2.0 * kEM2 / (2.0 + std::log(2.0 / beta));
    const double eps =
        std::min(1.0, (0.01 + 0.98 * rng.next_double()) * cap /
                          static_cast<double>(t));
    const double thr = bernstein_admissible_kl(t, eps, beta);
    if (!(thr > 0.0)) continue;
    const double level = std::ceil(thr);
    const double lam = std::sqrt(
        static_cast<double>(t) * eps *
        (level + std::log(2.0 * std::numbers::pi * level * level / (6.0 * beta))) /
        (2.0 * kEM2));
    CHECK(lam <= 1.0);
    ++checked;
  }
}

TEST_CASE("envelope gap is nonnegative, zero at one, and beta free") {
  for (double beta : {0.01, 0.05, 0.25}) {
    CHECK(std::abs(envelope_gap(1.0, beta)) <= 1e-12);
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const double x = std::pow(10.0, -6.0 + 12.0 * i / (n - 1.0));
      CHECK(envelope_gap(x, beta) >= -1e-12);
    }
  }
  for (double x : {1e-6, 1e-3, 0.5, 1.0, 2.0, 17.0, 1e3, 1e6})
    CHECK(std::abs(envelope_gap(x, 0.01) - envelope_gap(x, 0.25)) <= 1e-12);
  CHECK(rel_err(envelope_gap(0.5, 0.05), 0.07536414490356185) <= 1e-12);
  CHECK_THROWS_AS(envelope_gap(0.0, 0.05), precondition_error);
}

TEST_CASE("all bounds increase with kl") {
  // t eps = 0.1 keeps every kl below the optimized-Bernstein budget (4.34).
  const long long t = 100;
  const double eps = 0.001, beta = 0.05;
  double prev_h = -1.0, prev_b = -1.0, prev_oh = -1.0, prev_ob = -1.0;
  for (double kl : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    const double h = optimized_hoeffding(kl, t, eps, beta);
    const double oh = hoeffding_oracle(kl, t, eps, beta);
    const double b = bernstein_optimized(kl, t, eps, beta);
    const double ob = bernstein_oracle(kl, t, eps, beta).value;
    CHECK(h > prev_h);
    CHECK(b > prev_b);
    CHECK(oh > prev_oh);
    CHECK(ob > prev_ob);
    prev_h = h;
    prev_b = b;
    prev_oh = oh;
    prev_ob = ob;
  }
}

TEST_CASE("bound spec validation") {
  BoundSpec s;
  s.kind = BoundKind::hoeffding_parametric;
  CHECK_THROWS_AS(validate(s), precondition_error);  // missing lambda
  s.lambda = 2.0;
  CHECK_NOTHROW(validate(s));
  s.kind = BoundKind::bernstein_parametric;
  CHECK_THROWS_AS(validate(s), precondition_error);  // lambda >= 1
  s.lambda = 0.5;
  CHECK_NOTHROW(validate(s));
  s.kind = BoundKind::hoeffding_optimized;
  CHECK_THROWS_AS(validate(s), precondition_error);  // stray lambda
  s.lambda.reset();
  CHECK_NOTHROW(validate(s));
  s.kind = BoundKind::hoeffding_grid;
  CHECK_THROWS_AS(validate(s), precondition_error);  // missing grid
  s.grid = {1.0, 2.0};
  CHECK_NOTHROW(validate(s));
  s.kind = BoundKind::hoeffding_oracle;
  CHECK_THROWS_AS(validate(s), precondition_error);  // stray grid
}

TEST_CASE("evaluate_bound dispatch") {
  BoundSpec s;
  s.beta = 0.05;

  s.kind = BoundKind::hoeffding_parametric;
  s.lambda = 3.0;
  BoundResult r = evaluate_bound(s, 0.5, 200, 0.1);
  CHECK(r.kind == BoundKind::hoeffding_parametric);
  CHECK(r.value == hoeffding_parametric(0.5, 3.0, 200, 0.1, 0.05));
  CHECK(r.lambda == 3.0);
  CHECK(!r.admissible);
  CHECK(r.kl == 0.5);
  CHECK(r.t == 200);
  CHECK(r.eps == 0.1);

  s.kind = BoundKind::hoeffding_oracle;
  s.lambda.reset();
  r = evaluate_bound(s, 0.5, 200, 0.1);
  CHECK(r.value == hoeffding_oracle(0.5, 200, 0.1, 0.05));
  CHECK(*r.lambda == oracle_lambda_hoeffding(0.5, 200, 0.1, 0.05));

  s.kind = BoundKind::hoeffding_grid;
  s.grid = default_lambda_grid(200, 0.1, 0.05);
  r = evaluate_bound(s, 0.5, 200, 0.1);
  CHECK(r.value == hoeffding_grid_union(0.5, s.grid, 200, 0.1, 0.05));
  CHECK(r.lambda.has_value());
  const double beta_each = 0.05 / static_cast<double>(s.grid.size());
  CHECK(hoeffding_parametric(0.5, *r.lambda, 200, 0.1, beta_each) == r.value);
  s.grid.clear();

  s.kind = BoundKind::hoeffding_optimized;
  r = evaluate_bound(s, 0.5, 200, 0.1);
  CHECK(r.value == optimized_hoeffding(0.5, 200, 0.1, 0.05));
  CHECK(!r.lambda);

  s.kind = BoundKind::bernstein_optimized;
  // t eps = 0.2 keeps kl = 0.5 under the admissible budget (about 0.75)
  r = evaluate_bound(s, 0.5, 200, 0.001);
  CHECK(r.value == bernstein_optimized(0.5, 200, 0.001, 0.05));
  CHECK(r.admissible.has_value());
  CHECK(*r.admissible);
}

TEST_CASE("bound result serialization") {
  BoundSpec s;
  s.kind = BoundKind::hoeffding_optimized;
  s.beta = 0.05;
  const BoundResult r = evaluate_bound(s, 0.0, 1000, 0.1);
  const std::string json = bound_result_to_json(r);
  CHECK(json.find("\"kind\": \"hoeffding-optimized\"") != std::string::npos);
  CHECK(json.find("\"lambda\": null") != std::string::npos);
  CHECK(json.find("\"admissible\": null") != std::string::npos);
  const std::string csv = bound_result_to_csv(r);
  CHECK(csv.find("kind,value,kl,t,eps,beta,lambda,admissible\n") == 0);
  CHECK(csv.find("hoeffding-optimized,") != std::string::npos);
}
