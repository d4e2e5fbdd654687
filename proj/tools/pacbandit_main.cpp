#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pacbandit/bounds.hpp"
#include "pacbandit/errors.hpp"
#include "pacbandit/estimators.hpp"
#include "pacbandit/experiments.hpp"
#include "pacbandit/history.hpp"
#include "pacbandit/optimizer.hpp"
#include "pacbandit/simulator.hpp"

namespace {

using nlohmann::ordered_json;
using namespace pacbandit;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!std::cout.good()) throw parse_error("error while writing to stdout");
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw parse_error("cannot open output file: " + out_path);
  out << text;
  if (!out.good()) throw parse_error("error while writing: " + out_path);
}

std::string slurp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

History load_history(const std::string& path) {
  if (path == "-") return read_history_jsonl(std::cin);
  return read_history_file(path);
}

Policy read_policy_path(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(slurp_file(path));
  } catch (const ordered_json::parse_error& e) {
    throw parse_error("invalid policy JSON in " + path + ": " + e.what());
  }
  try {
    if (!j.is_array() || j.empty())
      throw parse_error("a policy must be a nonempty JSON array");
    if (j[0].is_array())
      return Policy::from_rows(j.get<std::vector<std::vector<double>>>());
    return Policy::from_row(j.get<std::vector<double>>());
  } catch (const ordered_json::exception& e) {
    throw parse_error("invalid policy in " + path + ": " + e.what());
  } catch (const precondition_error& e) {
    throw parse_error("invalid policy in " + path + ": " + e.what());
  }
}

std::vector<double> parse_grid_csv(const std::string& csv) {
  std::vector<double> grid;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
      grid.push_back(v);
    } catch (const std::exception&) {
      throw parse_error("invalid grid entry: " + cell);
    }
  }
  if (grid.empty()) throw parse_error("empty lambda grid");
  return grid;
}

struct BoundFlags {
  std::string kind = "hoeffding-optimized";
  double beta = 0.05;
  std::optional<double> lambda;
  std::string grid_csv;
  int grid_size = 16;
  double grid_decades = 3.0;
};

void add_bound_flags(CLI::App& cmd, BoundFlags& f, const std::string& default_kind,
                     bool with_kind = true) {
  f.kind = default_kind;
  if (with_kind)
    cmd.add_option("--kind", f.kind, "bound kind")->capture_default_str();
  cmd.add_option("--beta", f.beta, "failure probability in (0, 1)")
      ->capture_default_str();
  cmd.add_option("--lambda", [&f](const std::vector<std::string>& v) {
        f.lambda = std::stod(v.front());
        return true;
      }, "lambda for the parametric bounds")
      ->type_name("FLOAT");
  cmd.add_option("--grid", f.grid_csv,
                 "comma-separated lambda grid for the grid bound");
  cmd.add_option("--grid-size", f.grid_size, "default grid: number of points")
      ->capture_default_str();
  cmd.add_option("--grid-decades", f.grid_decades,
                 "default grid: decades spanned")
      ->capture_default_str();
}

BoundSpec make_bound_spec(const BoundFlags& f, long long t, double eps) {
  BoundSpec spec;
  spec.kind = bound_kind_from_string(f.kind);
  spec.beta = f.beta;
  spec.lambda = f.lambda;
  if (spec.kind == BoundKind::hoeffding_grid) {
    spec.grid = f.grid_csv.empty()
                    ? default_lambda_grid(t, eps, f.beta, f.grid_size, f.grid_decades)
                    : parse_grid_csv(f.grid_csv);
  } else if (!f.grid_csv.empty()) {
    throw precondition_error(f.kind + " does not take a grid");
  }
  return spec;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string config_path;
  std::string out_path;
  std::string model_out_path;
  SimConfig cfg;
  std::string family = "bernoulli";
  std::string scheme = "fixed-uniform";
  std::optional<std::size_t> num_contexts;
};

int run_simulate(const SimulateArgs& args) {
  SimConfig cfg;
  if (!args.config_path.empty()) {
    cfg = read_sim_config_file(args.config_path);
  } else {
    cfg = args.cfg;
    cfg.num_contexts = args.num_contexts;
    cfg.reward_family = reward_family_from_string(args.family);
    cfg.scheme = logging_scheme_from_string(args.scheme);
  }
  const History h = generate_history(cfg);
  emit(history_to_jsonl(h), args.out_path);
  std::string model_path = args.model_out_path;
  if (model_path.empty() && !args.out_path.empty())
    model_path = args.out_path + ".model.json";
  if (!model_path.empty())
    write_reward_model_file(build_reward_model(cfg), model_path);
  return 0;
}

// --- estimate ---------------------------------------------------------------

struct EstimateArgs {
  std::string history_path;
  std::string policy_path;
  std::string out_path;
  std::string format = "json";
};

int run_estimate(const EstimateArgs& args) {
  const History h = load_history(args.history_path);
  EstimateReport report;
  if (args.policy_path.empty())
    report = make_estimate_report(h);
  else
    report = make_estimate_report(h, read_policy_path(args.policy_path));
  emit(args.format == "csv" ? estimate_report_to_csv(report)
                            : estimate_report_to_json(report),
       args.out_path);
  return 0;
}

// --- bound ------------------------------------------------------------------

struct BoundArgs {
  BoundFlags flags;
  double kl = 0.0;
  long long t = 0;
  double eps = 0.0;
  std::string certificate_path;
  std::string history_path;
  std::string out_path;
  std::string format = "json";
};

bool close_enough(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

int run_verify_certificate(const BoundArgs& args) {
  const Certificate cert = read_certificate_file(args.certificate_path);
  ordered_json checks = ordered_json::array();
  bool ok = true;
  const auto record = [&](const std::string& name, bool passed,
                          const std::string& detail) {
    ordered_json c;
    c["name"] = name;
    c["ok"] = passed;
    c["detail"] = detail;
    checks.push_back(c);
    ok = ok && passed;
  };

  const double kl = kl_divergence(cert.policy.row(), cert.prior.row());
  record("kl_matches", close_enough(kl, cert.kl_to_prior, 1e-9),
         "recomputed " + ordered_json(kl).dump());

  double recomputed_bound = cert.bound_value;
  try {
    const BoundResult b = evaluate_bound(bound_spec_of(cert), kl, cert.t, cert.eps);
    recomputed_bound = b.value;
    record("bound_matches", close_enough(b.value, cert.bound_value, 1e-9),
           "recomputed " + ordered_json(b.value).dump());
  } catch (const precondition_error& e) {
    record("bound_matches", false, e.what());
  }
  record("lower_bound_consistent",
         std::abs((cert.is_estimate - cert.bound_value) - cert.lower_bound) <= 1e-12,
         "is_estimate - bound_value");

  if (!args.history_path.empty()) {
    const History h = load_history(args.history_path);
    record("t_matches", h.size() == cert.t,
           "history t = " + std::to_string(h.size()));
    record("eps_matches", h.eps() == cert.eps, "history eps");
    const double est = is_estimate_policy(cert.policy, h);
    record("estimate_matches", close_enough(est, cert.is_estimate, 1e-9),
           "recomputed " + ordered_json(est).dump());
  }

  ordered_json out;
  out["verified"] = ok;
  out["checks"] = checks;
  out["recomputed_bound"] = recomputed_bound;
  emit(out.dump(2) + "\n", args.out_path);
  if (!ok) {
    std::cerr << "certificate verification failed\n";
    return 1;
  }
  return 0;
}

int run_bound(const BoundArgs& args) {
  if (!args.certificate_path.empty()) return run_verify_certificate(args);
  if (args.t < 1)
    throw precondition_error("bound needs --t >= 1 (or --certificate)");
  const BoundSpec spec = make_bound_spec(args.flags, args.t, args.eps);
  const BoundResult r = evaluate_bound(spec, args.kl, args.t, args.eps);
  if (spec.kind == BoundKind::bernstein_oracle) {
    const BernsteinOracle o = bernstein_oracle(args.kl, args.t, args.eps, spec.beta);
    if (!o.feasible)
      std::cerr << "note: oracle lambda " << o.lambda
                << " lies outside the valid range (0, 1); the reported value "
                   "is a benchmark only\n";
  }
  emit(args.format == "csv" ? bound_result_to_csv(r) : bound_result_to_json(r),
       args.out_path);
  return 0;
}

// --- optimize ---------------------------------------------------------------

struct OptimizeArgs {
  std::string history_path;
  std::string prior_path;
  BoundFlags flags;
  std::string out_path;
  std::string format = "json";
};

std::string certificate_to_csv(const Certificate& c) {
  const auto fmt = [](double v) { return ordered_json(v).dump(); };
  std::ostringstream os;
  os << "bound_kind,is_estimate,kl,bound_value,lower_bound,beta,t,eps,lambda\n";
  os << to_string(c.bound_kind) << ',' << fmt(c.is_estimate) << ','
     << fmt(c.kl_to_prior) << ',' << fmt(c.bound_value) << ','
     << fmt(c.lower_bound) << ',' << fmt(c.beta) << ',' << c.t << ','
     << fmt(c.eps) << ',';
  if (c.lambda) os << fmt(*c.lambda);
  os << '\n';
  return os.str();
}

int run_optimize(const OptimizeArgs& args) {
  const History h = load_history(args.history_path);
  const Policy prior = args.prior_path.empty()
                           ? Policy::uniform(h.num_actions())
                           : read_policy_path(args.prior_path);
  if (args.flags.kind != "auto") {
    const BoundKind kind = bound_kind_from_string(args.flags.kind);
    if (kind == BoundKind::hoeffding_oracle || kind == BoundKind::bernstein_oracle)
      throw precondition_error(
          "oracle bounds are benchmarks, not a-priori certificates; pick a "
          "parametric, grid or optimized kind");
    const BoundSpec spec = make_bound_spec(args.flags, h.size(), h.eps());
    const Certificate cert = optimize_policy(h, prior, spec);
    emit(args.format == "csv" ? certificate_to_csv(cert)
                              : certificate_to_json(cert),
         args.out_path);
    return 0;
  }

  // auto: try both lambda-free certified bounds, keep every candidate and
  // select the larger certified lower bound.
  std::vector<Certificate> candidates;
  std::string skipped_note;
  for (BoundKind kind :
       {BoundKind::hoeffding_optimized, BoundKind::bernstein_optimized}) {
    BoundSpec spec;
    spec.kind = kind;
    spec.beta = args.flags.beta;
    try {
      candidates.push_back(optimize_policy(h, prior, spec));
    } catch (const inadmissible_kl_error& e) {
      skipped_note = std::string(to_string(kind)) + " skipped: " + e.what();
    }
  }
  if (candidates.empty())
    throw precondition_error("no bound kind is applicable: " + skipped_note);
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i)
    if (candidates[i].lower_bound > candidates[best].lower_bound) best = i;

  if (args.format == "csv") {
    emit(certificate_to_csv(candidates[best]), args.out_path);
    return 0;
  }
  ordered_json out;
  out["selected"] = ordered_json::parse(certificate_to_json(candidates[best]));
  ordered_json cands = ordered_json::array();
  for (const Certificate& c : candidates)
    cands.push_back(ordered_json::parse(certificate_to_json(c)));
  out["candidates"] = cands;
  if (!skipped_note.empty()) out["note"] = skipped_note;
  emit(out.dump(2) + "\n", args.out_path);
  return 0;
}

// --- coverage ---------------------------------------------------------------

struct CoverageArgs {
  std::string config_path;
  int m = 200;
  BoundFlags flags;
  std::string mode = "optimized";
  std::string prior_path;
  std::string policy_path;
  int threads = 1;
  std::string out_path;
  std::string format = "json";
};

int run_coverage_cmd(const CoverageArgs& args) {
  const SimConfig cfg = read_sim_config_file(args.config_path);
  const BoundSpec spec = make_bound_spec(args.flags, cfg.horizon, cfg.eps);
  std::optional<Policy> prior;
  if (!args.prior_path.empty()) prior = read_policy_path(args.prior_path);
  std::optional<Policy> fixed;
  if (!args.policy_path.empty()) fixed = read_policy_path(args.policy_path);
  const CoverageReport report =
      pacbandit::run_coverage(cfg, args.m, spec, policy_mode_from_string(args.mode),
                              prior, fixed, args.threads);
  std::cerr << "coverage: " << report.violations << " / " << report.m
            << " violations (rate " << report.violation_rate << ", beta "
            << report.beta << ")\n";
  emit(args.format == "csv" ? coverage_to_csv(report) : coverage_to_json(report),
       args.out_path);
  return 0;
}

// --- compare ----------------------------------------------------------------

struct CompareArgs {
  double kl = 0.0;
  long long t = 0;
  double eps = 0.0;
  BoundFlags flags;
  std::string out_path;
  std::string format = "json";
};

int run_compare(const CompareArgs& args) {
  std::vector<double> grid;
  if (!args.flags.grid_csv.empty()) grid = parse_grid_csv(args.flags.grid_csv);
  const CompareTable tbl = compare_bounds(args.kl, args.t, args.eps,
                                          args.flags.beta, args.flags.lambda, grid);
  emit(args.format == "csv" ? compare_to_csv(tbl) : compare_to_json(tbl),
       args.out_path);
  return 0;
}

void add_format_option(CLI::App& cmd, std::string& format) {
  cmd.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "importance-sampling evaluation of offline bandit logs with "
      "PAC-Bayes certificates"};
  app.require_subcommand(1);
  int rc = 0;

  SimulateArgs sim;
  auto* simulate = app.add_subcommand(
      "simulate", "generate a synthetic logged-bandit history");
  simulate->add_option("--config", sim.config_path,
                       "JSON config; its values take precedence over flags");
  simulate->add_option("--K", sim.cfg.num_actions, "number of actions");
  simulate->add_option("--C", [&sim](const std::vector<std::string>& v) {
    sim.num_contexts = std::stoull(v.front());
    return true;
  }, "number of contexts (omit for multi-armed)")
      ->type_name("UINT");
  simulate->add_option("--t", sim.cfg.horizon, "number of steps");
  simulate->add_option("--eps", sim.cfg.eps, "logging probability floor");
  simulate->add_option("--seed", sim.cfg.seed, "master RNG seed");
  simulate->add_option("--family", sim.family, "reward family")
      ->check(CLI::IsMember({"bernoulli", "deterministic"}));
  simulate->add_option("--scheme", sim.scheme, "logging scheme")
      ->check(CLI::IsMember({"fixed-uniform", "fixed-policy", "round-robin"}));
  simulate->add_option("--out", sim.out_path, "history output path (default stdout)");
  simulate->add_option("--model-out", sim.model_out_path,
                       "ground-truth model output path (default <out>.model.json)");
  simulate->callback([&] { rc = run_simulate(sim); });

  EstimateArgs est;
  auto* estimate = app.add_subcommand(
      "estimate", "per-action (and optional policy) importance-sampling estimates");
  estimate->add_option("--history", est.history_path, "history JSONL ('-' = stdin)")
      ->required();
  estimate->add_option("--policy", est.policy_path, "policy JSON to evaluate");
  estimate->add_option("--out", est.out_path, "output path (default stdout)");
  add_format_option(*estimate, est.format);
  estimate->callback([&] { rc = run_estimate(est); });

  BoundArgs bnd;
  auto* bound = app.add_subcommand(
      "bound", "evaluate a deviation bound, or re-verify a certificate");
  add_bound_flags(*bound, bnd.flags, "hoeffding-optimized");
  bound->add_option("--kl", bnd.kl, "KL(policy || prior)")->capture_default_str();
  bound->add_option("--t", bnd.t, "number of logged steps");
  bound->add_option("--eps", bnd.eps, "logging probability floor");
  bound->add_option("--certificate", bnd.certificate_path,
                    "re-verify this certificate instead of evaluating");
  bound->add_option("--history", bnd.history_path,
                    "with --certificate: also recheck the estimate");
  bound->add_option("--out", bnd.out_path, "output path (default stdout)");
  add_format_option(*bound, bnd.format);
  bound->callback([&] { rc = run_bound(bnd); });

  OptimizeArgs opt;
  auto* optimize = app.add_subcommand(
      "optimize", "search Gibbs policies for the best certified lower bound");
  optimize->add_option("--history", opt.history_path, "history JSONL ('-' = stdin)")
      ->required();
  optimize->add_option("--prior", opt.prior_path, "prior policy JSON (default uniform)");
  add_bound_flags(*optimize, opt.flags, "auto");
  optimize->add_option("--out", opt.out_path, "output path (default stdout)");
  add_format_option(*optimize, opt.format);
  optimize->callback([&] { rc = run_optimize(opt); });

  CoverageArgs cov;
  auto* coverage = app.add_subcommand(
      "coverage", "Monte Carlo violation-rate experiment for a bound");
  coverage->add_option("--config", cov.config_path, "simulation JSON config")
      ->required();
  coverage->add_option("--m", cov.m, "number of replicates")->capture_default_str();
  add_bound_flags(*coverage, cov.flags, "hoeffding-optimized");
  coverage->add_option("--mode", cov.mode, "policy per replicate")
      ->check(CLI::IsMember({"fixed", "optimized"}))
      ->capture_default_str();
  coverage->add_option("--prior", cov.prior_path, "prior policy JSON (default uniform)");
  coverage->add_option("--policy", cov.policy_path,
                       "fixed policy JSON (default: the prior)");
  coverage->add_option("--threads", cov.threads, "worker threads")
      ->capture_default_str();
  coverage->add_option("--out", cov.out_path, "output path (default stdout)");
  add_format_option(*coverage, cov.format);
  coverage->callback([&] { rc = run_coverage_cmd(cov); });

  CompareArgs cmp;
  auto* compare = app.add_subcommand(
      "compare", "all bound kinds side by side at one (kl, t, eps, beta)");
  compare->add_option("--kl", cmp.kl, "KL(policy || prior)")->capture_default_str();
  compare->add_option("--t", cmp.t, "number of logged steps")->required();
  compare->add_option("--eps", cmp.eps, "logging probability floor")->required();
  add_bound_flags(*compare, cmp.flags, "hoeffding-optimized", false);
  compare->add_option("--out", cmp.out_path, "output path (default stdout)");
  add_format_option(*compare, cmp.format);
  compare->callback([&] { rc = run_compare(cmp); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Fold CLI11's assorted nonzero codes into the documented usage code.
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const parse_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const precondition_error& e) {
    std::cerr << "precondition violated: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return rc;
}
