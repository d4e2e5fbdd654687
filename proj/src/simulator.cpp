#include "pacbandit/simulator.hpp"

#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace pacbandit {

using ordered_json = nlohmann::ordered_json;

std::string to_string(LoggingScheme s) {
  switch (s) {
    case LoggingScheme::fixed_uniform: return "fixed-uniform";
    case LoggingScheme::fixed_policy: return "fixed-policy";
    case LoggingScheme::round_robin: return "round-robin";
  }
  throw precondition_error("unknown logging scheme");
}

LoggingScheme logging_scheme_from_string(const std::string& s) {
  if (s == "fixed-uniform") return LoggingScheme::fixed_uniform;
  if (s == "fixed-policy") return LoggingScheme::fixed_policy;
  if (s == "round-robin") return LoggingScheme::round_robin;
  throw parse_error("unknown logging scheme: " + s);
}

void validate(const SimConfig& cfg) {
  if (cfg.num_actions == 0) throw precondition_error("simulation needs K >= 1");
  if (cfg.num_contexts && *cfg.num_contexts == 0)
    throw precondition_error("contextual simulation needs C >= 1");
  if (cfg.horizon < 1) throw precondition_error("simulation needs t >= 1");
  const double k = static_cast<double>(cfg.num_actions);
  if (!(cfg.eps > 0.0) || !(cfg.eps <= 1.0 / k))
    throw precondition_error("simulation eps must satisfy 0 < eps <= 1/K");
  if (!cfg.reward_means.empty()) {
    const std::size_t rows = cfg.num_contexts ? *cfg.num_contexts : 1;
    if (cfg.reward_means.size() != rows)
      throw precondition_error("reward_means must have one row per context");
    for (const auto& row : cfg.reward_means) {
      if (row.size() != cfg.num_actions)
        throw precondition_error("reward_means rows must have K entries");
      for (double m : row)
        if (!(m >= 0.0) || !(m <= 1.0))
          throw precondition_error("reward means must lie in [0, 1]");
    }
  }
  switch (cfg.scheme) {
    case LoggingScheme::fixed_uniform:
      if (!cfg.logging_policies.empty())
        throw precondition_error("fixed-uniform takes no logging policies");
      break;
    case LoggingScheme::fixed_policy:
      if (cfg.logging_policies.size() != 1)
        throw precondition_error("fixed-policy takes exactly one logging policy");
      break;
    case LoggingScheme::round_robin:
      if (cfg.logging_policies.empty())
        throw precondition_error("round-robin needs at least one logging policy");
      break;
  }
  for (const Policy& p : cfg.logging_policies) {
    if (p.num_actions() != cfg.num_actions)
      throw precondition_error("logging policy has the wrong number of actions");
    if (p.contextual() &&
        (!cfg.num_contexts || p.num_contexts() != *cfg.num_contexts))
      throw precondition_error("logging policy has the wrong number of contexts");
  }
  if (cfg.context_probs) {
    if (!cfg.num_contexts)
      throw precondition_error("context_probs given for a multi-armed simulation");
    if (cfg.context_probs->size() != *cfg.num_contexts)
      throw precondition_error("context_probs must have C entries");
  }
}

namespace {

ordered_json policy_to_json(const Policy& p) {
  if (!p.contextual()) {
    auto row = p.row();
    return ordered_json(std::vector<double>(row.begin(), row.end()));
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t x = 0; x < p.num_contexts(); ++x) {
    auto row = p.row(x);
    rows.emplace_back(row.begin(), row.end());
  }
  return ordered_json(rows);
}

Policy policy_from_json(const ordered_json& j) {
  if (!j.is_array() || j.empty())
    throw parse_error("a policy must be a nonempty array");
  if (j[0].is_array())
    return Policy::from_rows(j.get<std::vector<std::vector<double>>>());
  return Policy::from_row(j.get<std::vector<double>>());
}

}  // namespace

std::string sim_config_to_json(const SimConfig& cfg) {
  ordered_json j;
  j["K"] = cfg.num_actions;
  if (cfg.num_contexts)
    j["C"] = *cfg.num_contexts;
  else
    j["C"] = nullptr;
  j["t"] = cfg.horizon;
  j["epsilon"] = cfg.eps;
  j["seed"] = cfg.seed;
  j["reward_family"] = to_string(cfg.reward_family);
  if (cfg.reward_means.empty()) {
    j["reward_means"] = "random";
  } else if (!cfg.num_contexts) {
    j["reward_means"] = cfg.reward_means[0];
  } else {
    j["reward_means"] = cfg.reward_means;
  }
  j["logging_scheme"] = to_string(cfg.scheme);
  ordered_json pols = ordered_json::array();
  for (const Policy& p : cfg.logging_policies) pols.push_back(policy_to_json(p));
  j["logging_policies"] = pols;
  if (cfg.context_probs)
    j["context_probs"] = *cfg.context_probs;
  else
    j["context_probs"] = nullptr;
  return j.dump(2) + "\n";
}

SimConfig sim_config_from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw parse_error(std::string("invalid config JSON: ") + e.what());
  }
  SimConfig cfg;
  try {
    cfg.num_actions = j.at("K").get<std::size_t>();
    if (j.contains("C") && !j.at("C").is_null())
      cfg.num_contexts = j.at("C").get<std::size_t>();
    cfg.horizon = j.at("t").get<long long>();
    cfg.eps = j.at("epsilon").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("reward_family"))
      cfg.reward_family =
          reward_family_from_string(j.at("reward_family").get<std::string>());
    if (j.contains("reward_means") && !j.at("reward_means").is_null() &&
        !(j.at("reward_means").is_string() &&
          j.at("reward_means").get<std::string>() == "random")) {
      const auto& means = j.at("reward_means");
      if (!means.is_array() || means.empty())
        throw parse_error("reward_means must be \"random\" or a nonempty array");
      if (means[0].is_array())
        cfg.reward_means = means.get<std::vector<std::vector<double>>>();
      else
        cfg.reward_means = {means.get<std::vector<double>>()};
    }
    if (j.contains("logging_scheme"))
      cfg.scheme =
          logging_scheme_from_string(j.at("logging_scheme").get<std::string>());
    if (j.contains("logging_policies"))
      for (const auto& p : j.at("logging_policies"))
        cfg.logging_policies.push_back(policy_from_json(p));
    if (j.contains("context_probs") && !j.at("context_probs").is_null())
      cfg.context_probs = j.at("context_probs").get<std::vector<double>>();
  } catch (const ordered_json::exception& e) {
    throw parse_error(std::string("invalid config: ") + e.what());
  } catch (const precondition_error& e) {
    throw parse_error(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

SimConfig read_sim_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return sim_config_from_json_text(buf.str());
}

RewardModel build_reward_model(const SimConfig& cfg) {
  validate(cfg);
  if (!cfg.reward_means.empty()) {
    if (cfg.num_contexts)
      return RewardModel::contextual(cfg.reward_means, cfg.reward_family);
    return RewardModel::multi_armed(cfg.reward_means[0], cfg.reward_family);
  }
  SplitMix64 rng(substream_seed(cfg.seed, kModelStreamIndex));
  const std::size_t rows = cfg.num_contexts ? *cfg.num_contexts : 1;
  std::vector<std::vector<double>> means(rows);
  for (auto& row : means) {
    row.resize(cfg.num_actions);
    for (double& m : row) m = rng.next_double();
  }
  if (cfg.num_contexts)
    return RewardModel::contextual(std::move(means), cfg.reward_family);
  return RewardModel::multi_armed(std::move(means[0]), cfg.reward_family);
}

ContextSpace context_space(const SimConfig& cfg) {
  if (!cfg.num_contexts) return ContextSpace::uniform(1);
  if (cfg.context_probs) return ContextSpace(*cfg.context_probs);
  return ContextSpace::uniform(*cfg.num_contexts);
}

std::vector<Policy> effective_logging_policies(const SimConfig& cfg) {
  validate(cfg);
  std::vector<Policy> out;
  if (cfg.scheme == LoggingScheme::fixed_uniform) {
    out.push_back(epsilon_floor_policy(Policy::uniform(cfg.num_actions), cfg.eps));
    return out;
  }
  for (const Policy& p : cfg.logging_policies)
    out.push_back(epsilon_floor_policy(p, cfg.eps));
  return out;
}

History generate_history_replicate(const SimConfig& cfg, std::uint64_t index) {
  const RewardModel model = build_reward_model(cfg);
  const std::vector<Policy> policies = effective_logging_policies(cfg);
  const ContextSpace contexts = context_space(cfg);
  SplitMix64 rng(substream_seed(cfg.seed, index));
  std::vector<LoggedStep> steps;
  steps.reserve(static_cast<std::size_t>(cfg.horizon));
  for (long long n = 0; n < cfg.horizon; ++n) {
    LoggedStep s;
    std::size_t x = 0;
    if (cfg.num_contexts) {
      x = rng.categorical(contexts.probs());
      s.context = x;
    }
    const Policy& pol = policies[static_cast<std::size_t>(n) % policies.size()];
    auto row = pol.row(x);
    s.action = rng.categorical(row);
    s.logging_prob = row[s.action];
    s.reward = model.sample(rng, s.action, x);
    steps.push_back(s);
  }
  return History(cfg.num_actions, cfg.num_contexts, cfg.eps, std::move(steps));
}

History generate_history(const SimConfig& cfg) {
  return generate_history_replicate(cfg, 0);
}

std::vector<History> replicate(const SimConfig& cfg, int m) {
  if (m < 0) throw precondition_error("replicate count must be >= 0");
  std::vector<History> out;
  out.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    out.push_back(generate_history_replicate(cfg, static_cast<std::uint64_t>(i)));
  return out;
}

}  // namespace pacbandit
