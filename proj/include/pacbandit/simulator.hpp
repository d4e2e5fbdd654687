#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pacbandit/history.hpp"
#include "pacbandit/policy.hpp"
#include "pacbandit/reward_model.hpp"

namespace pacbandit {

enum class LoggingScheme {
  fixed_uniform,  // uniform over actions every step
  fixed_policy,   // one given policy every step
  round_robin,    // cycle through the given policies step by step
};

std::string to_string(LoggingScheme s);
LoggingScheme logging_scheme_from_string(const std::string& s);

// Full description of a synthetic logging run. Everything downstream
// (model, history, replicates) is a pure function of this struct.
struct SimConfig {
  std::size_t num_actions = 2;
  std::optional<std::size_t> num_contexts;  // null = multi-armed
  long long horizon = 100;
  double eps = 0.05;
  std::uint64_t seed = 1;
  RewardFamily reward_family = RewardFamily::bernoulli;
  // One row of K means, or one row per context. Empty = draw means
  // uniformly from [0, 1] using the model substream of `seed`.
  std::vector<std::vector<double>> reward_means;
  LoggingScheme scheme = LoggingScheme::fixed_uniform;
  std::vector<Policy> logging_policies;     // floored at eps before use
  std::optional<std::vector<double>> context_probs;  // default uniform
};

void validate(const SimConfig& cfg);

std::string sim_config_to_json(const SimConfig& cfg);
SimConfig sim_config_from_json_text(const std::string& text);
SimConfig read_sim_config_file(const std::string& path);

// Ground truth implied by the config. Deterministic in cfg.seed and shared
// by every replicate.
RewardModel build_reward_model(const SimConfig& cfg);
ContextSpace context_space(const SimConfig& cfg);

// Logging policies after flooring, as used step by step.
std::vector<Policy> effective_logging_policies(const SimConfig& cfg);

// Replicate i draws from substream_seed(cfg.seed, i). Per step the draw
// order is: context (if contextual), action, reward; Bernoulli rewards
// consume one uniform, deterministic rewards none. generate_history is
// replicate 0.
History generate_history_replicate(const SimConfig& cfg, std::uint64_t index);
History generate_history(const SimConfig& cfg);
std::vector<History> replicate(const SimConfig& cfg, int m);

}  // namespace pacbandit
