#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "pacbandit/errors.hpp"
#include "pacbandit/policy.hpp"
#include "pacbandit/rng.hpp"

namespace pacbandit {

enum class RewardFamily { bernoulli, deterministic };

std::string to_string(RewardFamily f);
RewardFamily reward_family_from_string(const std::string& s);

// Ground-truth reward distributions, one mean in [0, 1] per action (or per
// context/action pair). Held by the simulator as the oracle against which
// estimates and bounds are judged; never visible to the estimators.
class RewardModel {
 public:
  static RewardModel multi_armed(std::vector<double> means,
                                 RewardFamily family = RewardFamily::bernoulli);
  static RewardModel contextual(std::vector<std::vector<double>> means,
                                RewardFamily family = RewardFamily::bernoulli);

  std::size_t num_actions() const { return means_[0].size(); }
  std::size_t num_contexts() const { return means_.size(); }
  bool contextual() const { return contextual_; }
  RewardFamily family() const { return family_; }

  double mean(std::size_t action) const;
  double mean(std::size_t action, std::size_t context) const;

  // Draws one reward. Bernoulli families consume one uniform; deterministic
  // families consume none and return the mean itself.
  double sample(SplitMix64& rng, std::size_t action, std::size_t context = 0) const;

  bool operator==(const RewardModel&) const = default;

 private:
  RewardModel(std::vector<std::vector<double>> means, RewardFamily family,
              bool contextual);
  std::vector<std::vector<double>> means_;
  RewardFamily family_;
  bool contextual_;
};

// Expected reward of pi under the model: sum_a pi(a) rbar(a), or its
// context-weighted version when both sides are contextual.
double true_expected_reward(const Policy& pi, const RewardModel& model);
double true_expected_reward(const Policy& pi, const RewardModel& model,
                            const ContextSpace& contexts);

// Sidecar JSON so experiments can recover the ground truth of a simulated
// history without re-running the simulator.
void write_reward_model(const RewardModel& m, std::ostream& out);
RewardModel read_reward_model(std::istream& in);
RewardModel read_reward_model_file(const std::string& path);
void write_reward_model_file(const RewardModel& m, const std::string& path);

}  // namespace pacbandit
