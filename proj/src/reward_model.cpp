#include "pacbandit/reward_model.hpp"

#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace pacbandit {

using ordered_json = nlohmann::ordered_json;

std::string to_string(RewardFamily f) {
  return f == RewardFamily::bernoulli ? "bernoulli" : "deterministic";
}

RewardFamily reward_family_from_string(const std::string& s) {
  if (s == "bernoulli") return RewardFamily::bernoulli;
  if (s == "deterministic") return RewardFamily::deterministic;
  throw parse_error("unknown reward family: " + s);
}

RewardModel::RewardModel(std::vector<std::vector<double>> means,
                         RewardFamily family, bool contextual)
    : means_(std::move(means)), family_(family), contextual_(contextual) {
  if (means_.empty() || means_[0].empty())
    throw precondition_error("reward model needs at least one mean");
  const std::size_t k = means_[0].size();
  for (const auto& row : means_) {
    if (row.size() != k)
      throw precondition_error("reward mean rows must all have the same length");
    for (double m : row)
      if (!(m >= 0.0) || !(m <= 1.0))
        throw precondition_error("reward means must lie in [0, 1]");
  }
}

RewardModel RewardModel::multi_armed(std::vector<double> means, RewardFamily family) {
  return RewardModel({std::move(means)}, family, false);
}

RewardModel RewardModel::contextual(std::vector<std::vector<double>> means,
                                    RewardFamily family) {
  return RewardModel(std::move(means), family, true);
}

double RewardModel::mean(std::size_t action) const {
  if (contextual_)
    throw precondition_error("contextual reward model needs a context");
  if (action >= num_actions()) throw precondition_error("action out of range");
  return means_[0][action];
}

double RewardModel::mean(std::size_t action, std::size_t context) const {
  if (!contextual_) return mean(action);
  if (context >= means_.size()) throw precondition_error("context out of range");
  if (action >= num_actions()) throw precondition_error("action out of range");
  return means_[context][action];
}

double RewardModel::sample(SplitMix64& rng, std::size_t action,
                           std::size_t context) const {
  const double m = contextual_ ? mean(action, context) : mean(action);
  if (family_ == RewardFamily::deterministic) return m;
  return rng.bernoulli(m) ? 1.0 : 0.0;
}

double true_expected_reward(const Policy& pi, const RewardModel& model) {
  if (model.contextual())
    throw precondition_error(
        "contextual reward model needs the contextual overload");
  auto row = pi.row();
  if (row.size() != model.num_actions())
    throw precondition_error("policy and reward model disagree on K");
  double v = 0.0;
  for (std::size_t a = 0; a < row.size(); ++a) v += row[a] * model.mean(a);
  return v;
}

double true_expected_reward(const Policy& pi, const RewardModel& model,
                            const ContextSpace& contexts) {
  if (!model.contextual()) {
    double v = 0.0;
    for (std::size_t x = 0; x < contexts.size(); ++x) {
      auto row = pi.row(x);
      if (row.size() != model.num_actions())
        throw precondition_error("policy and reward model disagree on K");
      double vx = 0.0;
      for (std::size_t a = 0; a < row.size(); ++a) vx += row[a] * model.mean(a);
      v += contexts.prob(x) * vx;
    }
    return v;
  }
  if (contexts.size() != model.num_contexts())
    throw precondition_error("context space and reward model disagree on C");
  double v = 0.0;
  for (std::size_t x = 0; x < contexts.size(); ++x) {
    auto row = pi.row(x);
    if (row.size() != model.num_actions())
      throw precondition_error("policy and reward model disagree on K");
    double vx = 0.0;
    for (std::size_t a = 0; a < row.size(); ++a) vx += row[a] * model.mean(a, x);
    v += contexts.prob(x) * vx;
  }
  return v;
}

void write_reward_model(const RewardModel& m, std::ostream& out) {
  ordered_json j;
  j["role"] = "oracle ground truth; not available to learners";
  j["family"] = to_string(m.family());
  j["contextual"] = m.contextual();
  if (m.contextual()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t x = 0; x < m.num_contexts(); ++x) {
      std::vector<double> row;
      for (std::size_t a = 0; a < m.num_actions(); ++a)
        row.push_back(m.mean(a, x));
      rows.push_back(std::move(row));
    }
    j["means"] = rows;
  } else {
    std::vector<double> row;
    for (std::size_t a = 0; a < m.num_actions(); ++a) row.push_back(m.mean(a));
    j["means"] = row;
  }
  out << j.dump(2) << '\n';
}

RewardModel read_reward_model(std::istream& in) {
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const ordered_json::parse_error& e) {
    throw parse_error(std::string("invalid reward model JSON: ") + e.what());
  }
  try {
    const auto family = reward_family_from_string(j.at("family").get<std::string>());
    const bool contextual = j.at("contextual").get<bool>();
    if (contextual)
      return RewardModel::contextual(
          j.at("means").get<std::vector<std::vector<double>>>(), family);
    return RewardModel::multi_armed(j.at("means").get<std::vector<double>>(),
                                    family);
  } catch (const ordered_json::exception& e) {
    throw parse_error(std::string("invalid reward model JSON: ") + e.what());
  } catch (const precondition_error& e) {
    throw parse_error(std::string("invalid reward model: ") + e.what());
  }
}

RewardModel read_reward_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open reward model file: " + path);
  return read_reward_model(in);
}

void write_reward_model_file(const RewardModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw parse_error("cannot open output file: " + path);
  write_reward_model(m, out);
  if (!out.good()) throw parse_error("error while writing: " + path);
}

}  // namespace pacbandit
