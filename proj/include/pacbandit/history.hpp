#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pacbandit/errors.hpp"

namespace pacbandit {

// One logged interaction: the action the logging policy took, the observed
// reward, and the probability the logging policy assigned to that action.
struct LoggedStep {
  std::size_t action = 0;
  double reward = 0.0;
  double logging_prob = 0.0;
  std::optional<std::size_t> context;

  bool operator==(const LoggedStep&) const = default;
};

// An offline bandit log of t steps over K actions, with every logging
// probability floored at eps (so importance weights live in [0, 1/eps]).
// Validated on construction; a History is immutable once built.
class History {
 public:
  History(std::size_t num_actions, std::optional<std::size_t> num_contexts,
          double eps, std::vector<LoggedStep> steps);

  std::size_t num_actions() const { return num_actions_; }
  std::optional<std::size_t> num_contexts() const { return num_contexts_; }
  bool contextual() const { return num_contexts_.has_value(); }
  double eps() const { return eps_; }
  long long size() const { return static_cast<long long>(steps_.size()); }
  const std::vector<LoggedStep>& steps() const { return steps_; }

  bool operator==(const History&) const = default;

 private:
  std::size_t num_actions_;
  std::optional<std::size_t> num_contexts_;
  double eps_;
  std::vector<LoggedStep> steps_;
};

// JSONL wire format. The first line is a header
//   {"epsilon": <float>, "K": <int>, "C": <int or null>}
// and each following line is one step
//   {"n": <1-based int>, "action": <int>, "context": <int or null>,
//    "reward": <float>, "logging_prob": <float>}
// Writing is byte-deterministic; doubles are printed shortest-round-trip,
// so write(read(x)) == x.
void write_history_jsonl(const History& h, std::ostream& out);
std::string history_to_jsonl(const History& h);
History read_history_jsonl(std::istream& in);
History read_history_file(const std::string& path);
void write_history_file(const History& h, const std::string& path);

}  // namespace pacbandit
