#pragma once

#include <stdexcept>
#include <string>

namespace pacbandit {

// A mathematical precondition was violated (bad epsilon, out-of-range
// probability, inadmissible KL, ...). The CLI maps these to exit code 2.
class precondition_error : public std::invalid_argument {
 public:
  explicit precondition_error(const std::string& what)
      : std::invalid_argument(what) {}
};

// KL(policy || prior) exceeds the admissible budget of the optimized
// Bernstein bound. Carries the threshold so callers can report it.
class inadmissible_kl_error : public precondition_error {
 public:
  inadmissible_kl_error(double kl, double admissible_kl);
  double kl;
  double admissible_kl;
};

// Malformed input (bad JSON, missing fields, truncated history file).
// The CLI maps these to exit code 1.
class parse_error : public std::runtime_error {
 public:
  explicit parse_error(const std::string& what) : std::runtime_error(what) {}
  parse_error(const std::string& what, long long line);
};

}  // namespace pacbandit
