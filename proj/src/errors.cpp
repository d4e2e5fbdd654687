#include "pacbandit/errors.hpp"

#include <sstream>

namespace pacbandit {

namespace {

std::string describe_inadmissible(double kl, double admissible_kl) {
  std::ostringstream os;
  os.precision(17);
  os << "kl " << kl << " exceeds the admissible budget " << admissible_kl
     << " of the optimized Bernstein bound";
  return os.str();
}

}  // namespace

inadmissible_kl_error::inadmissible_kl_error(double kl_in, double admissible_in)
    : precondition_error(describe_inadmissible(kl_in, admissible_in)),
      kl(kl_in),
      admissible_kl(admissible_in) {}

parse_error::parse_error(const std::string& what, long long line)
    : std::runtime_error(what + " (line " + std::to_string(line) + ")") {}

}  // namespace pacbandit
