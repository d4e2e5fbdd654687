#pragma once

#include <optional>
#include <span>
#include <string>

#include "pacbandit/bounds.hpp"
#include "pacbandit/history.hpp"
#include "pacbandit/policy.hpp"

namespace pacbandit {

// Gibbs reweighting of a prior by exponentiated scores:
//   pi(a) proportional to prior(a) * exp(eta * score(a)).
// Computed with a max-shift so large eta cannot overflow. eta = 0 returns
// the prior unchanged. Requires a non-contextual prior.
Policy gibbs_policy(const Policy& prior, std::span<const double> scores,
                    double eta);

// A certified lower confidence bound on the true value of a policy:
// with probability >= 1 - beta, E_pi[rbar] >= lower_bound.
struct Certificate {
  Policy policy = Policy::uniform(1);
  Policy prior = Policy::uniform(1);
  double is_estimate = 0.0;
  double kl_to_prior = 0.0;
  BoundKind bound_kind = BoundKind::hoeffding_optimized;
  std::optional<double> lambda;
  std::vector<double> grid;  // the lambda grid, for grid-kind bounds only
  double bound_value = 0.0;
  double lower_bound = 0.0;  // is_estimate - bound_value
  double beta = 0.0;
  long long t = 0;
  double eps = 0.0;
};

std::string certificate_to_json(const Certificate& c);
// Accepts a bare certificate object or the {selected, candidates} envelope
// the auto-mode optimizer emits.
Certificate certificate_from_json_text(const std::string& text);
Certificate read_certificate_file(const std::string& path);

// The BoundSpec a certificate claims to have been produced with, suitable
// for independent re-evaluation of its bound.
BoundSpec bound_spec_of(const Certificate& c);

// Evaluates a fixed policy on the log and certifies it with the given bound.
Certificate certify(const Policy& pi, const History& h, const Policy& prior,
                    const BoundSpec& spec);

// Maximizes  F(eta) = E_{gibbs(eta)}[rhat] - BOUND(KL(gibbs(eta) || prior))
// over eta >= 0 along the Gibbs path through the per-action estimates:
// coarse log-spaced scan, then golden-section refinement. For the optimized
// Bernstein bound the search is confined to the admissible KL budget (KL is
// increasing in eta along the path). The returned certificate is produced by
// certify() on the winning policy, so re-certification reproduces it exactly.
Certificate optimize_policy(const History& h, const Policy& prior,
                            const BoundSpec& spec);

}  // namespace pacbandit
