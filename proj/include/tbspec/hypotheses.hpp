#ifndef TBSPEC_HYPOTHESES_HPP
#define TBSPEC_HYPOTHESES_HPP

#include "tbspec/friedrichs.hpp"

#include <string>
#include <vector>

namespace tbspec {

struct HypothesisCheck {
  std::string name;
  bool passed = false;
  bool applicable = true;
  double value = 0.0;      // the measured quantity the check is decided on
  double tolerance = 0.0;
  std::string detail;
};

struct HypothesisReport {
  std::string model;
  int grid_n = 0;
  int quad_n = 0;
  std::vector<HypothesisCheck> checks;

  bool all_passed() const;
  const HypothesisCheck& at(const std::string& name) const;
};

// Sampled verification of the standing assumptions on u and phi_alpha:
// evenness and positivity of u, the block structure of its Hessian at 0,
// the parity of each phi_alpha, Lambda_alpha(p,0) < Lambda_alpha(0,0) on the
// grid, negative definiteness of the Hessian of Lambda_alpha at 0 when
// phi_alpha(0) = 0, and the Lambda-difference identity at a few points.
// Failures are report entries, not exceptions.
HypothesisReport verify_hypotheses(const ModelSpec& model, int grid_n = 8, const FiberOptions& opts = {16, 16, true});

}  // namespace tbspec

#endif
