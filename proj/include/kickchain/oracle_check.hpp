// Side-by-side comparison of the simulator against the closed-form pair results.
#pragma once

#include <string>
#include <vector>

namespace kickchain::oracles {

struct CheckParameters {
  double coupling = 0.3;
  double omega0 = 1.0;
  double omega1 = 0.5;
  double lambda1 = 0.7;
  double lambda2 = 2.1;
  int periods = 12;  // for the checks that are not limited to i <= 3
};

struct CheckResult {
  std::string name;
  double max_deviation = 0.0;
};

/// Runs every closed form and the simulator on the same setup and reports the
/// largest absolute difference of each.
std::vector<CheckResult> compare_with_simulator(const CheckParameters& p);

}  // namespace kickchain::oracles
