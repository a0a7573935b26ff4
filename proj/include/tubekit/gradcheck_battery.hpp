#pragma once

#include <string>
#include <vector>

#include "tubekit/gradcheck.hpp"

namespace tubekit {

struct CheckOutcome {
  std::string name;
  GradCheckReport report;
  bool pass = false;
};

// The named finite-difference checks behind `tubekit gradcheck`: every tape
// op, the Eq 1-2 stride-head chain, the full DSU layer (relaxed rounding) and
// the weighted Dice loss, all at threshold 1e-5.
std::vector<CheckOutcome> run_gradcheck_battery(uint64_t seed);

}  // namespace tubekit
