#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tubekit/tensor.hpp"

namespace tubekit {

// Scalar-valued deterministic function of a parameter list.
using ScalarFn = std::function<double(const std::vector<Tensor>&)>;

struct GradCheckReport {
  double max_rel_err = 0.0;
  int probes = 0;
  int skipped = 0;  // probes rejected by the kink heuristic
};

// Compares analytic gradients against central finite differences at randomly
// probed coordinates. Relative error uses denominator max(|analytic|, |fd|, 1e-8).
// Probes where halving the step changes the finite difference estimate by a
// large factor sit on a kink (relu corner, bilinear cell edge) and are skipped.
GradCheckReport gradcheck(const ScalarFn& f, const std::vector<Tensor>& params,
                          const std::vector<Tensor>& analytic_grads, int probes_per_tensor,
                          double step = 1e-4, uint64_t seed = 0);

}  // namespace tubekit
