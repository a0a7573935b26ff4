#include "tubekit/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "tubekit/rng.hpp"

namespace tubekit {

namespace {

double eval_at(const ScalarFn& f, std::vector<Tensor> params, size_t t, size_t i, double v) {
  params[t].data[i] = v;
  double r = f(params);
  if (!std::isfinite(r)) throw NumericError("gradcheck: function value is not finite");
  return r;
}

}  // namespace

GradCheckReport gradcheck(const ScalarFn& f, const std::vector<Tensor>& params,
                          const std::vector<Tensor>& analytic_grads, int probes_per_tensor,
                          double step, uint64_t seed) {
  if (params.size() != analytic_grads.size()) {
    throw ShapeError("gradcheck: one analytic gradient per parameter tensor required");
  }
  GradCheckReport report;
  Rng rng(seed * 0x100000001B3ull + 0xcbf29ce484222325ull);
  for (size_t t = 0; t < params.size(); ++t) {
    require_same_shape(params[t], analytic_grads[t], "gradcheck grads[" + std::to_string(t) + "]");
    const int64_t n = params[t].numel();
    const int probes = static_cast<int>(std::min<int64_t>(probes_per_tensor, n));
    std::vector<int64_t> order(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    // Fisher-Yates prefix: distinct probe coordinates
    for (int i = 0; i < probes; ++i) {
      const int64_t j = static_cast<int64_t>(i) +
                        static_cast<int64_t>(rng.below(static_cast<uint64_t>(n - i)));
      std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }
    for (int probe = 0; probe < probes; ++probe) {
      const size_t i = static_cast<size_t>(order[static_cast<size_t>(probe)]);
      const double x0 = params[t].data[i];
      const double fp = eval_at(f, params, t, i, x0 + step);
      const double fm = eval_at(f, params, t, i, x0 - step);
      const double fd = (fp - fm) / (2.0 * step);
      // kink heuristic: compare against the half-step estimate
      const double fp2 = eval_at(f, params, t, i, x0 + 0.5 * step);
      const double fm2 = eval_at(f, params, t, i, x0 - 0.5 * step);
      const double fd2 = (fp2 - fm2) / step;
      const double scale = std::max({std::abs(fd), std::abs(fd2), 1e-8});
      if (std::abs(fd - fd2) / scale > 1e-3) {
        ++report.skipped;
        continue;
      }
      const double a = analytic_grads[t].data[i];
      const double denom = std::max({std::abs(a), std::abs(fd), 1e-8});
      report.max_rel_err = std::max(report.max_rel_err, std::abs(a - fd) / denom);
      ++report.probes;
    }
  }
  return report;
}

}  // namespace tubekit
