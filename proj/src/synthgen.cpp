#include "tubekit/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "tubekit/rng.hpp"

namespace tubekit::synthgen {

void TubeSpec::validate() const {
  if (height < 2 || width < 2) throw ParamError("TubeSpec: image size must be >= 2x2");
  if (tube_count < 0) throw ParamError("TubeSpec: tube count must be >= 0");
  if (width_min < 1 || width_max < width_min) {
    throw ParamError("TubeSpec: need 1 <= width_min <= width_max");
  }
  if (branch_prob < 0.0 || branch_prob > 1.0) throw ParamError("TubeSpec: branch_prob in [0,1]");
  if (noise_sigma < 0.0) throw ParamError("TubeSpec: noise_sigma must be >= 0");
}

namespace {

// Cubic offset profile across the span, zero-mean-ish, bounded by amplitude.
struct Wiggle {
  double a, b, c;
  double eval(double t) const { return a * t + b * t * t + c * t * t * t; }
};

Wiggle random_wiggle(Rng& rng, double amplitude) {
  Wiggle w{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  // normalize so the max |offset| over t in [0,1] is about the amplitude
  double peak = 1e-9;
  for (int i = 0; i <= 20; ++i) peak = std::max(peak, std::abs(w.eval(i / 20.0)));
  const double s = amplitude / peak;
  w.a *= s;
  w.b *= s;
  w.c *= s;
  return w;
}

// Stamps a tube marching along the main axis, filling `stroke` pixels across
// it per step. horizontal: column-major march with vertical strokes.
void stamp_tube(BinaryMask& mask, Rng& rng, double amplitude, int stroke, bool horizontal,
                double base, double span_lo, double span_hi) {
  const int len = horizontal ? mask.width : mask.height;
  const Wiggle w = random_wiggle(rng, amplitude);
  const int lo = static_cast<int>(std::floor(span_lo * len));
  const int hi = static_cast<int>(std::ceil(span_hi * len));
  const int half_lo = (stroke - 1) / 2;
  const int half_hi = stroke / 2;
  for (int u = std::max(0, lo); u < std::min(len, hi); ++u) {
    const double t = static_cast<double>(u) / static_cast<double>(len - 1);
    const int center = static_cast<int>(std::lround(base + w.eval(t)));
    for (int dv = -half_lo; dv <= half_hi; ++dv) {
      const int v = center + dv;
      const int r = horizontal ? v : u;
      const int c = horizontal ? u : v;
      if (r >= 0 && r < mask.height && c >= 0 && c < mask.width) mask.set(r, c, true);
    }
  }
}

}  // namespace

BinaryMask generate_mask(const TubeSpec& spec) {
  spec.validate();
  BinaryMask mask(spec.height, spec.width);
  Rng rng(spec.seed * 0x9E3779B97F4A7C15ull + 0x2545F4914F6CDD1Dull);
  for (int tube = 0; tube < spec.tube_count; ++tube) {
    const bool horizontal = rng.uniform() < 0.5;
    const int cross = horizontal ? spec.height : spec.width;
    const double base = rng.uniform(0.15, 0.85) * cross;
    const int stroke = rng.uniform_int(spec.width_min, spec.width_max);
    stamp_tube(mask, rng, spec.curvature, stroke, horizontal, base, 0.0, 1.0);
    if (rng.uniform() < spec.branch_prob) {
      // branch: a shorter tube in the transpose direction from a point on the parent
      const double branch_base = rng.uniform(0.2, 0.8) * (horizontal ? spec.width : spec.height);
      const int branch_stroke = std::max(spec.width_min, stroke - 1);
      const double start = rng.uniform(0.0, 0.5);
      stamp_tube(mask, rng, spec.curvature * 0.5, branch_stroke, !horizontal, branch_base, start,
                 start + rng.uniform(0.3, 0.5));
    }
  }
  return mask;
}

RenderedPair render_and_degrade(const BinaryMask& mask, const TubeSpec& spec) {
  if (mask.height % 2 != 0 || mask.width % 2 != 0) {
    throw ParamError("render_and_degrade: mask dimensions must be even");
  }
  const int64_t h = mask.height, w = mask.width;
  RenderedPair out;
  out.highres = Tensor::zeros({1, 1, h, w});
  Rng rng(spec.seed * 0xD1B54A32D192ED03ull + 0x9E3779B97F4A7C15ull);
  for (int64_t r = 0; r < h; ++r) {
    for (int64_t c = 0; c < w; ++c) {
      double v = mask.at(static_cast<int>(r), static_cast<int>(c)) ? 1.0 : 0.0;
      if (spec.noise_sigma > 0.0) v += rng.gaussian(0.0, spec.noise_sigma);
      out.highres.at4(0, 0, r, c) = v;
    }
  }
  out.lowres = Tensor::zeros({1, 1, h / 2, w / 2});
  for (int64_t r = 0; r < h / 2; ++r) {
    for (int64_t c = 0; c < w / 2; ++c) {
      out.lowres.at4(0, 0, r, c) = 0.25 * (out.highres.at4(0, 0, 2 * r, 2 * c) +
                                           out.highres.at4(0, 0, 2 * r, 2 * c + 1) +
                                           out.highres.at4(0, 0, 2 * r + 1, 2 * c) +
                                           out.highres.at4(0, 0, 2 * r + 1, 2 * c + 1));
    }
  }
  return out;
}

}  // namespace tubekit::synthgen
