#pragma once

#include <cstdint>

#include "tubekit/morphology.hpp"
#include "tubekit/tensor.hpp"

namespace tubekit::synthgen {

struct TubeSpec {
  int height = 64;
  int width = 64;
  int tube_count = 2;
  int width_min = 2;
  int width_max = 4;
  double curvature = 6.0;      // amplitude of the cubic wiggle, pixels
  double branch_prob = 0.25;   // chance each tube spawns one branch
  double noise_sigma = 0.1;    // Gaussian noise on the rendered target
  uint64_t seed = 0;

  void validate() const;
};

// Rasterizes smooth random cubic-polynomial tubes with per-tube stroke width
// and optional branches. Same spec (incl. seed) -> bit-identical mask.
BinaryMask generate_mask(const TubeSpec& spec);

struct RenderedPair {
  Tensor lowres;   // 1 x 1 x H/2 x W/2, the 2x2 average-pooled target
  Tensor highres;  // 1 x 1 x H x W, mask as floats plus seeded noise
};

// Builds the (input, target) pair for scale-2 upsampling training.
RenderedPair render_and_degrade(const BinaryMask& mask, const TubeSpec& spec);

}  // namespace tubekit::synthgen
