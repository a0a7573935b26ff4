#pragma once

#include <string>
#include <vector>

#include "tubekit/morphology.hpp"
#include "tubekit/tape.hpp"
#include "tubekit/tensor.hpp"

namespace tubekit::bswl {

// Per-pixel loss weights in [1, alpha]: alpha on the structure boundary,
// falling to 1 on the skeleton, exactly 1 on background.
struct WeightMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;
  double alpha = 1.0;
  std::string source_digest;  // FNV-1a of the source mask bits + alpha
  bool empty_mask = false;    // set when the mask had no foreground

  double at(int row, int col) const {
    return values[static_cast<size_t>(row) * static_cast<size_t>(width) +
                  static_cast<size_t>(col)];
  }
  Tensor as_tensor() const;  // 1 x 1 x H x W
};

struct LossConfig {
  double epsilon = 1e-6;
};

// Distance-field interpolated weights from boundary (alpha) to skeleton (1).
// `invert` swaps the two anchors (weight 1 on the boundary, alpha on the
// skeleton) for experimentation.
WeightMap weight_map(const BinaryMask& mask, double alpha, bool invert = false);

// Weighted Dice loss between a prediction in [0,1] and a binary target,
// recorded on the tape with its analytic gradient w.r.t. pred.
NodeId weighted_dice_loss(Tape& tape, NodeId pred, const Tensor& gt, const Tensor& weights,
                          const LossConfig& config = {});

// Forward-only evaluation (no tape) for oracles and reporting.
double weighted_dice_loss_value(const Tensor& pred, const Tensor& gt, const Tensor& weights,
                                const LossConfig& config = {});

// Background-to-foreground pixel ratio over a mask collection; the paper's
// guidance for choosing alpha.
double recommend_alpha(const std::vector<BinaryMask>& masks);

std::string mask_digest(const BinaryMask& mask, double alpha);

}  // namespace tubekit::bswl
