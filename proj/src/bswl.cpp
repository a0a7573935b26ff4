#include "tubekit/bswl.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

namespace tubekit::bswl {

Tensor WeightMap::as_tensor() const {
  return Tensor({1, 1, height, width}, values);
}

std::string mask_digest(const BinaryMask& mask, double alpha) {
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](uint64_t byte) {
    h ^= byte;
    h *= 0x100000001B3ull;
  };
  mix(static_cast<uint64_t>(mask.height));
  mix(static_cast<uint64_t>(mask.width));
  for (uint8_t p : mask.pixels) mix(p);
  uint64_t abits;
  static_assert(sizeof(double) == sizeof(uint64_t));
  std::memcpy(&abits, &alpha, 8);
  for (int i = 0; i < 8; ++i) mix((abits >> (8 * i)) & 0xff);
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

WeightMap weight_map(const BinaryMask& mask, double alpha, bool invert) {
  if (alpha < 1.0) throw ParamError("weight_map: alpha must be >= 1, got " + std::to_string(alpha));
  WeightMap wm;
  wm.height = mask.height;
  wm.width = mask.width;
  wm.alpha = alpha;
  wm.source_digest = mask_digest(mask, alpha);
  wm.values.assign(static_cast<size_t>(mask.height) * static_cast<size_t>(mask.width), 1.0);
  if (mask.empty_foreground()) {
    wm.empty_mask = true;  // nothing to weight
    return wm;
  }

  const BinaryMask boundary = extract_boundary(mask);
  const BinaryMask skeleton = zhang_suen_skeleton(mask);
  const DistanceField d_e = euclidean_distance_transform(boundary);
  // Thinning can erase tiny blobs entirely (a 2x2 block has no medial axis).
  // With no skeleton anywhere, d_S is +inf and the interpolation collapses to
  // the boundary anchor.
  const bool have_skeleton = !skeleton.empty_foreground();
  DistanceField d_s;
  if (have_skeleton) d_s = euclidean_distance_transform(skeleton);

  const double lo = invert ? alpha : 1.0;  // skeleton anchor
  const double hi = invert ? 1.0 : alpha;  // boundary anchor
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (!mask.at(r, c)) continue;
      const size_t i = static_cast<size_t>(r) * static_cast<size_t>(mask.width) +
                       static_cast<size_t>(c);
      if (!have_skeleton) {
        wm.values[i] = hi;
        continue;
      }
      const double de = d_e.at(r, c);
      const double ds = d_s.at(r, c);
      const double total = ds + de;
      // d_S + d_E = 0 only where a pixel is both skeleton and boundary
      // (1-pixel-wide structure); the d_S = 0 limit of Eq-style interpolation
      // is the skeleton anchor.
      wm.values[i] = total == 0.0 ? lo : hi - (hi - lo) * de / total;
    }
  }
  return wm;
}

NodeId weighted_dice_loss(Tape& tape, NodeId pred, const Tensor& gt, const Tensor& weights,
                          const LossConfig& config) {
  NodeId gt_node = tape.leaf(gt);
  NodeId w_node = tape.leaf(weights);
  return tape.weighted_dice(pred, gt_node, w_node, config.epsilon);
}

double weighted_dice_loss_value(const Tensor& pred, const Tensor& gt, const Tensor& weights,
                                const LossConfig& config) {
  Tape tape;
  NodeId p = tape.leaf(pred);
  NodeId loss = weighted_dice_loss(tape, p, gt, weights, config);
  return tape.value(loss).data[0];
}

double recommend_alpha(const std::vector<BinaryMask>& masks) {
  if (masks.empty()) throw ParamError("recommend_alpha: need at least one mask");
  int64_t fg = 0, total = 0;
  for (const BinaryMask& m : masks) {
    fg += m.count_foreground();
    total += static_cast<int64_t>(m.height) * static_cast<int64_t>(m.width);
  }
  if (fg == 0) throw ParamError("recommend_alpha: degenerate dataset with zero foreground pixels");
  return static_cast<double>(total - fg) / static_cast<double>(fg);
}

}  // namespace tubekit::bswl
