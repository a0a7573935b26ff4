#pragma once

#include <cstdint>
#include <vector>

#include "tubekit/errors.hpp"

namespace tubekit {

// H x W binary image; foreground marks the tubular structure. Everything
// outside the image counts as background.
struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> pixels;  // row-major 0/1

  BinaryMask() = default;
  BinaryMask(int h, int w);

  bool at(int row, int col) const {
    return pixels[static_cast<size_t>(row) * static_cast<size_t>(width) +
                  static_cast<size_t>(col)] != 0;
  }
  void set(int row, int col, bool value) {
    pixels[static_cast<size_t>(row) * static_cast<size_t>(width) + static_cast<size_t>(col)] =
        value ? 1 : 0;
  }
  // treats out-of-image as background
  bool at_safe(int row, int col) const {
    return row >= 0 && row < height && col >= 0 && col < width && at(row, col);
  }
  int64_t count_foreground() const;
  bool empty_foreground() const { return count_foreground() == 0; }
  bool operator==(const BinaryMask& other) const = default;
};

// H x W field of exact Euclidean distances (pixels) to the nearest source.
struct DistanceField {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  double at(int row, int col) const {
    return values[static_cast<size_t>(row) * static_cast<size_t>(width) +
                  static_cast<size_t>(col)];
  }
};

// Inner contour: foreground pixels 4-adjacent to background (the image border
// counts as background).
BinaryMask extract_boundary(const BinaryMask& mask);

// Classical two-subiteration thinning run to fixpoint; yields the
// single-pixel-wide medial axis.
BinaryMask zhang_suen_skeleton(const BinaryMask& mask);

// Exact Euclidean distance transform (two-pass separable lower envelope).
// Throws ParamError when the source set is empty.
DistanceField euclidean_distance_transform(const BinaryMask& sources);

}  // namespace tubekit
