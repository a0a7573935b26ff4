#include "tubekit/morphology.hpp"

#include <cmath>
#include <limits>

namespace tubekit {

BinaryMask::BinaryMask(int h, int w) : height(h), width(w) {
  if (h < 1 || w < 1) throw ParamError("BinaryMask: dimensions must be >= 1");
  pixels.assign(static_cast<size_t>(h) * static_cast<size_t>(w), 0);
}

int64_t BinaryMask::count_foreground() const {
  int64_t n = 0;
  for (uint8_t p : pixels) n += p != 0;
  return n;
}

BinaryMask extract_boundary(const BinaryMask& mask) {
  BinaryMask out(mask.height, mask.width);
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (!mask.at(r, c)) continue;
      const bool touches_bg = !mask.at_safe(r - 1, c) || !mask.at_safe(r + 1, c) ||
                              !mask.at_safe(r, c - 1) || !mask.at_safe(r, c + 1);
      if (touches_bg) out.set(r, c, true);
    }
  }
  return out;
}

namespace {

// One parallel deletion pass; phase 0/1 are the two Zhang-Suen subiterations.
bool thinning_pass(BinaryMask& img, int phase) {
  std::vector<std::pair<int, int>> marks;
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      if (!img.at(r, c)) continue;
      const int p2 = img.at_safe(r - 1, c);
      const int p3 = img.at_safe(r - 1, c + 1);
      const int p4 = img.at_safe(r, c + 1);
      const int p5 = img.at_safe(r + 1, c + 1);
      const int p6 = img.at_safe(r + 1, c);
      const int p7 = img.at_safe(r + 1, c - 1);
      const int p8 = img.at_safe(r, c - 1);
      const int p9 = img.at_safe(r - 1, c - 1);
      const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
      if (b < 2 || b > 6) continue;
      const int a = (p2 == 0 && p3 == 1) + (p3 == 0 && p4 == 1) + (p4 == 0 && p5 == 1) +
                    (p5 == 0 && p6 == 1) + (p6 == 0 && p7 == 1) + (p7 == 0 && p8 == 1) +
                    (p8 == 0 && p9 == 1) + (p9 == 0 && p2 == 1);
      if (a != 1) continue;
      const int m1 = phase == 0 ? p2 * p4 * p6 : p2 * p4 * p8;
      const int m2 = phase == 0 ? p4 * p6 * p8 : p2 * p6 * p8;
      if (m1 == 0 && m2 == 0) marks.emplace_back(r, c);
    }
  }
  for (auto [r, c] : marks) img.set(r, c, false);
  return !marks.empty();
}

constexpr double kFarAway = 1e20;

// 1-D squared-distance lower envelope (exact for integer site costs).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z, int n) {
  int k = 0;
  v[0] = 0;
  z[0] = -kFarAway;
  z[1] = kFarAway;
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[static_cast<size_t>(q)] + static_cast<double>(q) * q) -
           (f[static_cast<size_t>(p)] + static_cast<double>(p) * p)) /
          (2.0 * q - 2.0 * p);
      if (s > z[static_cast<size_t>(k)]) break;
      --k;
    }
    ++k;
    v[static_cast<size_t>(k)] = q;
    z[static_cast<size_t>(k)] = s;
    z[static_cast<size_t>(k + 1)] = kFarAway;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<size_t>(k + 1)] < static_cast<double>(q)) ++k;
    const int p = v[static_cast<size_t>(k)];
    const double dq = static_cast<double>(q - p);
    d[static_cast<size_t>(q)] = dq * dq + f[static_cast<size_t>(p)];
  }
}

}  // namespace

BinaryMask zhang_suen_skeleton(const BinaryMask& mask) {
  BinaryMask img = mask;
  bool changed = true;
  while (changed) {
    changed = thinning_pass(img, 0);
    changed = thinning_pass(img, 1) || changed;
  }
  return img;
}

DistanceField euclidean_distance_transform(const BinaryMask& sources) {
  if (sources.empty_foreground()) {
    throw ParamError("euclidean_distance_transform: source set is empty");
  }
  const int h = sources.height, w = sources.width;
  std::vector<double> sq(static_cast<size_t>(h) * static_cast<size_t>(w));

  // pass 1: per column, squared distance to the nearest source in that column
  {
    const int n = h;
    std::vector<double> f(static_cast<size_t>(n)), d(static_cast<size_t>(n));
    std::vector<int> v(static_cast<size_t>(n));
    std::vector<double> z(static_cast<size_t>(n) + 1);
    for (int c = 0; c < w; ++c) {
      for (int r = 0; r < h; ++r) f[static_cast<size_t>(r)] = sources.at(r, c) ? 0.0 : kFarAway;
      edt_1d(f, d, v, z, n);
      for (int r = 0; r < h; ++r) sq[static_cast<size_t>(r) * w + c] = d[static_cast<size_t>(r)];
    }
  }
  // pass 2: per row, combine across columns
  {
    const int n = w;
    std::vector<double> f(static_cast<size_t>(n)), d(static_cast<size_t>(n));
    std::vector<int> v(static_cast<size_t>(n));
    std::vector<double> z(static_cast<size_t>(n) + 1);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) f[static_cast<size_t>(c)] = sq[static_cast<size_t>(r) * w + c];
      edt_1d(f, d, v, z, n);
      for (int c = 0; c < w; ++c) sq[static_cast<size_t>(r) * w + c] = d[static_cast<size_t>(c)];
    }
  }

  DistanceField out;
  out.height = h;
  out.width = w;
  out.values.resize(sq.size());
  for (size_t i = 0; i < sq.size(); ++i) out.values[i] = std::sqrt(sq[i]);
  return out;
}

}  // namespace tubekit
