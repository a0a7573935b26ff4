#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tubekit/morphology.hpp"
#include "tubekit/rng.hpp"

using namespace tubekit;

namespace {

BinaryMask mask_from(const std::vector<std::string>& rows) {
  BinaryMask m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) m.set(r, c, rows[static_cast<size_t>(r)][static_cast<size_t>(c)] == '#');
  }
  return m;
}

BinaryMask random_mask(int h, int w, double density, Rng& rng) {
  BinaryMask m(h, w);
  for (auto& p : m.pixels) p = rng.uniform() < density ? 1 : 0;
  return m;
}

// Independent reference: plain O(N^2) nearest-source scan.
DistanceField brute_force_edt(const BinaryMask& sources) {
  DistanceField out;
  out.height = sources.height;
  out.width = sources.width;
  out.values.assign(sources.pixels.size(), 0.0);
  for (int r = 0; r < sources.height; ++r) {
    for (int c = 0; c < sources.width; ++c) {
      double best = 1e300;
      for (int sr = 0; sr < sources.height; ++sr) {
        for (int sc = 0; sc < sources.width; ++sc) {
          if (!sources.at(sr, sc)) continue;
          const double d2 = static_cast<double>(sr - r) * (sr - r) +
                            static_cast<double>(sc - c) * (sc - c);
          best = std::min(best, d2);
        }
      }
      out.values[static_cast<size_t>(r) * sources.width + c] = std::sqrt(best);
    }
  }
  return out;
}

// Independent reference thinning, kept deliberately separate from the library
// implementation (full-image rescan per phase, no shared helpers).
BinaryMask reference_thinning(const BinaryMask& mask) {
  std::vector<std::vector<int>> img(static_cast<size_t>(mask.height),
                                    std::vector<int>(static_cast<size_t>(mask.width), 0));
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) img[static_cast<size_t>(r)][static_cast<size_t>(c)] = mask.at(r, c);
  }
  auto get = [&](int r, int c) {
    if (r < 0 || r >= mask.height || c < 0 || c >= mask.width) return 0;
    return img[static_cast<size_t>(r)][static_cast<size_t>(c)];
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int phase = 0; phase < 2; ++phase) {
      std::vector<std::pair<int, int>> kill;
      for (int r = 0; r < mask.height; ++r) {
        for (int c = 0; c < mask.width; ++c) {
          if (!get(r, c)) continue;
          const int seq[8] = {get(r - 1, c),     get(r - 1, c + 1), get(r, c + 1),
                              get(r + 1, c + 1), get(r + 1, c),     get(r + 1, c - 1),
                              get(r, c - 1),     get(r - 1, c - 1)};
          int b = 0, a = 0;
          for (int i = 0; i < 8; ++i) {
            b += seq[i];
            if (seq[i] == 0 && seq[(i + 1) % 8] == 1) ++a;
          }
          const int m1 = phase == 0 ? seq[0] * seq[2] * seq[4] : seq[0] * seq[2] * seq[6];
          const int m2 = phase == 0 ? seq[2] * seq[4] * seq[6] : seq[0] * seq[4] * seq[6];
          if (b >= 2 && b <= 6 && a == 1 && m1 == 0 && m2 == 0) kill.emplace_back(r, c);
        }
      }
      for (auto [r, c] : kill) {
        img[static_cast<size_t>(r)][static_cast<size_t>(c)] = 0;
        changed = true;
      }
    }
  }
  BinaryMask out(mask.height, mask.width);
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) out.set(r, c, img[static_cast<size_t>(r)][static_cast<size_t>(c)] != 0);
  }
  return out;
}

}  // namespace

TEST_CASE("extract_boundary spec examples") {
  SUBCASE("3x3 solid block keeps the 8 ring pixels") {
    BinaryMask m = mask_from({"###", "###", "###"});
    BinaryMask b = extract_boundary(m);
    CHECK(b.count_foreground() == 8);
    CHECK(!b.at(1, 1));
  }
  SUBCASE("single pixel is its own boundary") {
    BinaryMask m = mask_from({".#.", "...", "..."});
    BinaryMask b = extract_boundary(m);
    CHECK(b.count_foreground() == 1);
    CHECK(b.at(0, 1));
  }
  SUBCASE("empty mask stays empty") {
    BinaryMask m(4, 4);
    CHECK(extract_boundary(m).count_foreground() == 0);
  }
  SUBCASE("image border counts as background") {
    BinaryMask m(3, 3);
    for (auto& p : m.pixels) p = 1;
    BinaryMask b = extract_boundary(m);
    CHECK(b.at(0, 0));
    CHECK(b.at(2, 2));
  }
}

TEST_CASE("boundary is a mask subset with a background 4-neighbor") {
  Rng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    BinaryMask m = random_mask(12, 14, 0.45, rng);
    BinaryMask b = extract_boundary(m);
    for (int r = 0; r < m.height; ++r) {
      for (int c = 0; c < m.width; ++c) {
        if (!b.at(r, c)) continue;
        CHECK(m.at(r, c));
        const bool bg_neighbor = !m.at_safe(r - 1, c) || !m.at_safe(r + 1, c) ||
                                 !m.at_safe(r, c - 1) || !m.at_safe(r, c + 1);
        CHECK(bg_neighbor);
      }
    }
  }
}

TEST_CASE("zhang_suen_skeleton spec examples") {
  SUBCASE("1-pixel-wide line is unchanged") {
    BinaryMask m = mask_from({".....", "#####", "....."});
    CHECK(zhang_suen_skeleton(m) == m);
  }
  SUBCASE("empty mask") {
    BinaryMask m(5, 5);
    CHECK(zhang_suen_skeleton(m).count_foreground() == 0);
  }
  SUBCASE("5x3 solid rectangle thins to a 1-pixel horizontal segment") {
    BinaryMask m = mask_from({"#####", "#####", "#####"});
    BinaryMask s = zhang_suen_skeleton(m);
    // frozen from the reference two-subiteration trace
    CHECK(s.count_foreground() == 2);
    CHECK(s.at(1, 1));
    CHECK(s.at(1, 2));
    CHECK(s == reference_thinning(m));
  }
  SUBCASE("single pixel survives") {
    BinaryMask m = mask_from({"...", ".#.", "..."});
    CHECK(zhang_suen_skeleton(m) == m);
  }
}

TEST_CASE("skeleton properties: subset, idempotence, reference equality") {
  Rng rng(62);
  for (int trial = 0; trial < 15; ++trial) {
    BinaryMask m = random_mask(14, 14, 0.55, rng);
    BinaryMask s = zhang_suen_skeleton(m);
    for (size_t i = 0; i < m.pixels.size(); ++i) {
      if (s.pixels[i]) CHECK(m.pixels[i]);
    }
    CHECK(zhang_suen_skeleton(s) == s);
    CHECK(s == reference_thinning(m));
  }
}

TEST_CASE("boundary and skeleton are translation-equivariant on padded inputs") {
  Rng rng(63);
  BinaryMask inner = random_mask(8, 9, 0.5, rng);
  auto embed = [&inner](int top, int left, int h, int w) {
    BinaryMask out(h, w);
    for (int r = 0; r < inner.height; ++r) {
      for (int c = 0; c < inner.width; ++c) {
        if (inner.at(r, c)) out.set(r + top, c + left, true);
      }
    }
    return out;
  };
  BinaryMask a = embed(2, 3, 14, 16);
  BinaryMask b = embed(4, 1, 14, 16);
  BinaryMask sa = zhang_suen_skeleton(a), sb = zhang_suen_skeleton(b);
  BinaryMask ba = extract_boundary(a), bb = extract_boundary(b);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 9; ++c) {
      CHECK(sa.at(r + 2, c + 3) == sb.at(r + 4, c + 1));
      CHECK(ba.at(r + 2, c + 3) == bb.at(r + 4, c + 1));
    }
  }
}

TEST_CASE("euclidean_distance_transform spec examples") {
  SUBCASE("Pythagorean distance from a corner source") {
    BinaryMask m(6, 6);
    m.set(0, 0, true);
    DistanceField d = euclidean_distance_transform(m);
    CHECK(d.at(4, 3) == 5.0);  // rows are y: query (x=3, y=4)
    CHECK(d.at(0, 0) == 0.0);
  }
  SUBCASE("all pixels sources gives zero everywhere") {
    BinaryMask m(4, 5);
    for (auto& p : m.pixels) p = 1;
    DistanceField d = euclidean_distance_transform(m);
    for (double v : d.values) CHECK(v == 0.0);
  }
  SUBCASE("empty source set raises") {
    BinaryMask m(3, 3);
    CHECK_THROWS_AS(euclidean_distance_transform(m), ParamError);
  }
}

TEST_CASE("EDT equals the brute-force oracle exactly") {
  Rng rng(64);
  for (int trial = 0; trial < 8; ++trial) {
    BinaryMask m = random_mask(32, 32, trial < 4 ? 0.02 : 0.2, rng);
    if (m.empty_foreground()) m.set(static_cast<int>(rng.below(32)), static_cast<int>(rng.below(32)), true);
    DistanceField fast = euclidean_distance_transform(m);
    DistanceField slow = brute_force_edt(m);
    for (size_t i = 0; i < fast.values.size(); ++i) {
      CHECK(fast.values[i] == slow.values[i]);  // exact, no tolerance
    }
  }
}

TEST_CASE("distance field is 1-Lipschitz and zero exactly on sources") {
  Rng rng(65);
  BinaryMask m = random_mask(20, 20, 0.05, rng);
  m.set(7, 7, true);
  DistanceField d = euclidean_distance_transform(m);
  for (int r = 0; r < 20; ++r) {
    for (int c = 0; c < 20; ++c) {
      if (m.at(r, c)) CHECK(d.at(r, c) == 0.0);
      if (c + 1 < 20) CHECK(std::abs(d.at(r, c) - d.at(r, c + 1)) <= 1.0 + 1e-12);
      if (r + 1 < 20) CHECK(std::abs(d.at(r, c) - d.at(r + 1, c)) <= 1.0 + 1e-12);
    }
  }
}
