#pragma once

namespace tubekit::snake {

// Geometry shared by the fused tape op and the standalone path builders.
//
// Each parent pixel spawns four subpixels, ordered TL, TR, BL, BR. Subpixel s
// of parent (row i, col j) is centered at (j + dx(s), i + dy(s)) in input
// pixel units, so the four subpixels land on the pixel centers of the
// 2x-upsampled grid.
inline double subpixel_dx(int s) { return (s & 1) ? 0.25 : -0.25; }
inline double subpixel_dy(int s) { return (s >> 1) ? 0.25 : -0.25; }

// A path holds l_max taps; tap t covers signed step k = t - half_span.
inline int half_span(int l_max) { return (l_max - 1) / 2; }

// Offset-map channel layout. One block of (l_max + 1) channels per
// (subpixel, variant) pair: [dx0, dy0, +side steps 1..K, -side steps 1..K].
inline int block_channels(int l_max) { return l_max + 1; }

inline int block_base(int subpixel, int variant_index, int n_variants, int l_max) {
  return (subpixel * n_variants + variant_index) * block_channels(l_max);
}

inline int ch_center_dx(int base) { return base + 0; }
inline int ch_center_dy(int base) { return base + 1; }
// m in 1..K
inline int ch_step_plus(int base, int m) { return base + 2 + (m - 1); }
inline int ch_step_minus(int base, int m, int l_max) {
  return base + 2 + half_span(l_max) + (m - 1);
}

inline int offset_channels(int n_variants, int l_max) {
  return 4 * n_variants * block_channels(l_max);
}

}  // namespace tubekit::snake
