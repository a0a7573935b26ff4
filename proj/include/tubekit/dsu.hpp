#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tubekit/tape.hpp"
#include "tubekit/tensor.hpp"

namespace tubekit::dsu {

// Which snake-path orientations a layer runs. X-type paths advance one pixel
// per step horizontally and accumulate learned vertical offsets; Y-type is
// the transpose. kBoth averages the two branch outputs.
enum class Variant { kXOnly, kYOnly, kBoth };

Variant variant_from_string(const std::string& s);
std::string variant_to_string(Variant v);

struct DsuConfig {
  int channels = 1;
  int hidden_width = 8;  // C_m of the stride head
  int l_base = 5;
  std::vector<int> s_odd = {3, 5, 7, 9};
  Variant variant = Variant::kBoth;

  int l_max() const { return s_odd.back(); }
  int n_variants() const { return variant == Variant::kBoth ? 2 : 1; }
  bool has_x() const { return variant != Variant::kYOnly; }
  bool has_y() const { return variant != Variant::kXOnly; }
  int offset_channel_count() const;
  void validate() const;  // L_base in S_odd; S_odd odd, increasing, >= 3
};

// Learnable state of one DSU layer.
struct DsuParams {
  DsuConfig config;
  Tensor w_c;            // 1 x C channel compressor
  Tensor w1;             // C_m x 1
  Tensor w2;             // 1 x C_m
  Tensor offset_kernel;  // O_off x C x 3 x 3
  Tensor agg_x;          // C x L_max depthwise taps (empty unless has_x)
  Tensor agg_y;          // C x L_max (empty unless has_y)

  static DsuParams init(const DsuConfig& config, uint64_t seed);
  std::vector<Tensor*> trainable();  // in a fixed documented order
  std::vector<const Tensor*> trainable() const;
  std::vector<std::string> trainable_names() const;
};

struct DsuParamNodes {
  NodeId w_c = -1, w1 = -1, w2 = -1, offset_kernel = -1, agg_x = -1, agg_y = -1;
};

DsuParamNodes push_params(Tape& tape, const DsuParams& params);

// Per-sample result of the dynamic stride selection (Eqs 1-3).
struct StrideDecision {
  double z = 0.0;
  double l_dy = 0.0;
  int l_odd = 0;
  int c = 0;  // (l_odd - 1) / 2
};

struct StrideHead {
  Tensor w1;  // C_m x 1
  Tensor w2;  // 1 x C_m
  int l_base = 5;
  std::vector<int> s_odd = {3, 5, 7, 9};
};

// Eq 2 + odd rounding on a precomputed scalar z (forward only; the tape path
// inside dsu_forward produces the same arithmetic).
StrideDecision dynamic_stride(double z, const StrideHead& head);

// Pools W_c . X over space, per sample: z_n = mean_ij(W_c . X_n,:,i,j).
// Returns an N x 1 node.
NodeId compress_to_scalar(Tape& tape, NodeId x, NodeId w_c);

struct InitialOffset {
  double dx = 0.0;
  double dy = 0.0;
};

// The four subpixel seeds for integer scale factor 2, ordered TL, TR, BL, BR.
// Any other scale raises ParamError.
std::array<InitialOffset, 4> initial_offsets(int scale = 2);

// One snake path: l_max fractional coordinates with a validity mask holding
// exactly l_odd true entries symmetric about the center.
struct SnakePath {
  std::vector<std::array<double, 2>> points;  // (x, y)
  std::vector<bool> valid;
  int center_index = 0;
};

SnakePath build_snake_path_x(double center_x, double center_y, double dx0, double dy0,
                             const std::vector<double>& plus_steps,
                             const std::vector<double>& minus_steps, int l_odd, int l_max);
SnakePath build_snake_path_y(double center_x, double center_y, double dx0, double dy0,
                             const std::vector<double>& plus_steps,
                             const std::vector<double>& minus_steps, int l_odd, int l_max);

// How the stride decision reaches the sampler.
//  kSte:     forward rounds to S_odd, backward passes gradients through as-is.
//  kRelaxed: forward keeps the continuous L_dy for the rescale (masks still
//            use the rounded value); the layer is then differentiable
//            end-to-end, which is what the finite-difference checks probe.
//  kFixed:   stride pinned to fixed_stride; the stride head is bypassed.
enum class StrideMode { kSte, kRelaxed, kFixed };

struct DsuForwardOptions {
  StrideMode mode = StrideMode::kSte;
  int fixed_stride = 0;
};

// Optional capture of the layer internals for visualization and tests.
struct DsuTrace {
  std::vector<double> z;
  std::vector<double> l_dy;
  std::vector<int> l_odd;
  Tensor coords_x;  // N x P x 2 (empty unless has_x)
  Tensor coords_y;
};

// The full layer: stride selection, offset head, snake sampling, masked
// depthwise aggregation, branch fusion. Input N x C x H x W, output
// N x C x 2H x 2W, differentiable w.r.t. x and every parameter node.
NodeId dsu_forward(Tape& tape, NodeId x, const DsuParamNodes& nodes, const DsuConfig& config,
                   const DsuForwardOptions& options = {}, DsuTrace* trace = nullptr);

// Closed-form cost accounting for a configuration.
struct CostReport {
  int64_t param_count = 0;
  double macs_per_output_pixel = 0.0;  // multiply-adds, excludes the per-sample head
  double per_sample_head_macs = 0.0;   // W1/W2 stride head (independent of H, W)
  std::string formula;
};

CostReport count_params_flops(const DsuConfig& config);

// Total multiply-adds for one sample at a given input size:
// macs_per_output_pixel * (2H * 2W). The per-sample head cost is reported
// separately so this product scales exactly with pixel count.
double total_macs(const CostReport& report, int height, int width);

}  // namespace tubekit::dsu
