#include "tubekit/dsu.hpp"

#include <cmath>
#include <sstream>

#include "tubekit/rng.hpp"
#include "tubekit/snake_geometry.hpp"

namespace tubekit::dsu {

Variant variant_from_string(const std::string& s) {
  if (s == "x" || s == "x-only") return Variant::kXOnly;
  if (s == "y" || s == "y-only") return Variant::kYOnly;
  if (s == "both") return Variant::kBoth;
  throw ParamError("unknown DSU variant '" + s + "' (expected x, y or both)");
}

std::string variant_to_string(Variant v) {
  switch (v) {
    case Variant::kXOnly: return "x";
    case Variant::kYOnly: return "y";
    default: return "both";
  }
}

int DsuConfig::offset_channel_count() const {
  return snake::offset_channels(n_variants(), l_max());
}

void DsuConfig::validate() const {
  if (channels < 1) throw ParamError("DSU: channels must be >= 1");
  if (hidden_width < 1) throw ParamError("DSU: hidden width must be >= 1");
  if (s_odd.empty()) throw ParamError("DSU: S_odd must not be empty");
  int prev = 1;
  for (int s : s_odd) {
    if (s < 3 || s % 2 == 0) throw ParamError("DSU: S_odd entries must be odd and >= 3");
    if (s <= prev) throw ParamError("DSU: S_odd must be strictly increasing");
    prev = s;
  }
  bool base_in_set = false;
  for (int s : s_odd) base_in_set |= (s == l_base);
  if (!base_in_set) throw ParamError("DSU: L_base must be a member of S_odd");
}

DsuParams DsuParams::init(const DsuConfig& config, uint64_t seed) {
  config.validate();
  Rng rng(seed ^ 0x5d5u);
  const int c = config.channels;
  const int l = config.l_max();
  DsuParams p;
  p.config = config;
  p.w_c = Tensor::zeros({1, c});
  for (double& v : p.w_c.data) v = rng.gaussian(0.0, 0.2);
  p.w1 = Tensor::zeros({config.hidden_width, 1});
  for (double& v : p.w1.data) v = rng.gaussian(0.0, 0.2);
  p.w2 = Tensor::zeros({1, config.hidden_width});
  for (double& v : p.w2.data) v = rng.gaussian(0.0, 0.2);
  p.offset_kernel = Tensor::zeros({config.offset_channel_count(), c, 3, 3});
  for (double& v : p.offset_kernel.data) v = rng.gaussian(0.0, 0.02);
  // center-peaked taps: with L_odd near L_base the center weight cancels the
  // D7 rescale, so a fresh layer reproduces plain subpixel-center sampling
  auto init_taps = [&]() {
    Tensor taps = Tensor::zeros({c, l});
    const double center = static_cast<double>(config.l_base) / static_cast<double>(l);
    for (int ch = 0; ch < c; ++ch) {
      for (int t = 0; t < l; ++t) {
        taps.at2(ch, t) = rng.gaussian(0.0, 0.01) + (t == snake::half_span(l) ? center : 0.0);
      }
    }
    return taps;
  };
  if (config.has_x()) p.agg_x = init_taps();
  if (config.has_y()) p.agg_y = init_taps();
  return p;
}

std::vector<Tensor*> DsuParams::trainable() {
  std::vector<Tensor*> out = {&w_c, &w1, &w2, &offset_kernel};
  if (config.has_x()) out.push_back(&agg_x);
  if (config.has_y()) out.push_back(&agg_y);
  return out;
}

std::vector<const Tensor*> DsuParams::trainable() const {
  std::vector<const Tensor*> out = {&w_c, &w1, &w2, &offset_kernel};
  if (config.has_x()) out.push_back(&agg_x);
  if (config.has_y()) out.push_back(&agg_y);
  return out;
}

std::vector<std::string> DsuParams::trainable_names() const {
  std::vector<std::string> out = {"w_c", "w1", "w2", "offset_kernel"};
  if (config.has_x()) out.push_back("agg_x");
  if (config.has_y()) out.push_back("agg_y");
  return out;
}

DsuParamNodes push_params(Tape& tape, const DsuParams& params) {
  DsuParamNodes n;
  n.w_c = tape.leaf(params.w_c);
  n.w1 = tape.leaf(params.w1);
  n.w2 = tape.leaf(params.w2);
  n.offset_kernel = tape.leaf(params.offset_kernel);
  if (params.config.has_x()) n.agg_x = tape.leaf(params.agg_x);
  if (params.config.has_y()) n.agg_y = tape.leaf(params.agg_y);
  return n;
}

StrideDecision dynamic_stride(double z, const StrideHead& head) {
  const int64_t c_m = head.w1.dim(0);
  if (head.w1.rank() != 2 || head.w1.dim(1) != 1) {
    throw ShapeError("stride head: W1 must be C_m x 1, got " + head.w1.shape_str());
  }
  if (head.w2.rank() != 2 || head.w2.dim(0) != 1 || head.w2.dim(1) != c_m) {
    throw ShapeError("stride head: W2 must be 1 x C_m, got " + head.w2.shape_str());
  }
  double acc = 0.0;
  for (int64_t j = 0; j < c_m; ++j) {
    const double h = head.w1.data[static_cast<size_t>(j)] * z;
    acc += head.w2.data[static_cast<size_t>(j)] * (h > 0.0 ? h : 0.0);
  }
  StrideDecision d;
  d.z = z;
  d.l_dy = static_cast<double>(head.l_base) * (1.0 + 0.5 * std::tanh(acc));
  d.l_odd = static_cast<int>(round_to_odd_set(d.l_dy, head.s_odd));
  d.c = (d.l_odd - 1) / 2;
  return d;
}

NodeId compress_to_scalar(Tape& tape, NodeId x, NodeId w_c) {
  const Tensor& xv = tape.value(x);
  require_rank(xv, 4, "compress_to_scalar input");
  const Tensor& wv = tape.value(w_c);
  if (wv.rank() != 2 || wv.dim(0) != 1 || wv.dim(1) != xv.dim(1)) {
    throw ShapeError("compress_to_scalar: W_c must be 1 x C = 1 x " + std::to_string(xv.dim(1)) +
                     ", got " + wv.shape_str());
  }
  NodeId kernel = tape.reshape(w_c, {1, xv.dim(1), 1, 1});
  NodeId mixed = tape.conv2d(x, kernel, 1, 0);          // N x 1 x H x W
  NodeId pooled = tape.global_avg_pool(mixed);          // N x 1 x 1 x 1
  return tape.reshape(pooled, {xv.dim(0), 1});
}

std::array<InitialOffset, 4> initial_offsets(int scale) {
  if (scale != 2) {
    throw ParamError("initial_offsets: unsupported scale factor " + std::to_string(scale) +
                     " (only 2 is supported)");
  }
  std::array<InitialOffset, 4> table;
  for (int s = 0; s < 4; ++s) table[static_cast<size_t>(s)] = {snake::subpixel_dx(s), snake::subpixel_dy(s)};
  return table;
}

namespace {

SnakePath build_path(double center_x, double center_y, double dx0, double dy0,
                     const std::vector<double>& plus_steps, const std::vector<double>& minus_steps,
                     int l_odd, int l_max, bool x_type) {
  const int k_half = snake::half_span(l_max);
  if (static_cast<int>(plus_steps.size()) < k_half ||
      static_cast<int>(minus_steps.size()) < k_half) {
    throw ParamError("snake path: need (L_max-1)/2 step offsets per side");
  }
  const int c = (l_odd - 1) / 2;
  SnakePath path;
  path.center_index = k_half;
  path.points.resize(static_cast<size_t>(l_max));
  path.valid.resize(static_cast<size_t>(l_max));
  const double cx = center_x + dx0;
  const double cy = center_y + dy0;
  for (int t = 0; t < l_max; ++t) {
    const int k = t - k_half;
    double across = 0.0;
    for (int m = 1; m <= k; ++m) across += plus_steps[static_cast<size_t>(m - 1)];
    for (int m = 1; m <= -k; ++m) across += minus_steps[static_cast<size_t>(m - 1)];
    if (x_type) {
      path.points[static_cast<size_t>(t)] = {cx + static_cast<double>(k), cy + across};
    } else {
      path.points[static_cast<size_t>(t)] = {cx + across, cy + static_cast<double>(k)};
    }
    path.valid[static_cast<size_t>(t)] = std::abs(k) <= c;
  }
  return path;
}

}  // namespace

SnakePath build_snake_path_x(double center_x, double center_y, double dx0, double dy0,
                             const std::vector<double>& plus_steps,
                             const std::vector<double>& minus_steps, int l_odd, int l_max) {
  return build_path(center_x, center_y, dx0, dy0, plus_steps, minus_steps, l_odd, l_max, true);
}

SnakePath build_snake_path_y(double center_x, double center_y, double dx0, double dy0,
                             const std::vector<double>& plus_steps,
                             const std::vector<double>& minus_steps, int l_odd, int l_max) {
  return build_path(center_x, center_y, dx0, dy0, plus_steps, minus_steps, l_odd, l_max, false);
}

NodeId dsu_forward(Tape& tape, NodeId x, const DsuParamNodes& nodes, const DsuConfig& config,
                   const DsuForwardOptions& options, DsuTrace* trace) {
  config.validate();
  const Tensor& xv = tape.value(x);
  require_rank(xv, 4, "dsu_forward input");
  const int64_t n_batch = xv.dim(0), n_ch = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
  if (n_ch != config.channels) {
    throw ShapeError("dsu_forward: input has " + std::to_string(n_ch) +
                     " channels, layer configured for " + std::to_string(config.channels));
  }
  if (h < 2 || w < 2) {
    throw ShapeError("dsu_forward: spatial dims must be >= 2, got " + xv.shape_str());
  }
  const int l_max = config.l_max();

  // Eqs 1-3: per-sample stride decision.
  std::vector<int> l_odd(static_cast<size_t>(n_batch));
  NodeId l_used;
  if (options.mode == StrideMode::kFixed) {
    bool in_set = false;
    for (int s : config.s_odd) in_set |= (s == options.fixed_stride);
    if (!in_set) {
      throw ParamError("dsu_forward: fixed stride " + std::to_string(options.fixed_stride) +
                       " not in S_odd");
    }
    for (auto& v : l_odd) v = options.fixed_stride;
    l_used = tape.leaf(Tensor::full({n_batch, 1}, static_cast<double>(options.fixed_stride)));
    if (trace) {
      trace->z.assign(static_cast<size_t>(n_batch), 0.0);
      trace->l_dy.assign(static_cast<size_t>(n_batch), static_cast<double>(options.fixed_stride));
    }
  } else {
    NodeId z = compress_to_scalar(tape, x, nodes.w_c);                       // N x 1
    NodeId hidden = tape.relu(tape.linear(z, nodes.w1));                     // N x C_m
    NodeId gate = tape.tanh(tape.linear(hidden, nodes.w2));                  // N x 1
    NodeId l_dy = tape.affine(gate, 0.5 * config.l_base, config.l_base);     // Eq 2
    const Tensor& l_dy_v = tape.value(l_dy);
    for (int64_t b = 0; b < n_batch; ++b) {
      l_odd[static_cast<size_t>(b)] =
          static_cast<int>(round_to_odd_set(l_dy_v.data[static_cast<size_t>(b)], config.s_odd));
    }
    l_used = tape.round_odd_ste(l_dy, config.s_odd, options.mode == StrideMode::kRelaxed);
    if (trace) {
      const Tensor& zv = tape.value(z);
      trace->z.assign(zv.data.begin(), zv.data.end());
      trace->l_dy.assign(l_dy_v.data.begin(), l_dy_v.data.end());
    }
  }
  if (trace) trace->l_odd = l_odd;

  // D7 rescale keeps output magnitude stride-invariant.
  NodeId rescale = tape.rdiv_const(static_cast<double>(l_max), l_used);  // N x 1

  // Offset head (D3): 3x3 conv + tanh bounds every offset to (-1, 1).
  NodeId offsets = tape.tanh(tape.conv2d(x, nodes.offset_kernel, 1, 1));

  std::vector<NodeId> branches;
  auto run_branch = [&](int axis, int variant_index, NodeId taps, Tensor* coords_out) {
    NodeId coords = tape.snake_coords(offsets, static_cast<int>(h), static_cast<int>(w), l_max,
                                      axis, config.n_variants(), variant_index);
    if (coords_out) *coords_out = tape.value(coords);
    NodeId sampled = tape.grid_sample_bilinear(x, coords);
    NodeId agg = tape.path_aggregate(sampled, taps, l_odd, l_max);
    branches.push_back(tape.scale_per_sample(agg, rescale));
  };
  if (config.has_x()) run_branch(0, 0, nodes.agg_x, trace ? &trace->coords_x : nullptr);
  if (config.has_y()) {
    run_branch(1, config.has_x() ? 1 : 0, nodes.agg_y, trace ? &trace->coords_y : nullptr);
  }

  NodeId fused = branches.size() == 2 ? tape.affine(tape.add(branches[0], branches[1]), 0.5, 0.0)
                                      : branches[0];
  return tape.reshape(fused, {n_batch, n_ch, 2 * h, 2 * w});
}

CostReport count_params_flops(const DsuConfig& config) {
  config.validate();
  const int c = config.channels;
  const int cm = config.hidden_width;
  const int l = config.l_max();
  const int o_off = config.offset_channel_count();
  const int n_var = config.n_variants();

  CostReport r;
  r.param_count = c                       // W_c
                  + cm + cm               // W1, W2
                  + static_cast<int64_t>(o_off) * c * 3 * 3  // offset head
                  + static_cast<int64_t>(n_var) * c * l;     // depthwise aggregation taps
  // Per output pixel of the 2H x 2W map. Each input pixel feeds 4 outputs.
  const double compress = static_cast<double>(c) / 4.0;
  const double offset_head = static_cast<double>(o_off) * c * 9.0 / 4.0;
  const double sampling = static_cast<double>(n_var) * c * (4.0 * l + l + 1.0);
  const double fusion = n_var == 2 ? static_cast<double>(c) : 0.0;
  r.macs_per_output_pixel = compress + offset_head + sampling + fusion;
  r.per_sample_head_macs = 2.0 * cm;

  std::ostringstream os;
  os << "params = C + 2*C_m + O_off*C*9 + variants*C*L_max = " << c << " + " << 2 * cm << " + "
     << o_off * c * 9 << " + " << n_var * c * l << " = " << r.param_count << "; "
     << "macs/out-px = C/4 (compress) + O_off*C*9/4 (offset head) "
     << "+ variants*C*(5*L_max+1) (sample+aggregate+rescale)"
     << (n_var == 2 ? " + C (fusion)" : "") << " = " << r.macs_per_output_pixel
     << "; per-sample stride head = 2*C_m = " << r.per_sample_head_macs;
  r.formula = os.str();
  return r;
}

double total_macs(const CostReport& report, int height, int width) {
  return report.macs_per_output_pixel * 4.0 * static_cast<double>(height) *
         static_cast<double>(width);
}

}  // namespace tubekit::dsu
