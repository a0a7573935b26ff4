#include "tubekit/tape.hpp"

#include <cmath>

#include "tubekit/snake_geometry.hpp"

namespace tubekit {

namespace {

// Clamp to the pixel-center box and resolve the bilinear cell. Coordinates at
// the right/bottom edge collapse to the border cell with zero fraction.
struct BilinearCell {
  int64_t lo;
  int64_t hi;
  double frac;
  bool clamped;
};

BilinearCell resolve_cell(double coord, int64_t extent) {
  BilinearCell c{};
  double v = coord;
  c.clamped = false;
  if (v < 0.0) {
    v = 0.0;
    c.clamped = true;
  } else if (v > static_cast<double>(extent - 1)) {
    v = static_cast<double>(extent - 1);
    c.clamped = true;
  }
  int64_t lo = static_cast<int64_t>(std::floor(v));
  if (lo > extent - 2) lo = extent - 2;
  if (lo < 0) lo = 0;  // extent == 1
  int64_t hi = lo + 1;
  if (hi > extent - 1) hi = extent - 1;
  c.lo = lo;
  c.hi = hi;
  c.frac = v - static_cast<double>(lo);
  return c;
}

}  // namespace

double round_to_odd_set(double value, const std::vector<int>& s_odd) {
  int best = s_odd.front();
  double best_d = std::abs(value - static_cast<double>(best));
  for (size_t i = 1; i < s_odd.size(); ++i) {
    double d = std::abs(value - static_cast<double>(s_odd[i]));
    if (d < best_d) {  // strict: ties keep the smaller (earlier) member
      best_d = d;
      best = s_odd[i];
    }
  }
  return static_cast<double>(best);
}

Tensor bilinear_sample_forward(const Tensor& input, const Tensor& coords) {
  require_rank(input, 4, "grid_sample input");
  require_rank(coords, 3, "grid_sample coords");
  if (coords.dim(2) != 2) {
    throw ShapeError("grid_sample coords: last axis must be 2 (x, y), got " + coords.shape_str());
  }
  if (coords.dim(0) != input.dim(0)) {
    throw ShapeError("grid_sample: batch axis mismatch, input " + input.shape_str() +
                     " vs coords " + coords.shape_str());
  }
  const int64_t n_batch = input.dim(0), n_ch = input.dim(1), h = input.dim(2), w = input.dim(3);
  const int64_t n_pts = coords.dim(1);
  Tensor out = Tensor::zeros({n_batch, n_ch, n_pts});
  for (int64_t n = 0; n < n_batch; ++n) {
    for (int64_t p = 0; p < n_pts; ++p) {
      double cx = coords.data[static_cast<size_t>((n * n_pts + p) * 2 + 0)];
      double cy = coords.data[static_cast<size_t>((n * n_pts + p) * 2 + 1)];
      if (!std::isfinite(cx) || !std::isfinite(cy)) {
        throw NumericError("grid_sample: non-finite coordinate at sample " + std::to_string(n) +
                           ", point " + std::to_string(p));
      }
      BilinearCell xc = resolve_cell(cx, w);
      BilinearCell yc = resolve_cell(cy, h);
      for (int64_t c = 0; c < n_ch; ++c) {
        double v00 = input.at4(n, c, yc.lo, xc.lo);
        double v01 = input.at4(n, c, yc.lo, xc.hi);
        double v10 = input.at4(n, c, yc.hi, xc.lo);
        double v11 = input.at4(n, c, yc.hi, xc.hi);
        double top = v00 + xc.frac * (v01 - v00);
        double bot = v10 + xc.frac * (v11 - v10);
        out.data[static_cast<size_t>((n * n_ch + c) * n_pts + p)] = top + yc.frac * (bot - top);
      }
    }
  }
  return out;
}

NodeId Tape::push(Node n) {
  n.grad = Tensor::zeros(n.value.shape);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::leaf(Tensor value) {
  Node n;
  n.op = OpKind::kLeaf;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  require_same_shape(value(a), value(b), "add");
  Node n;
  n.op = OpKind::kAdd;
  n.inputs = {a, b};
  n.value = value(a);
  for (size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] += value(b).data[i];
  return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  require_same_shape(value(a), value(b), "sub");
  Node n;
  n.op = OpKind::kSub;
  n.inputs = {a, b};
  n.value = value(a);
  for (size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] -= value(b).data[i];
  return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
  require_same_shape(value(a), value(b), "mul");
  Node n;
  n.op = OpKind::kMul;
  n.inputs = {a, b};
  n.value = value(a);
  for (size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] *= value(b).data[i];
  return push(std::move(n));
}

NodeId Tape::affine(NodeId a, double scale, double shift) {
  Node n;
  n.op = OpKind::kAffine;
  n.inputs = {a};
  n.attrs = {scale, shift};
  n.value = value(a);
  for (double& v : n.value.data) v = scale * v + shift;
  return push(std::move(n));
}

NodeId Tape::sum(NodeId a) {
  Node n;
  n.op = OpKind::kSum;
  n.inputs = {a};
  double total = 0.0;
  for (double v : value(a).data) total += v;
  n.value = Tensor::scalar(total);
  return push(std::move(n));
}

NodeId Tape::relu(NodeId a) {
  Node n;
  n.op = OpKind::kRelu;
  n.inputs = {a};
  n.value = value(a);
  for (double& v : n.value.data) v = v > 0.0 ? v : 0.0;
  return push(std::move(n));
}

NodeId Tape::tanh(NodeId a) {
  Node n;
  n.op = OpKind::kTanh;
  n.inputs = {a};
  n.value = value(a);
  for (double& v : n.value.data) v = std::tanh(v);
  return push(std::move(n));
}

NodeId Tape::sigmoid(NodeId a) {
  Node n;
  n.op = OpKind::kSigmoid;
  n.inputs = {a};
  n.value = value(a);
  for (double& v : n.value.data) v = 1.0 / (1.0 + std::exp(-v));
  return push(std::move(n));
}

NodeId Tape::linear(NodeId x, NodeId weights, std::optional<NodeId> bias) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(weights);
  require_rank(wv, 2, "linear weights");
  const int64_t n_out = wv.dim(0), n_in = wv.dim(1);
  int64_t rows;
  if (xv.rank() == 1) {
    rows = 1;
    if (xv.dim(0) != n_in) {
      throw ShapeError("linear: x has " + std::to_string(xv.dim(0)) + " features, weights expect " +
                       std::to_string(n_in));
    }
  } else if (xv.rank() == 2) {
    rows = xv.dim(0);
    if (xv.dim(1) != n_in) {
      throw ShapeError("linear: x inner axis " + std::to_string(xv.dim(1)) +
                       " != weights inner axis " + std::to_string(n_in));
    }
  } else {
    throw ShapeError("linear: x must be rank 1 or 2, got " + xv.shape_str());
  }
  if (bias) {
    const Tensor& bv = value(*bias);
    if (bv.numel() != n_out) {
      throw ShapeError("linear: bias length " + std::to_string(bv.numel()) + " != output width " +
                       std::to_string(n_out));
    }
  }
  Node n;
  n.op = OpKind::kLinear;
  n.inputs = {x, weights};
  if (bias) n.inputs.push_back(*bias);
  n.value = xv.rank() == 1 ? Tensor::zeros({n_out}) : Tensor::zeros({rows, n_out});
  for (int64_t m = 0; m < rows; ++m) {
    for (int64_t o = 0; o < n_out; ++o) {
      double acc = bias ? value(*bias).data[static_cast<size_t>(o)] : 0.0;
      for (int64_t k = 0; k < n_in; ++k) {
        acc += xv.data[static_cast<size_t>(m * n_in + k)] * wv.data[static_cast<size_t>(o * n_in + k)];
      }
      n.value.data[static_cast<size_t>(m * n_out + o)] = acc;
    }
  }
  return push(std::move(n));
}

NodeId Tape::conv2d(NodeId x, NodeId kernel, int stride, int padding) {
  const Tensor& xv = value(x);
  const Tensor& kv = value(kernel);
  require_rank(xv, 4, "conv2d input");
  require_rank(kv, 4, "conv2d kernel");
  if (stride < 1) throw ParamError("conv2d: stride must be >= 1");
  if (padding < 0) throw ParamError("conv2d: padding must be >= 0");
  const int64_t n_batch = xv.dim(0), c_in = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
  const int64_t c_out = kv.dim(0), kh = kv.dim(2), kw = kv.dim(3);
  if (kv.dim(1) != c_in) {
    throw ShapeError("conv2d: kernel input channels " + std::to_string(kv.dim(1)) +
                     " != input channels " + std::to_string(c_in));
  }
  const int64_t h_out = (h + 2 * padding - kh) / stride + 1;
  const int64_t w_out = (w + 2 * padding - kw) / stride + 1;
  if (h + 2 * padding < kh || w + 2 * padding < kw || h_out < 1 || w_out < 1) {
    throw ShapeError("conv2d: non-positive output size for input " + xv.shape_str() + ", kernel " +
                     kv.shape_str() + ", stride " + std::to_string(stride) + ", padding " +
                     std::to_string(padding));
  }
  Node n;
  n.op = OpKind::kConv2d;
  n.inputs = {x, kernel};
  n.iattrs = {stride, padding};
  n.value = Tensor::zeros({n_batch, c_out, h_out, w_out});
  // accumulate one kernel tap at a time over contiguous rows
  for (int64_t b = 0; b < n_batch; ++b) {
    for (int64_t o = 0; o < c_out; ++o) {
      double* out_plane = n.value.data.data() + (b * c_out + o) * h_out * w_out;
      for (int64_t ci = 0; ci < c_in; ++ci) {
        const double* in_plane = xv.data.data() + (b * c_in + ci) * h * w;
        const double* k_tap = kv.data.data() + (o * c_in + ci) * kh * kw;
        for (int64_t u = 0; u < kh; ++u) {
          for (int64_t v = 0; v < kw; ++v) {
            const double kval = k_tap[u * kw + v];
            if (kval == 0.0) continue;
            for (int64_t oy = 0; oy < h_out; ++oy) {
              const int64_t iy = oy * stride + u - padding;
              if (iy < 0 || iy >= h) continue;
              const double* in_row = in_plane + iy * w;
              double* out_row = out_plane + oy * w_out;
              const int64_t ix0 = v - padding;
              for (int64_t ox = 0; ox < w_out; ++ox) {
                const int64_t ix = ox * stride + ix0;
                if (ix < 0 || ix >= w) continue;
                out_row[ox] += kval * in_row[ix];
              }
            }
          }
        }
      }
    }
  }
  return push(std::move(n));
}

NodeId Tape::bias_add_channel(NodeId x, NodeId bias) {
  const Tensor& xv = value(x);
  const Tensor& bv = value(bias);
  require_rank(xv, 4, "bias_add input");
  if (bv.numel() != xv.dim(1)) {
    throw ShapeError("bias_add: bias length " + std::to_string(bv.numel()) + " != channel count " +
                     std::to_string(xv.dim(1)));
  }
  Node n;
  n.op = OpKind::kBiasAddC;
  n.inputs = {x, bias};
  n.value = xv;
  const int64_t plane = xv.dim(2) * xv.dim(3);
  for (int64_t b = 0; b < xv.dim(0); ++b) {
    for (int64_t c = 0; c < xv.dim(1); ++c) {
      double bc = bv.data[static_cast<size_t>(c)];
      double* base = n.value.data.data() + (b * xv.dim(1) + c) * plane;
      for (int64_t i = 0; i < plane; ++i) base[i] += bc;
    }
  }
  return push(std::move(n));
}

NodeId Tape::global_avg_pool(NodeId x) {
  const Tensor& xv = value(x);
  require_rank(xv, 4, "global_avg_pool input");
  const int64_t n_batch = xv.dim(0), n_ch = xv.dim(1), plane = xv.dim(2) * xv.dim(3);
  Node n;
  n.op = OpKind::kGlobalAvgPool;
  n.inputs = {x};
  n.value = Tensor::zeros({n_batch, n_ch, 1, 1});
  for (int64_t b = 0; b < n_batch; ++b) {
    for (int64_t c = 0; c < n_ch; ++c) {
      const double* base = xv.data.data() + (b * n_ch + c) * plane;
      double acc = 0.0;
      for (int64_t i = 0; i < plane; ++i) acc += base[i];
      n.value.data[static_cast<size_t>(b * n_ch + c)] = acc / static_cast<double>(plane);
    }
  }
  return push(std::move(n));
}

NodeId Tape::grid_sample_bilinear(NodeId x, NodeId coords) {
  Node n;
  n.op = OpKind::kGridSample;
  n.inputs = {x, coords};
  n.value = bilinear_sample_forward(value(x), value(coords));
  return push(std::move(n));
}

NodeId Tape::reshape(NodeId a, std::vector<int64_t> shape) {
  if (shape_numel(shape) != value(a).numel()) {
    throw ShapeError("reshape: cannot view " + value(a).shape_str() + " as " +
                     shape_to_string(shape));
  }
  Node n;
  n.op = OpKind::kReshape;
  n.inputs = {a};
  n.value = Tensor(std::move(shape), value(a).data);
  return push(std::move(n));
}

NodeId Tape::round_odd_ste(NodeId a, const std::vector<int>& s_odd, bool relaxed) {
  if (s_odd.empty()) throw ParamError("round_odd_ste: empty stride set");
  Node n;
  n.op = OpKind::kRoundOddSte;
  n.inputs = {a};
  n.iattrs.push_back(relaxed ? 1 : 0);
  for (int s : s_odd) n.iattrs.push_back(s);
  n.value = value(a);
  if (!relaxed) {
    for (double& v : n.value.data) v = round_to_odd_set(v, s_odd);
  }
  return push(std::move(n));
}

NodeId Tape::rdiv_const(double numerator, NodeId a) {
  Node n;
  n.op = OpKind::kRdivConst;
  n.inputs = {a};
  n.attrs = {numerator};
  n.value = value(a);
  for (double& v : n.value.data) v = numerator / v;
  return push(std::move(n));
}

NodeId Tape::scale_per_sample(NodeId x, NodeId per_sample) {
  const Tensor& xv = value(x);
  const Tensor& sv = value(per_sample);
  if (sv.numel() != xv.dim(0)) {
    throw ShapeError("scale_per_sample: scale count " + std::to_string(sv.numel()) +
                     " != batch size " + std::to_string(xv.dim(0)));
  }
  Node n;
  n.op = OpKind::kScalePerSample;
  n.inputs = {x, per_sample};
  n.value = xv;
  const int64_t per = xv.numel() / xv.dim(0);
  for (int64_t b = 0; b < xv.dim(0); ++b) {
    double s = sv.data[static_cast<size_t>(b)];
    double* base = n.value.data.data() + b * per;
    for (int64_t i = 0; i < per; ++i) base[i] *= s;
  }
  return push(std::move(n));
}

NodeId Tape::snake_coords(NodeId offsets, int height, int width, int l_max, int axis,
                          int n_variants, int variant_index) {
  const Tensor& ov = value(offsets);
  require_rank(ov, 4, "snake_coords offsets");
  const int64_t n_batch = ov.dim(0);
  const int want = snake::offset_channels(n_variants, l_max);
  if (ov.dim(1) != want) {
    throw ShapeError("snake_coords: offset map has " + std::to_string(ov.dim(1)) +
                     " channels, layout expects " + std::to_string(want));
  }
  if (ov.dim(2) != height || ov.dim(3) != width) {
    throw ShapeError("snake_coords: offset map spatial dims " + ov.shape_str() +
                     " do not match H=" + std::to_string(height) + " W=" + std::to_string(width));
  }
  const int k_half = snake::half_span(l_max);
  const int64_t out_h = 2 * height, out_w = 2 * width;
  const int64_t n_pts = out_h * out_w * l_max;
  Node n;
  n.op = OpKind::kSnakeCoords;
  n.inputs = {offsets};
  n.iattrs = {height, width, l_max, axis, n_variants, variant_index};
  n.value = Tensor::zeros({n_batch, n_pts, 2});
  for (int64_t b = 0; b < n_batch; ++b) {
    for (int64_t oy = 0; oy < out_h; ++oy) {
      const int64_t pi = oy / 2;
      for (int64_t ox = 0; ox < out_w; ++ox) {
        const int64_t pj = ox / 2;
        const int s = static_cast<int>((oy % 2) * 2 + (ox % 2));
        const int base = snake::block_base(s, variant_index, n_variants, l_max);
        const double cx = static_cast<double>(pj) + snake::subpixel_dx(s) +
                          ov.at4(b, snake::ch_center_dx(base), pi, pj);
        const double cy = static_cast<double>(pi) + snake::subpixel_dy(s) +
                          ov.at4(b, snake::ch_center_dy(base), pi, pj);
        for (int t = 0; t < l_max; ++t) {
          const int k = t - k_half;
          double along = static_cast<double>(k);
          double across = 0.0;
          for (int m = 1; m <= k; ++m) across += ov.at4(b, snake::ch_step_plus(base, m), pi, pj);
          for (int m = 1; m <= -k; ++m)
            across += ov.at4(b, snake::ch_step_minus(base, m, l_max), pi, pj);
          const int64_t p = (oy * out_w + ox) * l_max + t;
          double* dst = n.value.data.data() + (b * n_pts + p) * 2;
          if (axis == 0) {  // X-type: unit steps in x, accumulated offsets in y
            dst[0] = cx + along;
            dst[1] = cy + across;
          } else {  // Y-type
            dst[0] = cx + across;
            dst[1] = cy + along;
          }
        }
      }
    }
  }
  return push(std::move(n));
}

NodeId Tape::path_aggregate(NodeId sampled, NodeId taps, const std::vector<int>& l_odd_per_sample,
                            int l_max) {
  const Tensor& sv = value(sampled);
  const Tensor& kv = value(taps);
  require_rank(sv, 3, "path_aggregate sampled");
  require_rank(kv, 2, "path_aggregate taps");
  const int64_t n_batch = sv.dim(0), n_ch = sv.dim(1), n_pts = sv.dim(2);
  if (kv.dim(0) != n_ch || kv.dim(1) != l_max) {
    throw ShapeError("path_aggregate: taps must be C x L = " + std::to_string(n_ch) + " x " +
                     std::to_string(l_max) + ", got " + kv.shape_str());
  }
  if (n_pts % l_max != 0) {
    throw ShapeError("path_aggregate: point count " + std::to_string(n_pts) +
                     " not divisible by L " + std::to_string(l_max));
  }
  if (static_cast<int64_t>(l_odd_per_sample.size()) != n_batch) {
    throw ShapeError("path_aggregate: need one stride per sample");
  }
  const int64_t n_q = n_pts / l_max;
  const int k_half = snake::half_span(l_max);
  Node n;
  n.op = OpKind::kPathAggregate;
  n.inputs = {sampled, taps};
  n.iattrs.push_back(l_max);
  for (int v : l_odd_per_sample) n.iattrs.push_back(v);
  n.value = Tensor::zeros({n_batch, n_ch, n_q});
  for (int64_t b = 0; b < n_batch; ++b) {
    const int c_n = (l_odd_per_sample[static_cast<size_t>(b)] - 1) / 2;
    for (int64_t c = 0; c < n_ch; ++c) {
      const double* src = sv.data.data() + (b * n_ch + c) * n_pts;
      const double* k_row = kv.data.data() + c * l_max;
      double* dst = n.value.data.data() + (b * n_ch + c) * n_q;
      for (int64_t q = 0; q < n_q; ++q) {
        double acc = 0.0;
        for (int t = 0; t < l_max; ++t) {
          if (std::abs(t - k_half) > c_n) continue;  // masked tap
          acc += k_row[t] * src[q * l_max + t];
        }
        dst[q] = acc;
      }
    }
  }
  return push(std::move(n));
}

NodeId Tape::weighted_dice(NodeId pred, NodeId gt, NodeId weights, double epsilon) {
  const Tensor& pv = value(pred);
  require_same_shape(pv, value(gt), "weighted_dice pred vs gt");
  require_same_shape(pv, value(weights), "weighted_dice pred vs weights");
  if (epsilon <= 0.0) throw ParamError("weighted_dice: epsilon must be > 0");
  const Tensor& gv = value(gt);
  const Tensor& wv = value(weights);
  double wpg = 0.0, wp = 0.0, wg = 0.0;
  for (size_t i = 0; i < pv.data.size(); ++i) {
    wpg += wv.data[i] * pv.data[i] * gv.data[i];
    wp += wv.data[i] * pv.data[i];
    wg += wv.data[i] * gv.data[i];
  }
  Node n;
  n.op = OpKind::kWeightedDice;
  n.inputs = {pred, gt, weights};
  n.attrs = {epsilon};
  n.value = Tensor::scalar(1.0 - (2.0 * wpg + epsilon) / (wp + wg + epsilon));
  return push(std::move(n));
}

void Tape::zero_grad() {
  for (Node& n : nodes_) {
    std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
  }
}

void Tape::backward(NodeId output) {
  if (value(output).numel() != 1) {
    throw ShapeError("backward: output node must be scalar, got " + value(output).shape_str());
  }
  backward_from(output, Tensor::scalar(1.0));
}

void Tape::backward_from(NodeId output, const Tensor& seed) {
  if (seed.numel() != value(output).numel()) {
    throw ShapeError("backward_from: seed shape " + seed.shape_str() + " does not match node " +
                     value(output).shape_str());
  }
  Node& out = node(output);
  for (size_t i = 0; i < seed.data.size(); ++i) out.grad.data[i] += seed.data[i];
  for (NodeId id = output; id >= 0; --id) backprop_node(id);
}

void Tape::backprop_node(NodeId id) {
  Node& n = node(id);
  const Tensor& g = n.grad;
  switch (n.op) {
    case OpKind::kLeaf:
      break;
    case OpKind::kAdd: {
      Tensor& ga = node(n.inputs[0]).grad;
      Tensor& gb = node(n.inputs[1]).grad;
      for (size_t i = 0; i < g.data.size(); ++i) {
        ga.data[i] += g.data[i];
        gb.data[i] += g.data[i];
      }
      break;
    }
    case OpKind::kSub: {
      Tensor& ga = node(n.inputs[0]).grad;
      Tensor& gb = node(n.inputs[1]).grad;
      for (size_t i = 0; i < g.data.size(); ++i) {
        ga.data[i] += g.data[i];
        gb.data[i] -= g.data[i];
      }
      break;
    }
    case OpKind::kMul: {
      const Tensor& av = node(n.inputs[0]).value;
      const Tensor& bv = node(n.inputs[1]).value;
      Tensor& ga = node(n.inputs[0]).grad;
      Tensor& gb = node(n.inputs[1]).grad;
      for (size_t i = 0; i < g.data.size(); ++i) {
        ga.data[i] += g.data[i] * bv.data[i];
        gb.data[i] += g.data[i] * av.data[i];
      }
      break;
    }
    case OpKind::kAffine: {
      Tensor& ga = node(n.inputs[0]).grad;
      const double scale = n.attrs[0];
      for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += scale * g.data[i];
      break;
    }
    case OpKind::kSum: {
      Tensor& ga = node(n.inputs[0]).grad;
      const double gv = g.data[0];
      for (double& v : ga.data) v += gv;
      break;
    }
    case OpKind::kRelu: {
      const Tensor& av = node(n.inputs[0]).value;
      Tensor& ga = node(n.inputs[0]).grad;
      // subgradient 0 at exactly 0
      for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += av.data[i] > 0.0 ? g.data[i] : 0.0;
      break;
    }
    case OpKind::kTanh: {
      Tensor& ga = node(n.inputs[0]).grad;
      for (size_t i = 0; i < g.data.size(); ++i) {
        const double t = n.value.data[i];
        ga.data[i] += g.data[i] * (1.0 - t * t);
      }
      break;
    }
    case OpKind::kSigmoid: {
      Tensor& ga = node(n.inputs[0]).grad;
      for (size_t i = 0; i < g.data.size(); ++i) {
        const double s = n.value.data[i];
        ga.data[i] += g.data[i] * s * (1.0 - s);
      }
      break;
    }
    case OpKind::kLinear: {
      const Tensor& xv = node(n.inputs[0]).value;
      const Tensor& wv = node(n.inputs[1]).value;
      Tensor& gx = node(n.inputs[0]).grad;
      Tensor& gw = node(n.inputs[1]).grad;
      const int64_t n_out = wv.dim(0), n_in = wv.dim(1);
      const int64_t rows = xv.rank() == 1 ? 1 : xv.dim(0);
      for (int64_t m = 0; m < rows; ++m) {
        for (int64_t o = 0; o < n_out; ++o) {
          const double go = g.data[static_cast<size_t>(m * n_out + o)];
          for (int64_t k = 0; k < n_in; ++k) {
            gx.data[static_cast<size_t>(m * n_in + k)] += go * wv.data[static_cast<size_t>(o * n_in + k)];
            gw.data[static_cast<size_t>(o * n_in + k)] += go * xv.data[static_cast<size_t>(m * n_in + k)];
          }
        }
      }
      if (n.inputs.size() == 3) {
        Tensor& gb = node(n.inputs[2]).grad;
        for (int64_t m = 0; m < rows; ++m) {
          for (int64_t o = 0; o < n_out; ++o) {
            gb.data[static_cast<size_t>(o)] += g.data[static_cast<size_t>(m * n_out + o)];
          }
        }
      }
      break;
    }
    case OpKind::kConv2d: {
      const Tensor& xv = node(n.inputs[0]).value;
      const Tensor& kv = node(n.inputs[1]).value;
      Tensor& gx = node(n.inputs[0]).grad;
      Tensor& gk = node(n.inputs[1]).grad;
      const int64_t stride = n.iattrs[0], padding = n.iattrs[1];
      const int64_t n_batch = xv.dim(0), c_in = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
      const int64_t c_out = kv.dim(0), kh = kv.dim(2), kw = kv.dim(3);
      const int64_t h_out = n.value.dim(2), w_out = n.value.dim(3);
      for (int64_t b = 0; b < n_batch; ++b) {
        for (int64_t o = 0; o < c_out; ++o) {
          const double* g_plane = g.data.data() + (b * c_out + o) * h_out * w_out;
          for (int64_t ci = 0; ci < c_in; ++ci) {
            const double* in_plane = xv.data.data() + (b * c_in + ci) * h * w;
            double* gx_plane = gx.data.data() + (b * c_in + ci) * h * w;
            const double* k_tap = kv.data.data() + (o * c_in + ci) * kh * kw;
            double* gk_tap = gk.data.data() + (o * c_in + ci) * kh * kw;
            for (int64_t u = 0; u < kh; ++u) {
              for (int64_t v = 0; v < kw; ++v) {
                const double kval = k_tap[u * kw + v];
                double k_acc = 0.0;
                const int64_t ix0 = v - padding;
                for (int64_t oy = 0; oy < h_out; ++oy) {
                  const int64_t iy = oy * stride + u - padding;
                  if (iy < 0 || iy >= h) continue;
                  const double* g_row = g_plane + oy * w_out;
                  const double* in_row = in_plane + iy * w;
                  double* gx_row = gx_plane + iy * w;
                  for (int64_t ox = 0; ox < w_out; ++ox) {
                    const int64_t ix = ox * stride + ix0;
                    if (ix < 0 || ix >= w) continue;
                    const double go = g_row[ox];
                    gx_row[ix] += go * kval;
                    k_acc += go * in_row[ix];
                  }
                }
                gk_tap[u * kw + v] += k_acc;
              }
            }
          }
        }
      }
      break;
    }
    case OpKind::kBiasAddC: {
      const Tensor& xv = node(n.inputs[0]).value;
      Tensor& gx = node(n.inputs[0]).grad;
      Tensor& gb = node(n.inputs[1]).grad;
      const int64_t plane = xv.dim(2) * xv.dim(3);
      for (int64_t b = 0; b < xv.dim(0); ++b) {
        for (int64_t c = 0; c < xv.dim(1); ++c) {
          const double* gbase = g.data.data() + (b * xv.dim(1) + c) * plane;
          double* xbase = gx.data.data() + (b * xv.dim(1) + c) * plane;
          double acc = 0.0;
          for (int64_t i = 0; i < plane; ++i) {
            xbase[i] += gbase[i];
            acc += gbase[i];
          }
          gb.data[static_cast<size_t>(c)] += acc;
        }
      }
      break;
    }
    case OpKind::kGlobalAvgPool: {
      const Tensor& xv = node(n.inputs[0]).value;
      Tensor& gx = node(n.inputs[0]).grad;
      const int64_t n_ch = xv.dim(1), plane = xv.dim(2) * xv.dim(3);
      const double inv = 1.0 / static_cast<double>(plane);
      for (int64_t b = 0; b < xv.dim(0); ++b) {
        for (int64_t c = 0; c < n_ch; ++c) {
          const double go = g.data[static_cast<size_t>(b * n_ch + c)] * inv;
          double* base = gx.data.data() + (b * n_ch + c) * plane;
          for (int64_t i = 0; i < plane; ++i) base[i] += go;
        }
      }
      break;
    }
    case OpKind::kGridSample: {
      const Tensor& xv = node(n.inputs[0]).value;
      const Tensor& cv = node(n.inputs[1]).value;
      Tensor& gx = node(n.inputs[0]).grad;
      Tensor& gc = node(n.inputs[1]).grad;
      const int64_t n_batch = xv.dim(0), n_ch = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
      const int64_t n_pts = cv.dim(1);
      for (int64_t b = 0; b < n_batch; ++b) {
        for (int64_t p = 0; p < n_pts; ++p) {
          const double cx = cv.data[static_cast<size_t>((b * n_pts + p) * 2 + 0)];
          const double cy = cv.data[static_cast<size_t>((b * n_pts + p) * 2 + 1)];
          const BilinearCell xc = resolve_cell(cx, w);
          const BilinearCell yc = resolve_cell(cy, h);
          double dgx = 0.0, dgy = 0.0;
          for (int64_t c = 0; c < n_ch; ++c) {
            const double go = g.data[static_cast<size_t>((b * n_ch + c) * n_pts + p)];
            if (go == 0.0) continue;
            gx.at4(b, c, yc.lo, xc.lo) += go * (1.0 - yc.frac) * (1.0 - xc.frac);
            gx.at4(b, c, yc.lo, xc.hi) += go * (1.0 - yc.frac) * xc.frac;
            gx.at4(b, c, yc.hi, xc.lo) += go * yc.frac * (1.0 - xc.frac);
            gx.at4(b, c, yc.hi, xc.hi) += go * yc.frac * xc.frac;
            const double v00 = xv.at4(b, c, yc.lo, xc.lo);
            const double v01 = xv.at4(b, c, yc.lo, xc.hi);
            const double v10 = xv.at4(b, c, yc.hi, xc.lo);
            const double v11 = xv.at4(b, c, yc.hi, xc.hi);
            dgx += go * ((1.0 - yc.frac) * (v01 - v00) + yc.frac * (v11 - v10));
            dgy += go * ((1.0 - xc.frac) * (v10 - v00) + xc.frac * (v11 - v01));
          }
          // zero coordinate gradient where the clamp is active
          if (!xc.clamped) gc.data[static_cast<size_t>((b * n_pts + p) * 2 + 0)] += dgx;
          if (!yc.clamped) gc.data[static_cast<size_t>((b * n_pts + p) * 2 + 1)] += dgy;
        }
      }
      break;
    }
    case OpKind::kReshape: {
      Tensor& ga = node(n.inputs[0]).grad;
      for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
      break;
    }
    case OpKind::kRoundOddSte: {
      // straight-through: d(rounded)/d(input) treated as 1
      Tensor& ga = node(n.inputs[0]).grad;
      for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
      break;
    }
    case OpKind::kRdivConst: {
      const Tensor& av = node(n.inputs[0]).value;
      Tensor& ga = node(n.inputs[0]).grad;
      const double c = n.attrs[0];
      for (size_t i = 0; i < g.data.size(); ++i) {
        ga.data[i] -= g.data[i] * c / (av.data[i] * av.data[i]);
      }
      break;
    }
    case OpKind::kScalePerSample: {
      const Tensor& xv = node(n.inputs[0]).value;
      const Tensor& sv = node(n.inputs[1]).value;
      Tensor& gx = node(n.inputs[0]).grad;
      Tensor& gs = node(n.inputs[1]).grad;
      const int64_t per = xv.numel() / xv.dim(0);
      for (int64_t b = 0; b < xv.dim(0); ++b) {
        const double s = sv.data[static_cast<size_t>(b)];
        const double* gbase = g.data.data() + b * per;
        const double* xbase = xv.data.data() + b * per;
        double* gxbase = gx.data.data() + b * per;
        double acc = 0.0;
        for (int64_t i = 0; i < per; ++i) {
          gxbase[i] += gbase[i] * s;
          acc += gbase[i] * xbase[i];
        }
        gs.data[static_cast<size_t>(b)] += acc;
      }
      break;
    }
    case OpKind::kSnakeCoords: {
      Tensor& go = node(n.inputs[0]).grad;
      const int64_t height = n.iattrs[0], width = n.iattrs[1];
      const int l_max = static_cast<int>(n.iattrs[2]);
      const int axis = static_cast<int>(n.iattrs[3]);
      const int n_variants = static_cast<int>(n.iattrs[4]);
      const int v_idx = static_cast<int>(n.iattrs[5]);
      const int k_half = snake::half_span(l_max);
      const int64_t out_h = 2 * height, out_w = 2 * width;
      const int64_t n_pts = out_h * out_w * l_max;
      const int64_t n_batch = go.dim(0);
      for (int64_t b = 0; b < n_batch; ++b) {
        for (int64_t oy = 0; oy < out_h; ++oy) {
          const int64_t pi = oy / 2;
          for (int64_t ox = 0; ox < out_w; ++ox) {
            const int64_t pj = ox / 2;
            const int s = static_cast<int>((oy % 2) * 2 + (ox % 2));
            const int base = snake::block_base(s, v_idx, n_variants, l_max);
            for (int t = 0; t < l_max; ++t) {
              const int k = t - k_half;
              const int64_t p = (oy * out_w + ox) * l_max + t;
              const double g_x = g.data[static_cast<size_t>((b * n_pts + p) * 2 + 0)];
              const double g_y = g.data[static_cast<size_t>((b * n_pts + p) * 2 + 1)];
              const double g_across = axis == 0 ? g_y : g_x;  // transverse step chain
              go.at4(b, snake::ch_center_dx(base), pi, pj) += g_x;
              go.at4(b, snake::ch_center_dy(base), pi, pj) += g_y;
              for (int m = 1; m <= k; ++m) {
                go.at4(b, snake::ch_step_plus(base, m), pi, pj) += g_across;
              }
              for (int m = 1; m <= -k; ++m) {
                go.at4(b, snake::ch_step_minus(base, m, l_max), pi, pj) += g_across;
              }
            }
          }
        }
      }
      break;
    }
    case OpKind::kPathAggregate: {
      const Tensor& sv = node(n.inputs[0]).value;
      const Tensor& kv = node(n.inputs[1]).value;
      Tensor& gs = node(n.inputs[0]).grad;
      Tensor& gk = node(n.inputs[1]).grad;
      const int l_max = static_cast<int>(n.iattrs[0]);
      const int k_half = snake::half_span(l_max);
      const int64_t n_batch = sv.dim(0), n_ch = sv.dim(1), n_pts = sv.dim(2);
      const int64_t n_q = n_pts / l_max;
      for (int64_t b = 0; b < n_batch; ++b) {
        const int c_n = (static_cast<int>(n.iattrs[static_cast<size_t>(1 + b)]) - 1) / 2;
        for (int64_t c = 0; c < n_ch; ++c) {
          const double* src = sv.data.data() + (b * n_ch + c) * n_pts;
          const double* k_row = kv.data.data() + c * l_max;
          double* gsrc = gs.data.data() + (b * n_ch + c) * n_pts;
          double* gkrow = gk.data.data() + c * l_max;
          const double* gq = g.data.data() + (b * n_ch + c) * n_q;
          for (int64_t q = 0; q < n_q; ++q) {
            const double go = gq[q];
            if (go == 0.0) continue;
            for (int t = 0; t < l_max; ++t) {
              if (std::abs(t - k_half) > c_n) continue;
              gsrc[q * l_max + t] += go * k_row[t];
              gkrow[t] += go * src[q * l_max + t];
            }
          }
        }
      }
      break;
    }
    case OpKind::kWeightedDice: {
      const Tensor& pv = node(n.inputs[0]).value;
      const Tensor& gv = node(n.inputs[1]).value;
      const Tensor& wv = node(n.inputs[2]).value;
      Tensor& gp = node(n.inputs[0]).grad;
      const double epsilon = n.attrs[0];
      double wpg = 0.0, wp = 0.0, wg = 0.0;
      for (size_t i = 0; i < pv.data.size(); ++i) {
        wpg += wv.data[i] * pv.data[i] * gv.data[i];
        wp += wv.data[i] * pv.data[i];
        wg += wv.data[i] * gv.data[i];
      }
      const double num = 2.0 * wpg + epsilon;
      const double den = wp + wg + epsilon;
      const double go = g.data[0];
      // quotient rule: dL/dp_i = w_i * (num - 2 g_i den) / den^2
      for (size_t i = 0; i < pv.data.size(); ++i) {
        gp.data[i] += go * wv.data[i] * (num - 2.0 * gv.data[i] * den) / (den * den);
      }
      break;
    }
  }
}

}  // namespace tubekit
