#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "tubekit/tensor.hpp"

namespace tubekit {

using NodeId = int;

enum class OpKind : uint8_t {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kAffine,          // scale * a + shift
  kSum,             // sum of all elements -> scalar
  kRelu,
  kTanh,
  kSigmoid,
  kLinear,          // x (M x K), W (O x K), optional bias (O)
  kConv2d,          // x NCHW, kernel OIKK; iattrs: stride, pad
  kBiasAddC,        // x NCHW + bias (C)
  kGlobalAvgPool,   // NCHW -> N x C x 1 x 1
  kGridSample,      // x NCHW, coords N x P x 2 -> N x C x P
  kReshape,
  kRoundOddSte,     // round to nearest member of S_odd, ties toward smaller; backward = identity
  kRdivConst,       // c / a elementwise
  kScalePerSample,  // x (N x ...) * s (N) broadcast over each sample
  kSnakeCoords,     // offset map N x O x H x W -> path coords N x P x 2
  kPathAggregate,   // sampled N x C x (Q*L), taps C x L -> N x C x Q with per-sample masks
  kWeightedDice,    // pred, gt, weights -> scalar loss; gradient flows to pred only
};

// Recorded computation graph. Nodes are appended in evaluation order, so the
// reverse index order is a reverse topological order; backward() replays it,
// accumulating gradients additively across fan-out. Node storage is a deque
// so value()/grad() references stay valid while the tape grows.
class Tape {
 public:
  struct Node {
    OpKind op = OpKind::kLeaf;
    Tensor value;
    Tensor grad;
    std::vector<NodeId> inputs;
    std::vector<double> attrs;
    std::vector<int64_t> iattrs;
  };

  NodeId leaf(Tensor value);

  const Tensor& value(NodeId id) const { return node(id).value; }
  const Tensor& grad(NodeId id) const { return node(id).grad; }
  int size() const { return static_cast<int>(nodes_.size()); }

  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId affine(NodeId a, double scale, double shift);
  NodeId sum(NodeId a);
  NodeId relu(NodeId a);
  NodeId tanh(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId linear(NodeId x, NodeId weights, std::optional<NodeId> bias = std::nullopt);
  NodeId conv2d(NodeId x, NodeId kernel, int stride, int padding);
  NodeId bias_add_channel(NodeId x, NodeId bias);
  NodeId global_avg_pool(NodeId x);
  NodeId grid_sample_bilinear(NodeId x, NodeId coords);
  NodeId reshape(NodeId a, std::vector<int64_t> shape);
  NodeId round_odd_ste(NodeId a, const std::vector<int>& s_odd, bool relaxed);
  NodeId rdiv_const(double numerator, NodeId a);
  NodeId scale_per_sample(NodeId x, NodeId per_sample);
  NodeId snake_coords(NodeId offsets, int height, int width, int l_max, int axis,
                      int n_variants, int variant_index);
  NodeId path_aggregate(NodeId sampled, NodeId taps, const std::vector<int>& l_odd_per_sample,
                        int l_max);
  NodeId weighted_dice(NodeId pred, NodeId gt, NodeId weights, double epsilon);

  // Seeds d(output)/d(output) = 1 at a scalar node and replays the tape in
  // reverse. Call zero_grad() first when reusing a tape.
  void backward(NodeId output);
  // Seeds an arbitrary upstream gradient (shape must match the node value).
  void backward_from(NodeId output, const Tensor& seed);
  void zero_grad();

 private:
  const Node& node(NodeId id) const { return nodes_[static_cast<size_t>(id)]; }
  Node& node(NodeId id) { return nodes_[static_cast<size_t>(id)]; }
  NodeId push(Node n);
  void backprop_node(NodeId id);

  std::deque<Node> nodes_;
};

// Forward-only helpers shared by the tape and standalone callers.
double round_to_odd_set(double value, const std::vector<int>& s_odd);
Tensor bilinear_sample_forward(const Tensor& input, const Tensor& coords);

}  // namespace tubekit
