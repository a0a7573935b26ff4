#include "tubekit/gradcheck_battery.hpp"

#include "tubekit/dsu.hpp"
#include "tubekit/rng.hpp"
#include "tubekit/tape.hpp"

namespace tubekit {

namespace {

Tensor random_tensor(std::vector<int64_t> shape, Rng& rng, double lo, double hi) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace

std::vector<CheckOutcome> run_gradcheck_battery(uint64_t seed) {
  std::vector<CheckOutcome> results;
  Rng rng(seed ^ 0x6a09e667f3bcc908ull);
  constexpr double kThreshold = 1e-5;

  // Each check projects the op output against a fixed random tensor so every
  // output coordinate influences the probed scalar.
  auto check = [&](const std::string& name, const std::vector<Tensor>& params, auto graph,
                   int probes) {
    Tape tape;
    std::vector<NodeId> ids;
    ids.reserve(params.size());
    for (const Tensor& p : params) ids.push_back(tape.leaf(p));
    NodeId loss = graph(tape, ids);
    tape.backward(loss);
    std::vector<Tensor> grads;
    grads.reserve(ids.size());
    for (NodeId id : ids) grads.push_back(tape.grad(id));
    ScalarFn fn = [graph](const std::vector<Tensor>& ps) {
      Tape t;
      std::vector<NodeId> local;
      local.reserve(ps.size());
      for (const Tensor& p : ps) local.push_back(t.leaf(p));
      return t.value(graph(t, local)).data[0];
    };
    CheckOutcome out;
    out.name = name;
    out.report = gradcheck(fn, params, grads, probes, 1e-4, seed);
    out.pass = out.report.max_rel_err < kThreshold;
    results.push_back(std::move(out));
  };
  auto projected = [](auto build_op, Tensor projection) {
    return [build_op, projection = std::move(projection)](Tape& tape,
                                                          const std::vector<NodeId>& ids) {
      NodeId out = build_op(tape, ids);
      NodeId proj = tape.leaf(projection);
      return tape.sum(tape.mul(out, proj));
    };
  };

  {
    Tensor x = random_tensor({2, 3, 5, 6}, rng, -1.0, 1.0);
    Tensor k = random_tensor({4, 3, 3, 3}, rng, -0.5, 0.5);
    Tensor proj = random_tensor({2, 4, 5, 6}, rng, -1.0, 1.0);
    check("conv2d(stride=1,pad=1)", {x, k},
          projected(
              [](Tape& t, const std::vector<NodeId>& ids) { return t.conv2d(ids[0], ids[1], 1, 1); },
              proj),
          12);
  }
  {
    Tensor x = random_tensor({1, 2, 7, 7}, rng, -1.0, 1.0);
    Tensor k = random_tensor({3, 2, 3, 3}, rng, -0.5, 0.5);
    Tensor proj = random_tensor({1, 3, 3, 3}, rng, -1.0, 1.0);
    check("conv2d(stride=2,pad=0)", {x, k},
          projected(
              [](Tape& t, const std::vector<NodeId>& ids) { return t.conv2d(ids[0], ids[1], 2, 0); },
              proj),
          12);
  }
  {
    Tensor x = random_tensor({3, 4}, rng, -1.0, 1.0);
    Tensor w = random_tensor({5, 4}, rng, -1.0, 1.0);
    Tensor b = random_tensor({5}, rng, -0.5, 0.5);
    Tensor proj = random_tensor({3, 5}, rng, -1.0, 1.0);
    check("linear(+bias)", {x, w, b},
          projected(
              [](Tape& t, const std::vector<NodeId>& ids) {
                return t.linear(ids[0], ids[1], ids[2]);
              },
              proj),
          10);
  }
  {
    // keep activations away from the relu kink
    Tensor x = Tensor::zeros({32});
    for (double& v : x.data) {
      const double u = rng.uniform(0.5, 1.5);
      v = rng.uniform() < 0.5 ? -u : u;
    }
    Tensor proj = random_tensor({32}, rng, -1.0, 1.0);
    check("relu", {x},
          projected([](Tape& t, const std::vector<NodeId>& ids) { return t.relu(ids[0]); }, proj),
          16);
  }
  {
    Tensor x = random_tensor({32}, rng, -2.0, 2.0);
    Tensor proj = random_tensor({32}, rng, -1.0, 1.0);
    check("tanh", {x},
          projected([](Tape& t, const std::vector<NodeId>& ids) { return t.tanh(ids[0]); }, proj),
          16);
  }
  {
    Tensor x = random_tensor({32}, rng, -2.0, 2.0);
    Tensor proj = random_tensor({32}, rng, -1.0, 1.0);
    check("sigmoid", {x},
          projected([](Tape& t, const std::vector<NodeId>& ids) { return t.sigmoid(ids[0]); },
                    proj),
          16);
  }
  {
    Tensor x = random_tensor({2, 3, 4, 5}, rng, -1.0, 1.0);
    Tensor proj = random_tensor({2, 3, 1, 1}, rng, -1.0, 1.0);
    check("global_avg_pool", {x},
          projected(
              [](Tape& t, const std::vector<NodeId>& ids) { return t.global_avg_pool(ids[0]); },
              proj),
          12);
  }
  {
    Tensor x = random_tensor({1, 2, 6, 7}, rng, -1.0, 1.0);
    Tensor coords = Tensor::zeros({1, 10, 2});
    for (int p = 0; p < 10; ++p) {
      coords.data[static_cast<size_t>(p * 2 + 0)] = rng.uniform(0.8, 5.2) + 0.013;
      coords.data[static_cast<size_t>(p * 2 + 1)] = rng.uniform(0.8, 4.2) + 0.017;
    }
    Tensor proj = random_tensor({1, 2, 10}, rng, -1.0, 1.0);
    check("grid_sample(values+coords)", {x, coords},
          projected(
              [](Tape& t, const std::vector<NodeId>& ids) {
                return t.grid_sample_bilinear(ids[0], ids[1]);
              },
              proj),
          12);
  }
  {
    Tensor pred = random_tensor({40}, rng, 0.05, 0.95);
    Tensor gt = Tensor::zeros({40});
    for (double& v : gt.data) v = rng.uniform() < 0.4 ? 1.0 : 0.0;
    Tensor w = random_tensor({40}, rng, 1.0, 10.0);
    check("weighted_dice(Eq7)", {pred},
          [gt, w](Tape& t, const std::vector<NodeId>& ids) {
            NodeId g = t.leaf(gt);
            NodeId wn = t.leaf(w);
            return t.weighted_dice(ids[0], g, wn, 1e-6);
          },
          20);
  }
  {
    // Eq 1-2 chain: channel compression -> stride head -> L_dy
    const int c = 3, cm = 4;
    Tensor x = random_tensor({2, c, 5, 5}, rng, -1.0, 1.0);
    Tensor wc = random_tensor({1, c}, rng, -1.0, 1.0);
    Tensor w1 = random_tensor({cm, 1}, rng, -1.0, 1.0);
    Tensor w2 = random_tensor({1, cm}, rng, -1.0, 1.0);
    Tensor proj = random_tensor({2, 1}, rng, -1.0, 1.0);
    check("stride_head(Eq1-2)", {x, wc, w1, w2},
          projected(
              [](Tape& t, const std::vector<NodeId>& ids) {
                NodeId z = dsu::compress_to_scalar(t, ids[0], ids[1]);
                NodeId h = t.relu(t.linear(z, ids[2]));
                NodeId gate = t.tanh(t.linear(h, ids[3]));
                return t.affine(gate, 2.5, 5.0);  // L_base = 5
              },
              proj),
          10);
  }
  {
    // full DSU layer at 1x4x8x8; relaxed rounding makes the stride chain
    // differentiable end-to-end
    dsu::DsuConfig cfg;
    cfg.channels = 4;
    cfg.hidden_width = 4;
    dsu::DsuParams params = dsu::DsuParams::init(cfg, seed + 11);
    Tensor x = random_tensor({1, 4, 8, 8}, rng, -1.0, 1.0);
    Tensor proj = random_tensor({1, 4, 16, 16}, rng, -1.0, 1.0);
    std::vector<Tensor> leaves = {x,         params.w_c,           params.w1, params.w2,
                                  params.offset_kernel, params.agg_x, params.agg_y};
    check("dsu_forward(Eq1-5,relaxed)", leaves,
          projected(
              [cfg](Tape& t, const std::vector<NodeId>& ids) {
                dsu::DsuParamNodes nodes;
                nodes.w_c = ids[1];
                nodes.w1 = ids[2];
                nodes.w2 = ids[3];
                nodes.offset_kernel = ids[4];
                nodes.agg_x = ids[5];
                nodes.agg_y = ids[6];
                dsu::DsuForwardOptions opt;
                opt.mode = dsu::StrideMode::kRelaxed;
                return dsu::dsu_forward(t, ids[0], nodes, cfg, opt);
              },
              proj),
          8);
  }
  return results;
}

}  // namespace tubekit
