#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tubekit/bswl.hpp"
#include "tubekit/dsu.hpp"
#include "tubekit/metrics.hpp"
#include "tubekit/synthgen.hpp"
#include "tubekit/tape.hpp"

namespace tubekit::toy {

enum class Upsampler { kDsu, kBilinear };
enum class LossKind { kBswl, kUniform };

Upsampler upsampler_from_string(const std::string& s);
LossKind loss_from_string(const std::string& s);

// Decoder built from one stride-2 conv encoder, two x2 upsampling stages and
// a 1x1 sigmoid head; the upsampler (DSU vs bilinear) is the only moving part.
struct ModelConfig {
  int in_channels = 1;
  int c1 = 8;  // channels after the encoder / through dec1
  int c2 = 8;  // channels through dec2 and the head
  Upsampler upsampler = Upsampler::kDsu;
  dsu::StrideMode stride_mode = dsu::StrideMode::kSte;
  int fixed_stride = 0;  // when stride_mode == kFixed
  int hidden_width = 8;  // stride head C_m
  int l_base = 5;
  std::vector<int> s_odd = {3, 5, 7, 9};
  dsu::Variant variant = dsu::Variant::kBoth;

  dsu::DsuConfig dsu1_config() const;  // channels = c1
  dsu::DsuConfig dsu2_config() const;  // channels = c2
};

struct ModelParams {
  ModelConfig config;
  Tensor enc_k, enc_b;    // C1 x in x 3 x 3, C1
  Tensor dec1_k, dec1_b;  // C2 x C1 x 3 x 3, C2
  Tensor dec2_k, dec2_b;  // C2 x C2 x 3 x 3, C2
  Tensor head_k, head_b;  // 1 x C2 x 1 x 1, 1
  dsu::DsuParams dsu1, dsu2;  // unused when upsampler == kBilinear

  static ModelParams init(const ModelConfig& config, uint64_t seed);
  std::vector<Tensor*> trainable();
  std::vector<std::string> trainable_names() const;
};

struct ForwardTrace {
  dsu::DsuTrace dsu1, dsu2;
};

// Input N x in x h x w -> probabilities N x 1 x 4h x 4w. When param_nodes is
// given it receives the parameter leaf ids in ModelParams::trainable() order.
NodeId model_forward(Tape& tape, NodeId input, const ModelParams& params,
                     ForwardTrace* trace = nullptr, std::vector<NodeId>* param_nodes = nullptr);

// x2 bilinear upsampling of every channel (align-corners-false geometry,
// matching the DSU subpixel centers).
NodeId bilinear_upsample2x(Tape& tape, NodeId x);

// Adam with bias correction; one slot pair per parameter tensor.
class Adam {
 public:
  explicit Adam(std::vector<Tensor*> params, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);
  void step(const std::vector<Tensor>& grads, double lr);

 private:
  std::vector<Tensor*> params_;
  std::vector<Tensor> m_, v_;
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
};

struct TrainConfig {
  int image_size = 32;  // target resolution (even); model input is half this
  int train_images = 24;
  int val_images = 8;
  int tube_count = 2;
  int width_min = 2;
  int width_max = 4;
  double curvature = 5.0;
  double branch_prob = 0.3;
  double noise_sigma = 0.25;
  int steps = 240;
  int batch_size = 4;  // paper setting
  double lr = 0.01;
  double lr_floor = 1e-6;
  double poly_power = 0.9;
  int warmup_steps = -1;  // -1: min(100, steps / 10)
  LossKind loss = LossKind::kBswl;
  double alpha = 10.0;
  double epsilon = 1e-6;
  uint64_t seed = 0;
  std::string dump_dir;  // where to dump the offending batch on non-finite loss
  ModelConfig model;
};

// Polynomial decay with warm-up: linear ramp over the warm-up steps, then
// base * (1 - progress)^power clamped to the floor; the final step lands
// exactly on the floor.
double learning_rate(const TrainConfig& config, int step);
int effective_warmup(const TrainConfig& config);

struct TrainResult {
  std::vector<double> step_losses;
  double initial_loss = 0.0;     // mean of the first 5 step losses
  double final_loss = 0.0;       // mean of the last 5 step losses
  double final_val_loss = 0.0;   // weighted-Dice on the validation set
  metrics::MetricReport val_metrics;  // means over validation images
  int val_assd_skipped = 0;
  ModelParams params;
};

using StepLogger = std::function<void(int step, double lr, double loss)>;

TrainResult train_toy(const TrainConfig& config, const StepLogger& logger = nullptr);

// Checkpoint directory: manifest.txt (key = value) plus one TBF1 tensor per
// parameter.
void save_checkpoint(const std::filesystem::path& dir, const ModelParams& params);
ModelParams load_checkpoint(const std::filesystem::path& dir);
void save_dsu_checkpoint(const std::filesystem::path& dir, const dsu::DsuParams& params);
dsu::DsuParams load_dsu_checkpoint(const std::filesystem::path& dir);
bool checkpoint_is_toy_model(const std::filesystem::path& dir);

}  // namespace tubekit::toy
