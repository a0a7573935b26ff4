#include "tubekit/toy_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "tubekit/rng.hpp"
#include "tubekit/tbf.hpp"

namespace tubekit::toy {

namespace fs = std::filesystem;

Upsampler upsampler_from_string(const std::string& s) {
  if (s == "dsu") return Upsampler::kDsu;
  if (s == "bilinear") return Upsampler::kBilinear;
  throw ParamError("unknown upsampler '" + s + "' (expected dsu or bilinear)");
}

LossKind loss_from_string(const std::string& s) {
  if (s == "bswl") return LossKind::kBswl;
  if (s == "uniform") return LossKind::kUniform;
  throw ParamError("unknown loss '" + s + "' (expected bswl or uniform)");
}

dsu::DsuConfig ModelConfig::dsu1_config() const {
  dsu::DsuConfig c;
  c.channels = c1;
  c.hidden_width = hidden_width;
  c.l_base = l_base;
  c.s_odd = s_odd;
  c.variant = variant;
  return c;
}

dsu::DsuConfig ModelConfig::dsu2_config() const {
  dsu::DsuConfig c = dsu1_config();
  c.channels = c2;
  return c;
}

namespace {

Tensor conv_init(Rng& rng, int64_t out_c, int64_t in_c, int64_t k) {
  Tensor t = Tensor::zeros({out_c, in_c, k, k});
  const double scale = std::sqrt(2.0 / static_cast<double>(in_c * k * k));
  for (double& v : t.data) v = rng.gaussian(0.0, scale);
  return t;
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& config, uint64_t seed) {
  Rng rng(seed ^ 0x70CAB1Eull);
  ModelParams p;
  p.config = config;
  p.enc_k = conv_init(rng, config.c1, config.in_channels, 3);
  p.enc_b = Tensor::zeros({config.c1});
  p.dec1_k = conv_init(rng, config.c2, config.c1, 3);
  p.dec1_b = Tensor::zeros({config.c2});
  p.dec2_k = conv_init(rng, config.c2, config.c2, 3);
  p.dec2_b = Tensor::zeros({config.c2});
  p.head_k = conv_init(rng, 1, config.c2, 1);
  p.head_b = Tensor::zeros({1});
  if (config.upsampler == Upsampler::kDsu) {
    p.dsu1 = dsu::DsuParams::init(config.dsu1_config(), seed * 31 + 7);
    p.dsu2 = dsu::DsuParams::init(config.dsu2_config(), seed * 31 + 8);
  }
  return p;
}

std::vector<Tensor*> ModelParams::trainable() {
  std::vector<Tensor*> out = {&enc_k, &enc_b, &dec1_k, &dec1_b, &dec2_k, &dec2_b, &head_k, &head_b};
  if (config.upsampler == Upsampler::kDsu) {
    for (Tensor* t : dsu1.trainable()) out.push_back(t);
    for (Tensor* t : dsu2.trainable()) out.push_back(t);
  }
  return out;
}

std::vector<std::string> ModelParams::trainable_names() const {
  std::vector<std::string> out = {"enc.k",  "enc.b",  "dec1.conv.k", "dec1.conv.b",
                                  "dec2.conv.k", "dec2.conv.b", "head.k", "head.b"};
  if (config.upsampler == Upsampler::kDsu) {
    for (const std::string& n : dsu1.trainable_names()) out.push_back("dsu1." + n);
    for (const std::string& n : dsu2.trainable_names()) out.push_back("dsu2." + n);
  }
  return out;
}

NodeId bilinear_upsample2x(Tape& tape, NodeId x) {
  const Tensor& xv = tape.value(x);
  require_rank(xv, 4, "bilinear_upsample2x input");
  const int64_t n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
  Tensor coords = Tensor::zeros({n, 4 * h * w, 2});
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t oy = 0; oy < 2 * h; ++oy) {
      for (int64_t ox = 0; ox < 2 * w; ++ox) {
        const int64_t p = oy * 2 * w + ox;
        coords.data[static_cast<size_t>((b * 4 * h * w + p) * 2 + 0)] =
            0.5 * static_cast<double>(ox) - 0.25;
        coords.data[static_cast<size_t>((b * 4 * h * w + p) * 2 + 1)] =
            0.5 * static_cast<double>(oy) - 0.25;
      }
    }
  }
  NodeId grid = tape.leaf(std::move(coords));
  NodeId sampled = tape.grid_sample_bilinear(x, grid);
  return tape.reshape(sampled, {n, c, 2 * h, 2 * w});
}

namespace {

struct LayerNodes {
  dsu::DsuParamNodes dsu1, dsu2;
  NodeId enc_k, enc_b, dec1_k, dec1_b, dec2_k, dec2_b, head_k, head_b;
};

LayerNodes push_model(Tape& tape, const ModelParams& p, std::vector<NodeId>* param_nodes) {
  LayerNodes n;
  n.enc_k = tape.leaf(p.enc_k);
  n.enc_b = tape.leaf(p.enc_b);
  n.dec1_k = tape.leaf(p.dec1_k);
  n.dec1_b = tape.leaf(p.dec1_b);
  n.dec2_k = tape.leaf(p.dec2_k);
  n.dec2_b = tape.leaf(p.dec2_b);
  n.head_k = tape.leaf(p.head_k);
  n.head_b = tape.leaf(p.head_b);
  if (p.config.upsampler == Upsampler::kDsu) {
    n.dsu1 = dsu::push_params(tape, p.dsu1);
    n.dsu2 = dsu::push_params(tape, p.dsu2);
  }
  if (param_nodes) {
    *param_nodes = {n.enc_k, n.enc_b, n.dec1_k, n.dec1_b, n.dec2_k, n.dec2_b, n.head_k, n.head_b};
    if (p.config.upsampler == Upsampler::kDsu) {
      for (const dsu::DsuParamNodes* d : {&n.dsu1, &n.dsu2}) {
        param_nodes->push_back(d->w_c);
        param_nodes->push_back(d->w1);
        param_nodes->push_back(d->w2);
        param_nodes->push_back(d->offset_kernel);
        if (d->agg_x >= 0) param_nodes->push_back(d->agg_x);
        if (d->agg_y >= 0) param_nodes->push_back(d->agg_y);
      }
    }
  }
  return n;
}

NodeId upsample_stage(Tape& tape, NodeId x, const ModelParams& p, const dsu::DsuParamNodes& nodes,
                      const dsu::DsuConfig& config, dsu::DsuTrace* trace) {
  if (p.config.upsampler == Upsampler::kBilinear) return bilinear_upsample2x(tape, x);
  dsu::DsuForwardOptions opt;
  opt.mode = p.config.stride_mode;
  opt.fixed_stride = p.config.fixed_stride;
  return dsu::dsu_forward(tape, x, nodes, config, opt, trace);
}

}  // namespace

NodeId model_forward(Tape& tape, NodeId input, const ModelParams& params, ForwardTrace* trace,
                     std::vector<NodeId>* param_nodes) {
  const ModelConfig& cfg = params.config;
  LayerNodes n = push_model(tape, params, param_nodes);
  NodeId h1 = tape.relu(tape.bias_add_channel(tape.conv2d(input, n.enc_k, 2, 1), n.enc_b));
  NodeId u1 = upsample_stage(tape, h1, params, n.dsu1, cfg.dsu1_config(),
                             trace ? &trace->dsu1 : nullptr);
  NodeId h2 = tape.relu(tape.bias_add_channel(tape.conv2d(u1, n.dec1_k, 1, 1), n.dec1_b));
  NodeId u2 = upsample_stage(tape, h2, params, n.dsu2, cfg.dsu2_config(),
                             trace ? &trace->dsu2 : nullptr);
  NodeId h3 = tape.relu(tape.bias_add_channel(tape.conv2d(u2, n.dec2_k, 1, 1), n.dec2_b));
  return tape.sigmoid(tape.bias_add_channel(tape.conv2d(h3, n.head_k, 1, 0), n.head_b));
}

Adam::Adam(std::vector<Tensor*> params, double beta1, double beta2, double eps)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (Tensor* p : params_) {
    m_.push_back(Tensor::zeros(p->shape));
    v_.push_back(Tensor::zeros(p->shape));
  }
}

void Adam::step(const std::vector<Tensor>& grads, double lr) {
  if (grads.size() != params_.size()) throw ShapeError("Adam: gradient count mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = *params_[i];
    require_same_shape(p, grads[i], "Adam grads[" + std::to_string(i) + "]");
    for (size_t j = 0; j < p.data.size(); ++j) {
      const double g = grads[i].data[j];
      m_[i].data[j] = beta1_ * m_[i].data[j] + (1.0 - beta1_) * g;
      v_[i].data[j] = beta2_ * v_[i].data[j] + (1.0 - beta2_) * g * g;
      const double mh = m_[i].data[j] / bc1;
      const double vh = v_[i].data[j] / bc2;
      p.data[j] -= lr * mh / (std::sqrt(vh) + eps_);
    }
  }
}

int effective_warmup(const TrainConfig& config) {
  if (config.warmup_steps >= 0) return config.warmup_steps;
  return std::min(100, config.steps / 10);
}

double learning_rate(const TrainConfig& config, int step) {
  const int warm = effective_warmup(config);
  if (step < warm) {
    return config.lr * static_cast<double>(step + 1) / static_cast<double>(warm);
  }
  const int last = config.steps - 1;
  if (last <= warm) return std::max(config.lr_floor, config.lr);
  const double progress = static_cast<double>(step - warm) / static_cast<double>(last - warm);
  const double decayed = config.lr * std::pow(1.0 - progress, config.poly_power);
  return std::max(config.lr_floor, decayed);
}

namespace {

struct Sample {
  BinaryMask mask;
  Tensor input;    // 1 x 1 x s x s
  Tensor target;   // 1 x 1 x S x S binary floats
  Tensor weights;  // 1 x 1 x S x S
};

Sample make_sample(const TrainConfig& config, uint64_t image_seed) {
  synthgen::TubeSpec spec;
  spec.height = config.image_size;
  spec.width = config.image_size;
  spec.tube_count = config.tube_count;
  spec.width_min = config.width_min;
  spec.width_max = config.width_max;
  spec.curvature = config.curvature;
  spec.branch_prob = config.branch_prob;
  spec.noise_sigma = config.noise_sigma;
  spec.seed = image_seed;
  Sample s;
  s.mask = synthgen::generate_mask(spec);
  synthgen::RenderedPair pair = synthgen::render_and_degrade(s.mask, spec);
  s.input = std::move(pair.lowres);
  s.target = Tensor::zeros({1, 1, config.image_size, config.image_size});
  for (size_t i = 0; i < s.mask.pixels.size(); ++i) {
    s.target.data[i] = s.mask.pixels[i] ? 1.0 : 0.0;
  }
  if (config.loss == LossKind::kBswl) {
    s.weights = bswl::weight_map(s.mask, config.alpha).as_tensor();
  } else {
    s.weights = Tensor::full({1, 1, config.image_size, config.image_size}, 1.0);
  }
  return s;
}

Tensor stack_batch(const std::vector<const Tensor*>& parts) {
  const Tensor& first = *parts.front();
  std::vector<int64_t> shape = first.shape;
  shape[0] = static_cast<int64_t>(parts.size());
  Tensor out = Tensor::zeros(shape);
  const size_t per = first.data.size();
  for (size_t i = 0; i < parts.size(); ++i) {
    std::copy(parts[i]->data.begin(), parts[i]->data.end(), out.data.begin() + i * per);
  }
  return out;
}

}  // namespace

TrainResult train_toy(const TrainConfig& config, const StepLogger& logger) {
  if (config.image_size % 4 != 0 || config.image_size < 8) {
    throw ParamError("train_toy: image_size must be a multiple of 4 and >= 8");
  }
  if (config.steps < 1) throw ParamError("train_toy: steps must be >= 1");
  if (config.batch_size < 1) throw ParamError("train_toy: batch_size must be >= 1");

  std::vector<Sample> train_set, val_set;
  for (int i = 0; i < config.train_images; ++i) {
    train_set.push_back(make_sample(config, config.seed * 1000003ull + static_cast<uint64_t>(i)));
  }
  for (int i = 0; i < config.val_images; ++i) {
    val_set.push_back(make_sample(config, config.seed * 1000003ull +
                                              static_cast<uint64_t>(config.train_images + i)));
  }

  TrainResult result;
  result.params = ModelParams::init(config.model, config.seed);
  std::vector<Tensor*> trainable = result.params.trainable();
  Adam optimizer(trainable);
  Rng shuffle_rng(config.seed ^ 0xBA7C4ull);
  std::vector<size_t> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  size_t cursor = order.size();  // trigger shuffle on first use

  const bswl::LossConfig loss_cfg{config.epsilon};
  for (int step = 0; step < config.steps; ++step) {
    std::vector<const Tensor*> in_parts, tg_parts, w_parts;
    for (int k = 0; k < config.batch_size; ++k) {
      if (cursor >= order.size()) {
        for (size_t i = order.size(); i > 1; --i) {
          std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        }
        cursor = 0;
      }
      const Sample& s = train_set[order[cursor++]];
      in_parts.push_back(&s.input);
      tg_parts.push_back(&s.target);
      w_parts.push_back(&s.weights);
    }
    Tensor batch_in = stack_batch(in_parts);
    Tensor batch_tg = stack_batch(tg_parts);
    Tensor batch_w = stack_batch(w_parts);

    Tape tape;
    NodeId input = tape.leaf(batch_in);
    std::vector<NodeId> param_nodes;
    NodeId pred = model_forward(tape, input, result.params, nullptr, &param_nodes);
    NodeId loss = bswl::weighted_dice_loss(tape, pred, batch_tg, batch_w, loss_cfg);
    const double loss_value = tape.value(loss).data[0];
    if (!std::isfinite(loss_value)) {
      if (!config.dump_dir.empty()) {
        fs::create_directories(config.dump_dir);
        write_tbf(fs::path(config.dump_dir) / "offending_input.tbf", batch_in);
        write_tbf(fs::path(config.dump_dir) / "offending_target.tbf", batch_tg);
      }
      throw NumericError("train_toy: non-finite loss at step " + std::to_string(step) +
                         (config.dump_dir.empty() ? "" : "; batch dumped to " + config.dump_dir));
    }
    tape.backward(loss);

    std::vector<Tensor> grads;
    grads.reserve(param_nodes.size());
    for (NodeId id : param_nodes) grads.push_back(tape.grad(id));
    const double lr = learning_rate(config, step);
    optimizer.step(grads, lr);
    result.step_losses.push_back(loss_value);
    if (logger) logger(step, lr, loss_value);
  }

  const size_t window = std::min<size_t>(5, result.step_losses.size());
  double head = 0.0, tail = 0.0;
  for (size_t i = 0; i < window; ++i) {
    head += result.step_losses[i];
    tail += result.step_losses[result.step_losses.size() - 1 - i];
  }
  result.initial_loss = head / static_cast<double>(window);
  result.final_loss = tail / static_cast<double>(window);

  // Validation: per-image loss and thresholded metrics.
  double val_loss = 0.0;
  metrics::MetricReport mean;
  int assd_count = 0;
  for (const Sample& s : val_set) {
    Tape tape;
    NodeId input = tape.leaf(s.input);
    NodeId pred = model_forward(tape, input, result.params);
    NodeId loss = bswl::weighted_dice_loss(tape, pred, s.target, s.weights, loss_cfg);
    val_loss += tape.value(loss).data[0];
    const Tensor& pv = tape.value(pred);
    BinaryMask pred_mask(config.image_size, config.image_size);
    for (size_t i = 0; i < pred_mask.pixels.size(); ++i) {
      pred_mask.pixels[i] = pv.data[i] >= 0.5 ? 1 : 0;
    }
    metrics::MetricReport r = metrics::evaluate(pred_mask, s.mask);
    mean.miou += r.miou;
    mean.dice += r.dice;
    mean.cldice += r.cldice;
    if (r.assd_defined) {
      mean.assd += r.assd;
      ++assd_count;
    } else {
      ++result.val_assd_skipped;
    }
  }
  const double nv = static_cast<double>(val_set.size());
  result.final_val_loss = val_loss / nv;
  mean.miou /= nv;
  mean.dice /= nv;
  mean.cldice /= nv;
  mean.assd = assd_count > 0 ? mean.assd / static_cast<double>(assd_count) : 0.0;
  mean.assd_defined = assd_count > 0;
  result.val_metrics = mean;
  return result;
}

// ---------------------------------------------------------------------------
// checkpoints

namespace {

void write_manifest(const fs::path& dir,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream os(dir / "manifest.txt");
  if (!os) throw IoError("cannot write manifest in " + dir.string());
  for (const auto& [k, v] : entries) os << k << " = " << v << "\n";
}

std::map<std::string, std::string> read_manifest(const fs::path& dir) {
  std::ifstream is(dir / "manifest.txt");
  if (!is) throw IoError("missing manifest.txt in " + dir.string());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(is, line)) {
    const size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << v[i];
  }
  return os.str();
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

const std::string& manifest_get(const std::map<std::string, std::string>& m,
                                const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw IoError("manifest missing key '" + key + "'");
  return it->second;
}

void save_dsu_tensors(const fs::path& dir, const std::string& prefix,
                      const dsu::DsuParams& params) {
  const auto tensors = params.trainable();
  const auto names = params.trainable_names();
  for (size_t i = 0; i < tensors.size(); ++i) {
    write_tbf(dir / (prefix + names[i] + ".tbf"), *tensors[i]);
  }
}

void load_dsu_tensors(const fs::path& dir, const std::string& prefix, dsu::DsuParams& params) {
  auto tensors = params.trainable();
  const auto names = params.trainable_names();
  for (size_t i = 0; i < tensors.size(); ++i) {
    Tensor t = read_tbf(dir / (prefix + names[i] + ".tbf"));
    require_same_shape(*tensors[i], t, "checkpoint tensor " + prefix + names[i]);
    *tensors[i] = std::move(t);
  }
}

}  // namespace

void save_checkpoint(const fs::path& dir, const ModelParams& params) {
  fs::create_directories(dir);
  const ModelConfig& c = params.config;
  std::vector<std::pair<std::string, std::string>> entries = {
      {"model", "toy"},
      {"upsampler", c.upsampler == Upsampler::kDsu ? "dsu" : "bilinear"},
      {"in_channels", std::to_string(c.in_channels)},
      {"c1", std::to_string(c.c1)},
      {"c2", std::to_string(c.c2)},
      {"C_m", std::to_string(c.hidden_width)},
      {"L_base", std::to_string(c.l_base)},
      {"S_odd", join_ints(c.s_odd)},
      {"variant", dsu::variant_to_string(c.variant)},
      {"stride_mode", c.stride_mode == dsu::StrideMode::kFixed ? "fixed" : "dynamic"},
      {"fixed_stride", std::to_string(c.fixed_stride)},
  };
  write_manifest(dir, entries);
  write_tbf(dir / "enc.k.tbf", params.enc_k);
  write_tbf(dir / "enc.b.tbf", params.enc_b);
  write_tbf(dir / "dec1.conv.k.tbf", params.dec1_k);
  write_tbf(dir / "dec1.conv.b.tbf", params.dec1_b);
  write_tbf(dir / "dec2.conv.k.tbf", params.dec2_k);
  write_tbf(dir / "dec2.conv.b.tbf", params.dec2_b);
  write_tbf(dir / "head.k.tbf", params.head_k);
  write_tbf(dir / "head.b.tbf", params.head_b);
  if (c.upsampler == Upsampler::kDsu) {
    save_dsu_tensors(dir, "dsu1.", params.dsu1);
    save_dsu_tensors(dir, "dsu2.", params.dsu2);
  }
}

ModelParams load_checkpoint(const fs::path& dir) {
  const auto m = read_manifest(dir);
  if (manifest_get(m, "model") != "toy") {
    throw IoError("checkpoint in " + dir.string() + " is not a toy-model checkpoint");
  }
  ModelConfig c;
  c.upsampler = upsampler_from_string(manifest_get(m, "upsampler"));
  c.in_channels = std::stoi(manifest_get(m, "in_channels"));
  c.c1 = std::stoi(manifest_get(m, "c1"));
  c.c2 = std::stoi(manifest_get(m, "c2"));
  c.hidden_width = std::stoi(manifest_get(m, "C_m"));
  c.l_base = std::stoi(manifest_get(m, "L_base"));
  c.s_odd = split_ints(manifest_get(m, "S_odd"));
  c.variant = dsu::variant_from_string(manifest_get(m, "variant"));
  c.stride_mode = manifest_get(m, "stride_mode") == "fixed" ? dsu::StrideMode::kFixed
                                                            : dsu::StrideMode::kSte;
  c.fixed_stride = std::stoi(manifest_get(m, "fixed_stride"));
  ModelParams p = ModelParams::init(c, 0);
  auto load = [&dir](const char* name, Tensor& into) {
    Tensor t = read_tbf(dir / name);
    require_same_shape(into, t, std::string("checkpoint tensor ") + name);
    into = std::move(t);
  };
  load("enc.k.tbf", p.enc_k);
  load("enc.b.tbf", p.enc_b);
  load("dec1.conv.k.tbf", p.dec1_k);
  load("dec1.conv.b.tbf", p.dec1_b);
  load("dec2.conv.k.tbf", p.dec2_k);
  load("dec2.conv.b.tbf", p.dec2_b);
  load("head.k.tbf", p.head_k);
  load("head.b.tbf", p.head_b);
  if (c.upsampler == Upsampler::kDsu) {
    load_dsu_tensors(dir, "dsu1.", p.dsu1);
    load_dsu_tensors(dir, "dsu2.", p.dsu2);
  }
  return p;
}

void save_dsu_checkpoint(const fs::path& dir, const dsu::DsuParams& params) {
  fs::create_directories(dir);
  const dsu::DsuConfig& c = params.config;
  write_manifest(dir, {
                          {"model", "dsu"},
                          {"C", std::to_string(c.channels)},
                          {"C_m", std::to_string(c.hidden_width)},
                          {"L_base", std::to_string(c.l_base)},
                          {"S_odd", join_ints(c.s_odd)},
                          {"variant", dsu::variant_to_string(c.variant)},
                      });
  save_dsu_tensors(dir, "dsu.", params);
}

dsu::DsuParams load_dsu_checkpoint(const fs::path& dir) {
  const auto m = read_manifest(dir);
  if (manifest_get(m, "model") != "dsu") {
    throw IoError("checkpoint in " + dir.string() + " is not a DSU-layer checkpoint");
  }
  dsu::DsuConfig c;
  c.channels = std::stoi(manifest_get(m, "C"));
  c.hidden_width = std::stoi(manifest_get(m, "C_m"));
  c.l_base = std::stoi(manifest_get(m, "L_base"));
  c.s_odd = split_ints(manifest_get(m, "S_odd"));
  c.variant = dsu::variant_from_string(manifest_get(m, "variant"));
  dsu::DsuParams p = dsu::DsuParams::init(c, 0);
  load_dsu_tensors(dir, "dsu.", p);
  return p;
}

bool checkpoint_is_toy_model(const fs::path& dir) {
  const auto m = read_manifest(dir);
  return manifest_get(m, "model") == "toy";
}

}  // namespace tubekit::toy
