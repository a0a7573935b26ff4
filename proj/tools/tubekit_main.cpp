// tubekit: batch CLI for tubular-structure upsampling and loss experiments.
// Subcommands: gen, weights, eval, gradcheck, train-toy, viz.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "tubekit/bswl.hpp"
#include "tubekit/dsu.hpp"
#include "tubekit/gradcheck_battery.hpp"
#include "tubekit/image_io.hpp"
#include "tubekit/metrics.hpp"
#include "tubekit/rng.hpp"
#include "tubekit/synthgen.hpp"
#include "tubekit/tbf.hpp"
#include "tubekit/toy_model.hpp"
#include "tubekit/viz.hpp"

namespace fs = std::filesystem;
using namespace tubekit;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFailure = 1;
constexpr int kExitBadInput = 2;

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

int worker_count(size_t jobs) {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("TUBEKIT_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return static_cast<int>(std::min<size_t>(n, jobs == 0 ? 1 : jobs));
}

// Runs fn(i) for i in [0, jobs) on a capped pool; callers merge by index.
void parallel_for_ordered(size_t jobs, const std::function<void(size_t)>& fn) {
  const int workers = worker_count(jobs);
  if (workers <= 1) {
    for (size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= jobs) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

std::vector<fs::path> list_mask_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".pgm" || ext == ".PNG" || ext == ".PGM") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

// ---------------------------------------------------------------------------
// line-oriented `key = value` run config

struct RunConfig {
  std::string out_dir = "out";
  std::string dataset;  // optional mask directory for weights-style workflows
  std::string upsampler = "both";
  std::string stride = "dynamic";
  std::string loss = "bswl";
  std::string variant = "both";
  std::vector<uint64_t> seeds = {0, 1, 2, 3, 4};
  toy::TrainConfig train;

  std::vector<std::pair<std::string, std::string>> echo() const;
  void set(const std::string& key, const std::string& value);
  void load_file(const fs::path& path);
};

uint64_t parse_u64(const std::string& s) { return std::stoull(s); }

void RunConfig::set(const std::string& key, const std::string& value) {
  auto as_int = [&value]() { return std::stoi(value); };
  auto as_double = [&value]() { return std::stod(value); };
  if (key == "out_dir") out_dir = value;
  else if (key == "dataset") dataset = value;
  else if (key == "upsampler") upsampler = value;
  else if (key == "stride") stride = value;
  else if (key == "loss") loss = value;
  else if (key == "variant") variant = value;
  else if (key == "seeds") {
    seeds.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) seeds.push_back(parse_u64(item));
    if (seeds.empty()) throw ParamError("config: seeds list is empty");
  } else if (key == "image_size") train.image_size = as_int();
  else if (key == "train_images") train.train_images = as_int();
  else if (key == "val_images") train.val_images = as_int();
  else if (key == "tube_count") train.tube_count = as_int();
  else if (key == "width_min") train.width_min = as_int();
  else if (key == "width_max") train.width_max = as_int();
  else if (key == "curvature") train.curvature = as_double();
  else if (key == "branch_prob") train.branch_prob = as_double();
  else if (key == "noise_sigma") train.noise_sigma = as_double();
  else if (key == "steps") train.steps = as_int();
  else if (key == "batch_size") train.batch_size = as_int();
  else if (key == "lr") train.lr = as_double();
  else if (key == "warmup_steps") train.warmup_steps = as_int();
  else if (key == "alpha") train.alpha = as_double();
  else if (key == "epsilon") train.epsilon = as_double();
  else if (key == "c1") train.model.c1 = as_int();
  else if (key == "c2") train.model.c2 = as_int();
  else if (key == "c_m") train.model.hidden_width = as_int();
  else if (key == "l_base") train.model.l_base = as_int();
  else if (key == "s_odd") {
    train.model.s_odd.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) train.model.s_odd.push_back(std::stoi(item));
  } else {
    throw ParamError("config: unknown key '" + key + "'");
  }
}

void RunConfig::load_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParamError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string join_u64(const std::vector<uint64_t>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << v[i];
  }
  return os.str();
}

std::string join_int(const std::vector<int>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << v[i];
  }
  return os.str();
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  return {
      {"out_dir", out_dir},
      {"dataset", dataset},
      {"upsampler", upsampler},
      {"stride", stride},
      {"loss", loss},
      {"variant", variant},
      {"seeds", join_u64(seeds)},
      {"image_size", std::to_string(train.image_size)},
      {"train_images", std::to_string(train.train_images)},
      {"val_images", std::to_string(train.val_images)},
      {"tube_count", std::to_string(train.tube_count)},
      {"width_min", std::to_string(train.width_min)},
      {"width_max", std::to_string(train.width_max)},
      {"curvature", fmt(train.curvature, "%.6g")},
      {"branch_prob", fmt(train.branch_prob, "%.6g")},
      {"noise_sigma", fmt(train.noise_sigma, "%.6g")},
      {"steps", std::to_string(train.steps)},
      {"batch_size", std::to_string(train.batch_size)},
      {"lr", fmt(train.lr, "%.6g")},
      {"warmup_steps", std::to_string(train.warmup_steps)},
      {"alpha", fmt(train.alpha, "%.6g")},
      {"epsilon", fmt(train.epsilon, "%.6g")},
      {"c1", std::to_string(train.model.c1)},
      {"c2", std::to_string(train.model.c2)},
      {"c_m", std::to_string(train.model.hidden_width)},
      {"l_base", std::to_string(train.model.l_base)},
      {"s_odd", join_int(train.model.s_odd)},
  };
}

// ---------------------------------------------------------------------------
// gen

int cmd_gen(const std::string& spec_file, const std::string& out_dir, int count, uint64_t seed) {
  synthgen::TubeSpec spec;
  if (!spec_file.empty()) {
    std::ifstream is(spec_file);
    if (!is) throw IoError("cannot open spec file: " + spec_file);
    std::string line;
    while (std::getline(is, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      std::istringstream ls(line);
      std::string key, eq, value;
      if (!(ls >> key >> eq >> value) || eq != "=") {
        if (key.empty()) continue;
        throw ParamError("spec: expected key = value, got '" + line + "'");
      }
      if (key == "height") spec.height = std::stoi(value);
      else if (key == "width") spec.width = std::stoi(value);
      else if (key == "tube_count") spec.tube_count = std::stoi(value);
      else if (key == "width_min") spec.width_min = std::stoi(value);
      else if (key == "width_max") spec.width_max = std::stoi(value);
      else if (key == "curvature") spec.curvature = std::stod(value);
      else if (key == "branch_prob") spec.branch_prob = std::stod(value);
      else if (key == "noise_sigma") spec.noise_sigma = std::stod(value);
      else if (key == "seed") spec.seed = parse_u64(value);
      else if (key == "count") count = std::stoi(value);
      else throw ParamError("spec: unknown key '" + key + "'");
    }
  }
  if (seed != 0) spec.seed = seed;
  spec.validate();
  if (count < 1) throw ParamError("gen: count must be >= 1");

  const fs::path out(out_dir);
  fs::create_directories(out / "images");
  fs::create_directories(out / "masks");
  std::ofstream manifest(out / "manifest.txt");
  manifest << "count = " << count << "\n"
           << "base_seed = " << spec.seed << "\n"
           << "height = " << spec.height << "\n"
           << "width = " << spec.width << "\n"
           << "tube_count = " << spec.tube_count << "\n"
           << "width_min = " << spec.width_min << "\n"
           << "width_max = " << spec.width_max << "\n"
           << "curvature = " << fmt(spec.curvature, "%.6g") << "\n"
           << "branch_prob = " << fmt(spec.branch_prob, "%.6g") << "\n"
           << "noise_sigma = " << fmt(spec.noise_sigma, "%.6g") << "\n";
  for (int i = 0; i < count; ++i) {
    synthgen::TubeSpec item = spec;
    item.seed = spec.seed * 1000003ull + static_cast<uint64_t>(i);
    const BinaryMask mask = synthgen::generate_mask(item);
    const synthgen::RenderedPair pair = synthgen::render_and_degrade(mask, item);
    char name[32];
    std::snprintf(name, sizeof(name), "tube_%04d.png", i);
    write_mask(out / "masks" / name, mask);
    write_gray_png(out / "images" / name, tensor_to_gray(pair.lowres));
    manifest << name << " seed = " << item.seed << "\n";
  }
  std::cout << "wrote " << count << " mask/image pairs to " << out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// weights

int cmd_weights(const std::string& mask_dir, double alpha, const std::string& out_dir,
                bool invert) {
  const std::vector<fs::path> files = list_mask_files(mask_dir);
  if (files.empty()) throw IoError("no mask files (*.png, *.pgm) in " + mask_dir);
  fs::create_directories(out_dir);

  struct Row {
    std::string text;
    bool failed = false;
  };
  std::vector<Row> rows(files.size());
  parallel_for_ordered(files.size(), [&](size_t i) {
    const fs::path& file = files[i];
    const std::string stem = file.stem().string();
    try {
      const BinaryMask mask = read_mask(file);
      const bswl::WeightMap wm = bswl::weight_map(mask, alpha, invert);
      write_tbf(fs::path(out_dir) / (stem + ".wmap.tbf"),
                Tensor({wm.height, wm.width}, wm.values));
      // linear colormap: weight 1 -> blue, alpha -> red
      RgbImage heat(wm.height, wm.width);
      for (int r = 0; r < wm.height; ++r) {
        for (int c = 0; c < wm.width; ++c) {
          const double t = alpha > 1.0 ? (wm.at(r, c) - 1.0) / (alpha - 1.0) : 0.0;
          heat.set(r, c, static_cast<uint8_t>(std::lround(255.0 * t)), 0,
                   static_cast<uint8_t>(std::lround(255.0 * (1.0 - t))));
        }
      }
      write_rgb_png(fs::path(out_dir) / (stem + ".wmap.png"), heat);
      double lo = wm.values[0], hi = wm.values[0], mean = 0.0;
      for (double v : wm.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        mean += v;
      }
      mean /= static_cast<double>(wm.values.size());
      std::ostringstream os;
      os << stem << ",min=" << fmt(lo) << ",max=" << fmt(hi) << ",mean=" << fmt(mean)
         << ",digest=" << wm.source_digest << (wm.empty_mask ? ",warning=empty-mask" : "");
      rows[i].text = os.str();
    } catch (const std::exception& e) {
      rows[i].text = stem + ",error=" + e.what();
      rows[i].failed = true;
    }
  });

  std::ofstream summary(fs::path(out_dir) / "weights_summary.csv");
  summary << "name,stats\n";
  bool any_failed = false;
  for (const Row& row : rows) {
    std::cout << row.text << "\n";
    summary << row.text << "\n";
    any_failed = any_failed || row.failed;
  }
  return any_failed ? kExitValidationFailure : kExitOk;
}

// ---------------------------------------------------------------------------
// eval

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir, const std::string& out_dir) {
  const std::vector<fs::path> preds = list_mask_files(pred_dir);
  if (preds.empty()) throw IoError("no prediction masks in " + pred_dir);
  fs::create_directories(out_dir);

  struct Row {
    std::string name;
    metrics::MetricReport report;
    bool skipped = false;
    std::string note;
  };
  std::vector<Row> rows(preds.size());
  parallel_for_ordered(preds.size(), [&](size_t i) {
    Row& row = rows[i];
    row.name = preds[i].filename().string();
    const fs::path gt_path = fs::path(gt_dir) / preds[i].filename();
    if (!fs::exists(gt_path)) {
      row.skipped = true;
      row.note = "no ground-truth counterpart";
      return;
    }
    try {
      row.report = metrics::evaluate(read_mask(preds[i]), read_mask(gt_path));
    } catch (const std::exception& e) {
      row.skipped = true;
      row.note = e.what();
    }
  });

  std::ofstream csv(fs::path(out_dir) / "metrics.csv");
  csv << "name,miou,dice,cldice,assd\n";
  double sum_miou = 0, sum_dice = 0, sum_cldice = 0, sum_assd = 0;
  int counted = 0, assd_counted = 0, skipped = 0;
  for (const Row& row : rows) {
    if (row.skipped) {
      ++skipped;
      std::cout << "skip " << row.name << ": " << row.note << "\n";
      continue;
    }
    csv << row.name << "," << fmt(row.report.miou) << "," << fmt(row.report.dice) << ","
        << fmt(row.report.cldice) << ","
        << (row.report.assd_defined ? fmt(row.report.assd) : std::string()) << "\n";
    sum_miou += row.report.miou;
    sum_dice += row.report.dice;
    sum_cldice += row.report.cldice;
    if (row.report.assd_defined) {
      sum_assd += row.report.assd;
      ++assd_counted;
    }
    ++counted;
  }
  ordered_json summary;
  summary["pairs"] = counted;
  summary["skipped"] = skipped;
  summary["mean_miou"] = counted ? sum_miou / counted : 0.0;
  summary["mean_dice"] = counted ? sum_dice / counted : 0.0;
  summary["mean_cldice"] = counted ? sum_cldice / counted : 0.0;
  summary["mean_assd"] = assd_counted ? sum_assd / assd_counted : 0.0;
  summary["assd_pairs"] = assd_counted;
  std::ofstream js(fs::path(out_dir) / "summary.json");
  js << summary.dump(2) << "\n";
  std::cout << "evaluated " << counted << " pairs (" << skipped << " skipped), mean mIoU "
            << fmt(counted ? sum_miou / counted : 0.0) << "\n";
  return counted == 0 ? kExitBadInput : kExitOk;
}

// ---------------------------------------------------------------------------
// gradcheck

int cmd_gradcheck(uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<CheckOutcome> results = run_gradcheck_battery(seed);
  bool all_pass = true;
  for (const CheckOutcome& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  max_rel_err="
              << fmt(r.report.max_rel_err, "%.3e") << "  probes=" << r.report.probes
              << "  skipped=" << r.report.skipped << "\n";
    all_pass = all_pass && r.pass;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << (all_pass ? "gradcheck: all checks passed" : "gradcheck: FAILURES present")
            << " (" << fmt(secs, "%.2f") << " s)\n";
  return all_pass ? kExitOk : kExitValidationFailure;
}

// ---------------------------------------------------------------------------
// train-toy

struct ArmSpec {
  std::string name;           // dsu / bilinear / dsu_fixed3 ...
  toy::Upsampler upsampler;
  dsu::StrideMode mode;
  int fixed_stride;
};

int cmd_train_toy(RunConfig config, const std::string& out_override) {
  if (!out_override.empty()) config.out_dir = out_override;
  const fs::path out(config.out_dir);
  fs::create_directories(out);
  {
    std::ofstream echo(out / "config_effective.txt");
    for (const auto& [k, v] : config.echo()) echo << k << " = " << v << "\n";
  }

  std::vector<ArmSpec> arms;
  const bool fixed = config.stride != "dynamic";
  const int fixed_stride = fixed ? std::stoi(config.stride) : 0;
  const dsu::StrideMode mode = fixed ? dsu::StrideMode::kFixed : dsu::StrideMode::kSte;
  const std::string stride_tag = fixed ? "_s" + config.stride : "";
  if (config.upsampler == "dsu" || config.upsampler == "both") {
    arms.push_back({"dsu" + stride_tag, toy::Upsampler::kDsu, mode, fixed_stride});
  }
  if (config.upsampler == "bilinear" || config.upsampler == "both") {
    arms.push_back({"bilinear", toy::Upsampler::kBilinear, dsu::StrideMode::kSte, 0});
  }
  if (arms.empty()) throw ParamError("train-toy: upsampler must be dsu, bilinear or both");

  config.train.loss = toy::loss_from_string(config.loss);
  config.train.model.variant = dsu::variant_from_string(config.variant);
  config.train.dump_dir = (out / "diagnostics").string();

  std::ofstream results_csv(out / "results.csv");
  results_csv << "arm,seed,loss,alpha,final_train_loss,val_loss,miou,dice,cldice,assd\n";
  std::map<std::string, std::vector<double>> arm_val_losses;

  for (const ArmSpec& arm : arms) {
    for (uint64_t seed : config.seeds) {
      toy::TrainConfig tc = config.train;
      tc.seed = seed;
      tc.model.upsampler = arm.upsampler;
      tc.model.stride_mode = arm.mode;
      tc.model.fixed_stride = arm.fixed_stride;

      const std::string run_name = arm.name + "_seed" + std::to_string(seed);
      std::ofstream log(out / ("train_log_" + run_name + ".csv"));
      log << "step,lr,loss\n";
      toy::TrainResult result = toy::train_toy(tc, [&log](int step, double lr, double loss) {
        log << step << "," << fmt(lr, "%.9g") << "," << fmt(loss, "%.9g") << "\n";
      });
      toy::save_checkpoint(out / ("ckpt_" + run_name), result.params);

      results_csv << arm.name << "," << seed << "," << config.loss << ","
                  << fmt(config.train.alpha, "%.6g") << "," << fmt(result.final_loss, "%.9g")
                  << "," << fmt(result.final_val_loss, "%.9g") << ","
                  << fmt(result.val_metrics.miou) << "," << fmt(result.val_metrics.dice) << ","
                  << fmt(result.val_metrics.cldice) << ","
                  << (result.val_metrics.assd_defined ? fmt(result.val_metrics.assd)
                                                      : std::string())
                  << "\n";
      arm_val_losses[arm.name].push_back(result.final_val_loss);
      std::cout << run_name << ": train " << fmt(result.initial_loss, "%.4f") << " -> "
                << fmt(result.final_loss, "%.4f") << ", val loss "
                << fmt(result.final_val_loss, "%.4f") << ", clDice "
                << fmt(result.val_metrics.cldice) << "\n";
    }
  }

  // comparison table over arms (Table-1-style summary at toy scale)
  std::ofstream cmp(out / "comparison.csv");
  cmp << "arm,median_val_loss,mean_val_loss\n";
  for (const ArmSpec& arm : arms) {
    std::vector<double> losses = arm_val_losses[arm.name];
    std::sort(losses.begin(), losses.end());
    const double median = losses[losses.size() / 2];
    double mean = 0;
    for (double v : losses) mean += v;
    mean /= static_cast<double>(losses.size());
    cmp << arm.name << "," << fmt(median, "%.9g") << "," << fmt(mean, "%.9g") << "\n";
  }
  std::cout << "train-toy complete; outputs in " << config.out_dir << "\n";
  return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{"tubekit: dynamic snake upsampling + boundary-skeleton weighted loss toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic tube dataset");
  std::string gen_spec, gen_out = "dataset";
  int gen_count = 16;
  uint64_t gen_seed = 0;
  gen->add_option("--spec", gen_spec, "spec file (key = value)");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--count", gen_count, "number of images");
  gen->add_option("--seed", gen_seed, "base seed (overrides spec)");

  // weights
  auto* weights = app.add_subcommand("weights", "precompute boundary-skeleton weight maps");
  std::string w_masks, w_out = "weights";
  double w_alpha = 10.0;
  bool w_invert = false;
  weights->add_option("--masks", w_masks, "directory of mask images")->required();
  weights->add_option("--alpha", w_alpha, "upper bound of the boundary weight");
  weights->add_option("--out", w_out, "output directory")->required();
  weights->add_flag("--invert-weights", w_invert, "swap the boundary/skeleton anchors");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate predictions against ground truth");
  std::string e_pred, e_gt, e_out = "eval";
  eval->add_option("--pred", e_pred, "directory of predicted masks")->required();
  eval->add_option("--gt", e_gt, "directory of ground-truth masks")->required();
  eval->add_option("--out", e_out, "output directory")->required();

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "run the gradient-check battery");
  uint64_t gc_seed = 0;
  gc->add_option("--seed", gc_seed, "probe seed");

  // train-toy
  auto* train = app.add_subcommand("train-toy", "toy DSU vs bilinear training experiment");
  std::string t_config, t_out, t_upsampler, t_stride, t_loss, t_seeds;
  double t_alpha = -1.0;
  int t_steps = -1;
  double t_lr = -1.0;
  train->add_option("--config", t_config, "run config file (key = value)");
  train->add_option("--out", t_out, "output directory (overrides config)");
  train->add_option("--upsampler", t_upsampler, "dsu | bilinear | both");
  train->add_option("--stride", t_stride, "dynamic | 3 | 5 | 7 | 9");
  train->add_option("--loss", t_loss, "bswl | uniform");
  train->add_option("--seeds", t_seeds, "comma-separated seed list");
  train->add_option("--alpha", t_alpha, "BSWL alpha");
  train->add_option("--steps", t_steps, "training steps");
  train->add_option("--lr", t_lr, "base learning rate");

  // viz
  auto* vz = app.add_subcommand("viz", "visualize DSU sampling points and attention");
  std::string v_ckpt, v_image, v_at, v_out = "viz", v_layer = "dsu2";
  vz->add_option("--ckpt", v_ckpt, "checkpoint directory")->required();
  vz->add_option("--image", v_image, "grayscale input image")->required();
  vz->add_option("--at", v_at, "pixel coordinate X,Y")->required();
  vz->add_option("--out", v_out, "output directory")->required();
  vz->add_option("--layer", v_layer, "dsu1 | dsu2 (toy checkpoints)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_spec, gen_out, gen_count, gen_seed);
    if (weights->parsed()) return cmd_weights(w_masks, w_alpha, w_out, w_invert);
    if (eval->parsed()) return cmd_eval(e_pred, e_gt, e_out);
    if (gc->parsed()) return cmd_gradcheck(gc_seed);
    if (train->parsed()) {
      RunConfig config;
      if (!t_config.empty()) config.load_file(t_config);
      if (!t_upsampler.empty()) config.set("upsampler", t_upsampler);
      if (!t_stride.empty()) config.set("stride", t_stride);
      if (!t_loss.empty()) config.set("loss", t_loss);
      if (!t_seeds.empty()) config.set("seeds", t_seeds);
      if (t_alpha >= 0.0) config.set("alpha", fmt(t_alpha, "%.17g"));
      if (t_steps >= 0) config.set("steps", std::to_string(t_steps));
      if (t_lr >= 0.0) config.set("lr", fmt(t_lr, "%.17g"));
      return cmd_train_toy(config, t_out);
    }
    if (vz->parsed()) {
      viz::VizRequest req;
      req.checkpoint = v_ckpt;
      req.image = v_image;
      const auto comma = v_at.find(',');
      if (comma == std::string::npos) throw ParamError("--at expects X,Y");
      req.at_x = std::stoi(v_at.substr(0, comma));
      req.at_y = std::stoi(v_at.substr(comma + 1));
      req.out_dir = v_out;
      req.layer = v_layer;
      viz::run_viz(req);
      std::cout << "viz outputs in " << v_out << "\n";
      return kExitOk;
    }
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitBadInput;
}
