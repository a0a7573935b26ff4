#include "tubekit/viz.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "tubekit/snake_geometry.hpp"

namespace tubekit::viz {

namespace fs = std::filesystem;

void heat_color(double t, uint8_t& r, uint8_t& g, uint8_t& b) {
  t = std::clamp(t, 0.0, 1.0);
  // blue -> cyan -> yellow -> red
  if (t < 1.0 / 3.0) {
    const double u = t * 3.0;
    r = 0;
    g = static_cast<uint8_t>(std::lround(255.0 * u));
    b = 255;
  } else if (t < 2.0 / 3.0) {
    const double u = (t - 1.0 / 3.0) * 3.0;
    r = static_cast<uint8_t>(std::lround(255.0 * u));
    g = 255;
    b = static_cast<uint8_t>(std::lround(255.0 * (1.0 - u)));
  } else {
    const double u = (t - 2.0 / 3.0) * 3.0;
    r = 255;
    g = static_cast<uint8_t>(std::lround(255.0 * (1.0 - u)));
    b = 0;
  }
}

namespace {

struct LayerView {
  dsu::DsuTrace trace;
  const dsu::DsuParams* params = nullptr;
  int feat_h = 0, feat_w = 0;
  double scale = 1.0;  // image pixels per feature pixel
};

// stride-2 conv (pad 1) keeps feature pixel u centered on image pixel 2u
double feat_to_image(double feat, double scale) { return feat * scale; }
double image_to_feat(double img, double scale) { return img / scale; }

struct PathPoint {
  int variant;  // 0 = X-type, 1 = Y-type
  int subpixel;
  int tap;
  int k;
  bool valid;
  double fx, fy;  // feature space
  double ix, iy;  // image space
  double weight;  // |tap| * rescale, 0 when masked
};

void collect_points(const LayerView& view, int parent_i, int parent_j,
                    std::vector<PathPoint>& out) {
  const dsu::DsuConfig& cfg = view.params->config;
  const int l_max = cfg.l_max();
  const int k_half = snake::half_span(l_max);
  const int l_odd = view.trace.l_odd.empty() ? l_max : view.trace.l_odd[0];
  const int c_n = (l_odd - 1) / 2;
  const double rescale = static_cast<double>(l_max) / static_cast<double>(l_odd);
  const int64_t out_w = 2 * view.feat_w;
  auto emit = [&](const Tensor& coords, int variant, const Tensor& taps) {
    if (coords.numel() == 0) return;
    const int64_t n_pts = coords.dim(1);
    for (int s = 0; s < 4; ++s) {
      const int64_t oy = 2 * parent_i + (s >> 1);
      const int64_t ox = 2 * parent_j + (s & 1);
      for (int t = 0; t < l_max; ++t) {
        const int64_t p = (oy * out_w + ox) * l_max + t;
        PathPoint pt;
        pt.variant = variant;
        pt.subpixel = s;
        pt.tap = t;
        pt.k = t - k_half;
        pt.valid = std::abs(pt.k) <= c_n;
        pt.fx = coords.data[static_cast<size_t>(p * 2 + 0)];
        pt.fy = coords.data[static_cast<size_t>(p * 2 + 1)];
        pt.ix = feat_to_image(pt.fx, view.scale);
        pt.iy = feat_to_image(pt.fy, view.scale);
        double w = 0.0;
        if (pt.valid) {
          for (int64_t c = 0; c < taps.dim(0); ++c) {
            w += std::abs(taps.data[static_cast<size_t>(c * l_max + t)]);
          }
          w *= rescale;
        }
        pt.weight = w;
        out.push_back(pt);
      }
    }
  };
  if (cfg.has_x()) emit(view.trace.coords_x, 0, view.params->agg_x);
  if (cfg.has_y()) emit(view.trace.coords_y, 1, view.params->agg_y);
}

RgbImage gray_to_rgb(const GrayImage& img) {
  RgbImage out(img.height, img.width);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const uint8_t v = img.at(r, c);
      out.set(r, c, v, v, v);
    }
  }
  return out;
}

void draw_dot(RgbImage& img, double x, double y, uint8_t r, uint8_t g, uint8_t b) {
  const int cx = std::clamp(static_cast<int>(std::lround(x)), 0, img.width - 1);
  const int cy = std::clamp(static_cast<int>(std::lround(y)), 0, img.height - 1);
  img.set(cy, cx, r, g, b);
}

}  // namespace

void run_viz(const VizRequest& request) {
  const GrayImage image = read_gray(request.image);
  if (request.at_x < 0 || request.at_x >= image.width || request.at_y < 0 ||
      request.at_y >= image.height) {
    throw ParamError("viz: coordinate (" + std::to_string(request.at_x) + "," +
                     std::to_string(request.at_y) + ") outside image " +
                     std::to_string(image.width) + "x" + std::to_string(image.height));
  }
  fs::create_directories(request.out_dir);
  const Tensor input = gray_to_tensor(image);

  LayerView view;
  dsu::DsuParams standalone;
  toy::ModelParams toy_params;
  toy::ForwardTrace trace;
  if (toy::checkpoint_is_toy_model(request.checkpoint)) {
    toy_params = toy::load_checkpoint(request.checkpoint);
    if (toy_params.config.upsampler != toy::Upsampler::kDsu) {
      throw ParamError("viz: checkpoint uses the bilinear upsampler; nothing to visualize");
    }
    Tape tape;
    NodeId in_node = tape.leaf(input);
    toy::model_forward(tape, in_node, toy_params, &trace);
    if (request.layer == "dsu1") {
      view.trace = trace.dsu1;
      view.params = &toy_params.dsu1;
      view.feat_h = (image.height - 1) / 2 + 1;
      view.feat_w = (image.width - 1) / 2 + 1;
      view.scale = 2.0;
    } else if (request.layer == "dsu2") {
      view.trace = trace.dsu2;
      view.params = &toy_params.dsu2;
      view.feat_h = image.height;
      view.feat_w = image.width;
      view.scale = 1.0;
    } else {
      throw ParamError("viz: unknown layer '" + request.layer + "' (expected dsu1 or dsu2)");
    }
  } else {
    standalone = toy::load_dsu_checkpoint(request.checkpoint);
    // replicate the grayscale image across the layer's channels
    const int c = standalone.config.channels;
    Tensor x = Tensor::zeros({1, c, image.height, image.width});
    for (int ch = 0; ch < c; ++ch) {
      std::copy(input.data.begin(), input.data.end(),
                x.data.begin() + static_cast<size_t>(ch) * input.data.size());
    }
    Tape tape;
    NodeId in_node = tape.leaf(std::move(x));
    dsu::DsuParamNodes nodes = dsu::push_params(tape, standalone);
    dsu::dsu_forward(tape, in_node, nodes, standalone.config, {}, &view.trace);
    view.params = &standalone;
    view.feat_h = image.height;
    view.feat_w = image.width;
    view.scale = 1.0;
  }

  const double feat_x = image_to_feat(request.at_x, view.scale);
  const double feat_y = image_to_feat(request.at_y, view.scale);
  const int parent_j = std::clamp(static_cast<int>(std::lround(feat_x)), 0, view.feat_w - 1);
  const int parent_i = std::clamp(static_cast<int>(std::lround(feat_y)), 0, view.feat_h - 1);

  std::vector<PathPoint> points;
  collect_points(view, parent_i, parent_j, points);

  // coords.csv: one row per path point of the selected parent pixel
  {
    std::ofstream os(request.out_dir / "coords.csv");
    if (!os) throw IoError("cannot write coords.csv in " + request.out_dir.string());
    os << "variant,subpixel,tap,k,valid,feat_x,feat_y,img_x,img_y\n";
    char line[256];
    for (const PathPoint& pt : points) {
      std::snprintf(line, sizeof(line), "%s,%d,%d,%d,%d,%.9g,%.9g,%.9g,%.9g\n",
                    pt.variant == 0 ? "x" : "y", pt.subpixel, pt.tap, pt.k, pt.valid ? 1 : 0,
                    pt.fx, pt.fy, pt.ix, pt.iy);
      os << line;
    }
  }

  // overlays: valid sampling points in red, subpixel centers in yellow
  for (int variant = 0; variant < 2; ++variant) {
    const bool present = variant == 0 ? view.params->config.has_x() : view.params->config.has_y();
    if (!present) continue;
    RgbImage overlay = gray_to_rgb(image);
    for (const PathPoint& pt : points) {
      if (pt.variant != variant || !pt.valid) continue;
      if (pt.k == 0) {
        draw_dot(overlay, pt.ix, pt.iy, 255, 220, 0);
      } else {
        draw_dot(overlay, pt.ix, pt.iy, 255, 0, 0);
      }
    }
    write_rgb_png(request.out_dir / (variant == 0 ? "overlay_x.png" : "overlay_y.png"), overlay);
  }

  // attention heatmap over the 3x3 parent neighborhood (Fig 7 style):
  // each valid sampling point splats its |tap| * rescale weight onto the four
  // feature pixels its bilinear fetch touches.
  std::vector<double> attention(static_cast<size_t>(view.feat_h) * view.feat_w, 0.0);
  auto splat = [&](double fx, double fy, double weight) {
    const double cx = std::clamp(fx, 0.0, static_cast<double>(view.feat_w - 1));
    const double cy = std::clamp(fy, 0.0, static_cast<double>(view.feat_h - 1));
    const int x0 = std::min(static_cast<int>(std::floor(cx)), view.feat_w - 2 >= 0 ? view.feat_w - 2 : 0);
    const int y0 = std::min(static_cast<int>(std::floor(cy)), view.feat_h - 2 >= 0 ? view.feat_h - 2 : 0);
    const int x1 = std::min(x0 + 1, view.feat_w - 1);
    const int y1 = std::min(y0 + 1, view.feat_h - 1);
    const double ax = cx - x0, ay = cy - y0;
    attention[static_cast<size_t>(y0) * view.feat_w + x0] += weight * (1 - ax) * (1 - ay);
    attention[static_cast<size_t>(y0) * view.feat_w + x1] += weight * ax * (1 - ay);
    attention[static_cast<size_t>(y1) * view.feat_w + x0] += weight * (1 - ax) * ay;
    attention[static_cast<size_t>(y1) * view.feat_w + x1] += weight * ax * ay;
  };
  for (int di = -1; di <= 1; ++di) {
    for (int dj = -1; dj <= 1; ++dj) {
      const int pi = parent_i + di, pj = parent_j + dj;
      if (pi < 0 || pi >= view.feat_h || pj < 0 || pj >= view.feat_w) continue;
      std::vector<PathPoint> neighborhood;
      collect_points(view, pi, pj, neighborhood);
      for (const PathPoint& pt : neighborhood) {
        if (pt.valid) splat(pt.fx, pt.fy, pt.weight);
      }
    }
  }
  double peak = 1e-12;
  for (double v : attention) peak = std::max(peak, v);
  const int s = static_cast<int>(view.scale);
  RgbImage heat(image.height, image.width);
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      const int fr = std::min(r / s, view.feat_h - 1);
      const int fc = std::min(c / s, view.feat_w - 1);
      uint8_t cr, cg, cb;
      heat_color(attention[static_cast<size_t>(fr) * view.feat_w + fc] / peak, cr, cg, cb);
      heat.set(r, c, cr, cg, cb);
    }
  }
  write_rgb_png(request.out_dir / "heatmap.png", heat);
}

}  // namespace tubekit::viz
