#pragma once

#include <filesystem>

#include "tubekit/image_io.hpp"
#include "tubekit/toy_model.hpp"

namespace tubekit::viz {

struct VizRequest {
  std::filesystem::path checkpoint;  // toy-model or DSU-layer checkpoint directory
  std::filesystem::path image;       // grayscale input
  int at_x = 0;                      // image pixel column
  int at_y = 0;                      // image pixel row
  std::filesystem::path out_dir;
  std::string layer = "dsu2";        // toy checkpoints: dsu1 or dsu2
};

// Renders the selected subpixels' X/Y-type sampling coordinates over the
// image plus an attention heatmap accumulated from sampling weights over the
// 3x3 parent neighborhood. Emits overlay_x.png / overlay_y.png (per variant),
// heatmap.png and coords.csv into out_dir.
void run_viz(const VizRequest& request);

// Linear blue(low) -> red(high) colormap used for weight-map and attention
// heatmaps; t in [0, 1].
void heat_color(double t, uint8_t& r, uint8_t& g, uint8_t& b);

}  // namespace tubekit::viz
