#include "tubekit/metrics.hpp"

namespace tubekit::metrics {

namespace {

void require_same_size(const BinaryMask& a, const BinaryMask& b, const char* what) {
  if (a.height != b.height || a.width != b.width) {
    throw ShapeError(std::string(what) + ": mask sizes differ, " + std::to_string(a.height) + "x" +
                     std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                     std::to_string(b.width));
  }
}

int64_t intersection_count(const BinaryMask& a, const BinaryMask& b) {
  int64_t n = 0;
  for (size_t i = 0; i < a.pixels.size(); ++i) n += (a.pixels[i] && b.pixels[i]) ? 1 : 0;
  return n;
}

}  // namespace

double miou(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_size(pred, gt, "miou");
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (size_t i = 0; i < pred.pixels.size(); ++i) {
    const bool p = pred.pixels[i] != 0, g = gt.pixels[i] != 0;
    if (p && g) ++tp;
    else if (p) ++fp;
    else if (g) ++fn;
    else ++tn;
  }
  const int64_t fg_union = tp + fp + fn;
  const int64_t bg_union = tn + fp + fn;
  const double fg_iou = fg_union == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(fg_union);
  const double bg_iou = bg_union == 0 ? 1.0 : static_cast<double>(tn) / static_cast<double>(bg_union);
  return 0.5 * (fg_iou + bg_iou);
}

double dice(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_size(pred, gt, "dice");
  const int64_t p = pred.count_foreground();
  const int64_t g = gt.count_foreground();
  if (p + g == 0) return 1.0;
  return 2.0 * static_cast<double>(intersection_count(pred, gt)) / static_cast<double>(p + g);
}

double cl_dice(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_size(pred, gt, "cl_dice");
  const BinaryMask skel_p = zhang_suen_skeleton(pred);
  const BinaryMask skel_g = zhang_suen_skeleton(gt);
  const int64_t sp = skel_p.count_foreground();
  const int64_t sg = skel_g.count_foreground();
  const double tprec = pred.empty_foreground()
                           ? 1.0
                           : (sp == 0 ? 0.0
                                      : static_cast<double>(intersection_count(skel_p, gt)) /
                                            static_cast<double>(sp));
  const double tsens = gt.empty_foreground()
                           ? 1.0
                           : (sg == 0 ? 0.0
                                      : static_cast<double>(intersection_count(skel_g, pred)) /
                                            static_cast<double>(sg));
  if (tprec + tsens == 0.0) return 0.0;
  return 2.0 * tprec * tsens / (tprec + tsens);
}

double assd(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_size(pred, gt, "assd");
  if (pred.empty_foreground() || gt.empty_foreground()) {
    throw ParamError("assd: undefined surface (a mask has no foreground)");
  }
  const BinaryMask bp = extract_boundary(pred);
  const BinaryMask bg = extract_boundary(gt);
  const DistanceField to_gt = euclidean_distance_transform(bg);
  const DistanceField to_pred = euclidean_distance_transform(bp);
  double total = 0.0;
  int64_t count = 0;
  for (int r = 0; r < pred.height; ++r) {
    for (int c = 0; c < pred.width; ++c) {
      if (bp.at(r, c)) {
        total += to_gt.at(r, c);
        ++count;
      }
      if (bg.at(r, c)) {
        total += to_pred.at(r, c);
        ++count;
      }
    }
  }
  return total / static_cast<double>(count);
}

MetricReport evaluate(const BinaryMask& pred, const BinaryMask& gt) {
  MetricReport r;
  r.miou = miou(pred, gt);
  r.dice = dice(pred, gt);
  r.cldice = cl_dice(pred, gt);
  if (pred.empty_foreground() || gt.empty_foreground()) {
    r.assd_defined = false;
    r.assd = 0.0;
  } else {
    r.assd = assd(pred, gt);
  }
  return r;
}

}  // namespace tubekit::metrics
