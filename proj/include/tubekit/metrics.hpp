#pragma once

#include "tubekit/morphology.hpp"

namespace tubekit::metrics {

struct MetricReport {
  double miou = 0.0;
  double dice = 0.0;
  double cldice = 0.0;
  double assd = 0.0;
  bool assd_defined = true;  // false when either mask has no surface
};

// Mean over {background, foreground} of per-class IoU. A class absent from
// both masks contributes IoU = 1.
double miou(const BinaryMask& pred, const BinaryMask& gt);

// 2|P^G| / (|P| + |G|); 1 when both are empty.
double dice(const BinaryMask& pred, const BinaryMask& gt);

// Centerline Dice: harmonic mean of topology precision |skel(P)^G|/|skel(P)|
// and sensitivity |skel(G)^P|/|skel(G)|, skeletons via zhang_suen_skeleton.
// An empty mask contributes 1 to its term; a 0/0 harmonic mean is 0.
double cl_dice(const BinaryMask& pred, const BinaryMask& gt);

// Average symmetric surface distance between the two boundary point sets,
// Euclidean, in pixels. Throws ParamError when either mask is empty.
double assd(const BinaryMask& pred, const BinaryMask& gt);

// All four metrics; ASSD is marked undefined instead of throwing.
MetricReport evaluate(const BinaryMask& pred, const BinaryMask& gt);

}  // namespace tubekit::metrics
