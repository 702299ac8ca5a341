#pragma once

#include <vector>

#include "airquant/types.hpp"

namespace airquant {

// 2|P ∩ G| / (|P| + |G|); both masks empty -> 1 by convention.
double dice(const Mask& pred, const Mask& gt);

// Fraction of GT centerline points covered by pred: a point counts if its
// containing voxel is foreground (tolerance 0) or any foreground voxel
// center lies within tolerance_mm of it.
double centerline_recall(const std::vector<Centerline>& gt_centerlines,
                         const Mask& pred, double tolerance_mm = 0.0);

// Foreground voxel count times voxel volume.
double mask_volume_mm3(const Mask& mask);

struct EvalReport {
    double dice = 0.0;
    double cl_recall = 0.0;
    double gt_volume_mm3 = 0.0;
    double pred_volume_mm3 = 0.0;
};

EvalReport evaluate_segmentation(const Mask& pred, const Mask& gt,
                                 const std::vector<Centerline>& gt_centerlines,
                                 double tolerance_mm = 0.0);

}  // namespace airquant
