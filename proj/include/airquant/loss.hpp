#pragma once

#include "airquant/types.hpp"

namespace airquant {

struct EdtResult {
    VoxelGrid distance;      // mm to nearest foreground voxel center, 0 on foreground
    bool no_foreground = false;  // empty mask: all distances +inf
};

// Exact Euclidean distance transform (separable squared-distance lower
// envelope), honoring anisotropic spacing.
EdtResult edt(const Mask& mask, Vec3 spacing);
inline EdtResult edt(const Mask& mask) { return edt(mask, mask.spacing); }

// Boundary set of a mask: foreground voxels with a background 6-neighbor
// plus background voxels with a foreground 6-neighbor.
Mask boundary_set(const Mask& mask);

// w(v) = 1 + alpha * exp(-d_B(v)^2 / (2 sigma^2)); empty gt gives uniform 1.
VoxelGrid boundary_weights(const Mask& gt, double alpha, double sigma);

struct LossPart {
    double value = 0.0;
    VoxelGrid gradient;  // dL/dp per voxel
};

struct LossValue {
    double total = 0.0;
    double dice_term = 0.0;
    double ce_term = 0.0;
    VoxelGrid gradient;
};

struct LossParams {
    double dice_eps = 1e-5;
    double ce_clamp_eps = 1e-7;
};

// L = 1 - (2*sum(w p g) + eps) / (sum(w p) + sum(w g) + eps)
LossPart weighted_dice_loss(const VoxelGrid& p, const Mask& g, const VoxelGrid& w,
                            double eps = 1e-5);

// L = -sum(w [g log p~ + (1-g) log(1-p~)]) / sum(w), p~ clamped away from {0,1}
LossPart weighted_ce_loss(const VoxelGrid& p, const Mask& g, const VoxelGrid& w,
                          double clamp_eps = 1e-7);

// Equal-weight hybrid: total = 0.5*dice + 0.5*ce, gradient likewise.
LossValue hybrid_loss(const VoxelGrid& p, const Mask& g, const VoxelGrid& w,
                      const LossParams& params = {});

}  // namespace airquant
