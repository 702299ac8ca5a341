#pragma once

#include "airquant/types.hpp"

namespace airquant {

struct BBox {
    Index3 lo{0, 0, 0};
    Index3 hi{0, 0, 0};  // inclusive

    Index3 size() const {
        return {hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1};
    }
};

// Trilinear resample to target dims. Spacing is rescaled so the physical
// extent is unchanged; sample positions outside the source are clamped to
// the edge (no sentinel values at borders).
VoxelGrid resample_trilinear(const VoxelGrid& grid, Index3 target_dims);

// v' = (clamp(v, lo, hi) - lo) / (hi - lo), output float32 in [0,1].
VoxelGrid clip_normalize(const VoxelGrid& grid, double lo, double hi);

// Tight bounding box of the mask foreground, expanded by margin voxels and
// clamped to the grid extent. Throws DegenerateError on an empty mask.
BBox mask_bbox(const Mask& mask, int margin);

// Sub-grid covering bbox; the returned BBox records where to re-embed.
std::pair<VoxelGrid, BBox> crop_to_bbox(const VoxelGrid& grid, const Mask& mask,
                                        int margin);
Mask crop_mask(const Mask& mask, const BBox& box);

// Paste a cropped mask back into a full-size empty mask with the geometry of
// `reference`, at the location recorded by `box`.
Mask embed_mask(const Mask& cropped, const BBox& box, const Mask& reference);

}  // namespace airquant
