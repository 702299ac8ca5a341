#pragma once

#include <functional>
#include <vector>

#include "airquant/types.hpp"

namespace airquant {

// Voxel-probability predictor contract: input patch normalized to [0,1],
// output probabilities of identical dims in [0,1].
using Predictor = std::function<VoxelGrid(const VoxelGrid&)>;

struct ComponentLabeling {
    LabelMap labels;                // 1..n by decreasing size, 0 = background
    std::vector<std::size_t> sizes; // sizes[i] = voxels of component i+1
};

// Deterministic connected-component labeling: components numbered by
// decreasing size, ties broken by the smallest linear index they contain.
ComponentLabeling connected_components(const Mask& mask, int connectivity);

struct LungParams {
    double threshold_hu = -500.0;
    int border_faces_outside = 2;  // components touching >= this many faces are outside air
};

// Threshold air-like voxels, drop outside-air components touching the volume
// border, keep the two largest remaining components, fill in-plane holes.
Mask segment_lung_coarse(const VoxelGrid& intensity, const LungParams& params = {});

struct GrowthTrace {
    struct Step {
        double threshold_hu;
        std::size_t voxels;
    };
    std::vector<Step> steps;
    double chosen_threshold_hu = 0.0;
    bool leakage = false;
};

struct RegionGrowParams {
    double t_start_hu = -950.0;
    double t_max_hu = -300.0;
    double t_step_hu = 50.0;
    double explosion_ratio = 1.5;
};

// Threshold-sweep region growing from a seed: 26-connected flood fill of
// voxels below t, t swept upward until the grown volume ratio between
// consecutive thresholds exceeds explosion_ratio.
std::pair<Mask, GrowthTrace> region_grow_airway(const VoxelGrid& intensity,
                                                Index3 seed,
                                                const RegionGrowParams& params = {});

struct TracheaSeedParams {
    double top_fraction = 0.10;     // slab of top axial slices to search
    double air_threshold_hu = -900.0;
    double min_area_mm2 = 20.0;
    double max_area_mm2 = 600.0;
};

// Seed voxel inside the trachea: centroid of the largest in-plane air
// component in the top slices whose area falls in the configured band.
Index3 find_trachea_seed(const VoxelGrid& intensity,
                         const TracheaSeedParams& params = {});

struct WindowBox {
    Index3 start;
    Index3 size;
};

// Window tiling with stride = window * (1 - overlap); the final window per
// axis is clamped flush to the boundary so every voxel is covered.
std::vector<WindowBox> sliding_windows(Index3 dims, Index3 window, double overlap);

// Predict each window and average overlapping predictions uniformly.
VoxelGrid sliding_window_infer(const VoxelGrid& intensity, Index3 window,
                               double overlap, const Predictor& predictor);
// Same, over an explicit window list (visit order must not matter).
VoxelGrid sliding_window_infer(const VoxelGrid& intensity,
                               const std::vector<WindowBox>& windows,
                               const Predictor& predictor);

// Foreground iff p > threshold (strict).
Mask binarize(const VoxelGrid& prob, double threshold = 0.5);

// Keep only the largest connected component (26-connectivity).
Mask largest_component(const Mask& mask);

}  // namespace airquant
