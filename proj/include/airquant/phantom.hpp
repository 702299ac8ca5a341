#pragma once

#include <vector>

#include "airquant/types.hpp"

namespace airquant {

struct BranchSpec {
    int id = 0;
    int parent = -1;       // -1 for the trachea
    int generation = 0;    // 0 = trachea
    int region = 0;        // segment code, 0 = none (hilum-adjacent)
    Vec3 start{0, 0, 0};   // mm
    Vec3 direction{0, 0, -1};  // unit
    double length_mm = 0.0;
    double radius_mm = 0.0;
};

struct TreeSpec {
    std::vector<BranchSpec> branches;
    double half_angle_deg = 0.0;
    double ratio = 0.0;  // radius and length decay per generation

    Vec3 branch_end(const BranchSpec& b) const {
        return {b.start[0] + b.direction[0] * b.length_mm,
                b.start[1] + b.direction[1] * b.length_mm,
                b.start[2] + b.direction[2] * b.length_mm};
    }
};

struct TreeParams {
    int depth = 6;              // number of generations (1 = trachea only)
    double root_radius_mm = 4.0;
    double root_length_mm = 12.0;
    double ratio = 0.8;         // in (0,1)
    double angle_deg = 42.0;    // bifurcation half-angle, in (0,90)
    double jitter = 0.0;        // relative perturbation of angle and length
    std::uint64_t seed = 0;
    int segmental_generation = -1;  // -1: depth - 1
    double min_radius_mm = 0.0;     // error if the deepest generation dips below
    double max_tilt_deg = 80.0;     // clamp polar angle from straight-down
};

// Deterministic binary tree with orthogonal successive branching planes.
// Segment codes (1..18, Table-style ordering handled by quant) are assigned
// by splitting the 2^segmental_generation subtrees into contiguous groups;
// deeper generations inherit their ancestor's code.
TreeSpec generate_tree(const TreeParams& params);

// pi r^2 L
double analytic_branch_volume_mm3(const BranchSpec& branch);

struct GridGeometry {
    Index3 dims{96, 96, 96};
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 origin{0.0, 0.0, 0.0};
};

// Voxel foreground iff its center lies within some branch's radius of that
// branch's axis segment. Voxels are claimed by the branch whose surface is
// nearest (min distance minus radius).
struct RasterResult {
    Mask mask;
    LabelMap region_labels;           // claiming branch's region on foreground
    std::vector<std::int32_t> claim;  // claiming branch id per voxel, -1 outside
    bool clipped = false;             // tree extends outside the geometry
};

RasterResult rasterize_tree_labeled(const TreeSpec& tree, const GridGeometry& geom);
Mask rasterize_tree(const TreeSpec& tree, const GridGeometry& geom,
                    bool* clipped = nullptr);

// Lumen -1000 HU, one-voxel wall shell -100 HU, parenchyma -850 HU,
// everything else 0 HU, plus Gaussian noise. Deterministic per seed.
VoxelGrid synthesize_intensity(const Mask& airway, const Mask& lung,
                               double noise_sd_hu, std::uint64_t seed);

// Each branch sampled at <= step intervals from start to end inclusive.
std::vector<Centerline> emit_centerlines(const TreeSpec& tree, double step_mm);

struct BranchRecord {
    int branch_id;
    int region;
    double radius_mm;
    double length_mm;
    double analytic_volume_mm3;
};

struct PhantomConfig {
    TreeParams tree;
    Index3 dims{0, 0, 0};        // {0,0,0}: auto (96^3 for depth<=5 else 144^3)
    Vec3 spacing{0.0, 0.0, 0.0}; // zeros: auto (min branch radius / 3)
    double noise_sd_hu = 0.0;
    double centerline_step_mm = 0.0;  // 0: auto (min spacing)
    double lung_inflation = 1.25;     // ellipsoid semi-axes vs subtree extent
};

struct PhantomOutput {
    TreeSpec tree;
    GridGeometry geometry;
    VoxelGrid intensity;
    Mask airway_gt;
    Mask lung_mask;
    LabelMap region_labels;  // segment codes over lung+airway, 0 elsewhere
    std::vector<Centerline> centerlines;
    std::vector<BranchRecord> branch_table;
    bool clipped = false;
};

PhantomOutput build_phantom(const PhantomConfig& config);

}  // namespace airquant
