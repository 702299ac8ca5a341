#include "airquant/volume_ops.hpp"

#include <algorithm>
#include <cmath>

namespace airquant {

VoxelGrid resample_trilinear(const VoxelGrid& grid, Index3 target_dims) {
    grid.validate();
    if (target_dims[0] <= 0 || target_dims[1] <= 0 || target_dims[2] <= 0)
        throw GeometryError("resample: target dims must be positive");

    Vec3 out_spacing;
    for (int i = 0; i < 3; ++i)
        out_spacing[i] =
            grid.spacing[i] * static_cast<double>(grid.dims[i]) / target_dims[i];

    VoxelGrid out(target_dims, out_spacing, grid.origin, DType::F32);

    const int nx = grid.dims[0], ny = grid.dims[1], nz = grid.dims[2];
    // Voxel-center aligned mapping: out center i maps to source coordinate
    // (i + 0.5) * scale - 0.5, clamped to the edge.
    Vec3 scale;
    for (int i = 0; i < 3; ++i)
        scale[i] = static_cast<double>(grid.dims[i]) / target_dims[i];

    for (int z = 0; z < target_dims[2]; ++z) {
        const double fz = std::clamp((z + 0.5) * scale[2] - 0.5, 0.0, nz - 1.0);
        const int z0 = static_cast<int>(fz);
        const int z1 = std::min(z0 + 1, nz - 1);
        const double wz = fz - z0;
        for (int y = 0; y < target_dims[1]; ++y) {
            const double fy = std::clamp((y + 0.5) * scale[1] - 0.5, 0.0, ny - 1.0);
            const int y0 = static_cast<int>(fy);
            const int y1 = std::min(y0 + 1, ny - 1);
            const double wy = fy - y0;
            for (int x = 0; x < target_dims[0]; ++x) {
                const double fx =
                    std::clamp((x + 0.5) * scale[0] - 0.5, 0.0, nx - 1.0);
                const int x0 = static_cast<int>(fx);
                const int x1 = std::min(x0 + 1, nx - 1);
                const double wx = fx - x0;

                const double c00 = grid.at(x0, y0, z0) * (1 - wx) + grid.at(x1, y0, z0) * wx;
                const double c10 = grid.at(x0, y1, z0) * (1 - wx) + grid.at(x1, y1, z0) * wx;
                const double c01 = grid.at(x0, y0, z1) * (1 - wx) + grid.at(x1, y0, z1) * wx;
                const double c11 = grid.at(x0, y1, z1) * (1 - wx) + grid.at(x1, y1, z1) * wx;
                const double c0 = c00 * (1 - wy) + c10 * wy;
                const double c1 = c01 * (1 - wy) + c11 * wy;
                out.at(x, y, z) = static_cast<float>(c0 * (1 - wz) + c1 * wz);
            }
        }
    }
    return out;
}

VoxelGrid clip_normalize(const VoxelGrid& grid, double lo, double hi) {
    if (!(lo < hi)) throw ConfigError("clip_normalize: lo must be < hi");
    VoxelGrid out(grid.dims, grid.spacing, grid.origin, DType::F32);
    const double range = hi - lo;
    for (std::size_t i = 0; i < grid.data.size(); ++i) {
        const double v = std::clamp(static_cast<double>(grid.data[i]), lo, hi);
        out.data[i] = static_cast<float>((v - lo) / range);
    }
    return out;
}

BBox mask_bbox(const Mask& mask, int margin) {
    Index3 lo = {mask.dims[0], mask.dims[1], mask.dims[2]};
    Index3 hi = {-1, -1, -1};
    for (int z = 0; z < mask.dims[2]; ++z)
        for (int y = 0; y < mask.dims[1]; ++y)
            for (int x = 0; x < mask.dims[0]; ++x)
                if (mask.at(x, y, z)) {
                    lo[0] = std::min(lo[0], x);
                    lo[1] = std::min(lo[1], y);
                    lo[2] = std::min(lo[2], z);
                    hi[0] = std::max(hi[0], x);
                    hi[1] = std::max(hi[1], y);
                    hi[2] = std::max(hi[2], z);
                }
    if (hi[0] < 0) throw DegenerateError("mask_bbox: empty mask");
    BBox box;
    for (int i = 0; i < 3; ++i) {
        box.lo[i] = std::max(0, lo[i] - margin);
        box.hi[i] = std::min(mask.dims[i] - 1, hi[i] + margin);
    }
    return box;
}

std::pair<VoxelGrid, BBox> crop_to_bbox(const VoxelGrid& grid, const Mask& mask,
                                        int margin) {
    if (grid.dims != mask.dims)
        throw GeometryError("crop_to_bbox: grid and mask dims differ");
    const BBox box = mask_bbox(mask, margin);
    const Index3 sz = box.size();
    Vec3 origin;
    for (int i = 0; i < 3; ++i)
        origin[i] = grid.origin[i] + box.lo[i] * grid.spacing[i];
    VoxelGrid out(sz, grid.spacing, origin, grid.dtype);
    for (int z = 0; z < sz[2]; ++z)
        for (int y = 0; y < sz[1]; ++y)
            for (int x = 0; x < sz[0]; ++x)
                out.at(x, y, z) = grid.at(box.lo[0] + x, box.lo[1] + y, box.lo[2] + z);
    return {std::move(out), box};
}

Mask crop_mask(const Mask& mask, const BBox& box) {
    const Index3 sz = box.size();
    Vec3 origin;
    for (int i = 0; i < 3; ++i)
        origin[i] = mask.origin[i] + box.lo[i] * mask.spacing[i];
    Mask out(sz, mask.spacing, origin);
    for (int z = 0; z < sz[2]; ++z)
        for (int y = 0; y < sz[1]; ++y)
            for (int x = 0; x < sz[0]; ++x)
                out.at(x, y, z) = mask.at(box.lo[0] + x, box.lo[1] + y, box.lo[2] + z);
    return out;
}

Mask embed_mask(const Mask& cropped, const BBox& box, const Mask& reference) {
    Mask out(reference.dims, reference.spacing, reference.origin);
    const Index3 sz = box.size();
    if (cropped.dims != sz)
        throw GeometryError("embed_mask: cropped dims do not match bbox");
    for (int z = 0; z < sz[2]; ++z)
        for (int y = 0; y < sz[1]; ++y)
            for (int x = 0; x < sz[0]; ++x)
                out.at(box.lo[0] + x, box.lo[1] + y, box.lo[2] + z) =
                    cropped.at(x, y, z);
    return out;
}

}  // namespace airquant
