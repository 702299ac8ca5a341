#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "airquant/errors.hpp"

namespace airquant {

enum class DType : std::uint8_t { U8 = 0, I16 = 1, F32 = 2 };

inline std::size_t dtype_size(DType t) {
    switch (t) {
        case DType::U8: return 1;
        case DType::I16: return 2;
        case DType::F32: return 4;
    }
    return 0;
}

using Index3 = std::array<int, 3>;
using Vec3 = std::array<double, 3>;

// 3D scalar field, x-fastest linear order. Values are held as float
// regardless of the on-disk dtype; uint8 and int16 round-trip exactly
// through float.
struct VoxelGrid {
    Index3 dims{0, 0, 0};
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 origin{0.0, 0.0, 0.0};
    DType dtype = DType::F32;
    std::vector<float> data;

    VoxelGrid() = default;
    VoxelGrid(Index3 d, Vec3 sp, Vec3 org, DType dt)
        : dims(d), spacing(sp), origin(org), dtype(dt),
          data(static_cast<std::size_t>(d[0]) * d[1] * d[2], 0.0f) {
        validate();
    }

    void validate() const {
        if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0)
            throw GeometryError("VoxelGrid: non-positive dimensions");
        if (spacing[0] <= 0 || spacing[1] <= 0 || spacing[2] <= 0)
            throw GeometryError("VoxelGrid: non-positive spacing");
        if (data.size() != voxel_count())
            throw GeometryError("VoxelGrid: data length does not match dims");
    }

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }
    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
    }
    float at(int x, int y, int z) const { return data[index(x, y, z)]; }
    float& at(int x, int y, int z) { return data[index(x, y, z)]; }

    double voxel_volume_mm3() const { return spacing[0] * spacing[1] * spacing[2]; }

    bool same_geometry(const VoxelGrid& o) const {
        return dims == o.dims && spacing == o.spacing && origin == o.origin;
    }

    // Physical position of a voxel center.
    Vec3 position(int x, int y, int z) const {
        return {origin[0] + x * spacing[0], origin[1] + y * spacing[1],
                origin[2] + z * spacing[2]};
    }
};

// Binary foreground mask: uint8 grid restricted to {0, 1}.
struct Mask {
    Index3 dims{0, 0, 0};
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 origin{0.0, 0.0, 0.0};
    std::vector<std::uint8_t> data;

    Mask() = default;
    Mask(Index3 d, Vec3 sp, Vec3 org)
        : dims(d), spacing(sp), origin(org),
          data(static_cast<std::size_t>(d[0]) * d[1] * d[2], 0) {}

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }
    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
    }
    std::uint8_t at(int x, int y, int z) const { return data[index(x, y, z)]; }
    std::uint8_t& at(int x, int y, int z) { return data[index(x, y, z)]; }

    double voxel_volume_mm3() const { return spacing[0] * spacing[1] * spacing[2]; }
    std::size_t foreground_count() const {
        std::size_t n = 0;
        for (auto v : data) n += (v != 0);
        return n;
    }
    bool same_geometry(const Mask& o) const {
        return dims == o.dims && spacing == o.spacing && origin == o.origin;
    }
    Vec3 position(int x, int y, int z) const {
        return {origin[0] + x * spacing[0], origin[1] + y * spacing[1],
                origin[2] + z * spacing[2]};
    }
};

// Integer region labels (0 = unassigned / hilum).
struct LabelMap {
    Index3 dims{0, 0, 0};
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 origin{0.0, 0.0, 0.0};
    std::vector<std::int16_t> data;

    LabelMap() = default;
    LabelMap(Index3 d, Vec3 sp, Vec3 org)
        : dims(d), spacing(sp), origin(org),
          data(static_cast<std::size_t>(d[0]) * d[1] * d[2], 0) {}

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }
    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
    }
    std::int16_t at(int x, int y, int z) const { return data[index(x, y, z)]; }
    std::int16_t& at(int x, int y, int z) { return data[index(x, y, z)]; }
    double voxel_volume_mm3() const { return spacing[0] * spacing[1] * spacing[2]; }
};

// Ordered sub-voxel polyline for one branch.
struct Centerline {
    int branch_id = 0;
    int region = 0;  // 0 = none / hilum
    std::vector<Vec3> points;
};

// Conversions between grid flavors.
Mask to_mask(const VoxelGrid& g);
LabelMap to_labels(const VoxelGrid& g);
VoxelGrid mask_to_grid(const Mask& m);
VoxelGrid labels_to_grid(const LabelMap& l);

}  // namespace airquant
