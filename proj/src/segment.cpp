#include "airquant/segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace airquant {

namespace {

struct NeighborTable {
    std::array<Index3, 26> offsets;
    int count;
};

NeighborTable neighbors(int connectivity) {
    NeighborTable t{};
    t.count = 0;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0 && dz == 0) continue;
                const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
                if (connectivity == 6 && manhattan != 1) continue;
                t.offsets[t.count++] = {dx, dy, dz};
            }
    return t;
}

}  // namespace

ComponentLabeling connected_components(const Mask& mask, int connectivity) {
    if (connectivity != 6 && connectivity != 26)
        throw ConfigError("connected_components: connectivity must be 6 or 26");
    const auto nb = neighbors(connectivity);
    const int nx = mask.dims[0], ny = mask.dims[1], nz = mask.dims[2];

    LabelMap provisional(mask.dims, mask.spacing, mask.origin);
    std::vector<std::size_t> sizes;       // per provisional label (1-based)
    std::vector<std::size_t> first_index; // smallest linear index per label

    std::vector<std::size_t> stack;
    int next = 0;
    for (std::size_t i = 0; i < mask.data.size(); ++i) {
        if (!mask.data[i] || provisional.data[i]) continue;
        ++next;
        if (next > std::numeric_limits<std::int16_t>::max())
            throw DegenerateError("connected_components: more than 32767 components");
        std::size_t count = 0;
        stack.clear();
        stack.push_back(i);
        provisional.data[i] = static_cast<std::int16_t>(next);
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            ++count;
            const int x = static_cast<int>(cur % nx);
            const int y = static_cast<int>((cur / nx) % ny);
            const int z = static_cast<int>(cur / (static_cast<std::size_t>(nx) * ny));
            for (int k = 0; k < nb.count; ++k) {
                const int xx = x + nb.offsets[k][0];
                const int yy = y + nb.offsets[k][1];
                const int zz = z + nb.offsets[k][2];
                if (xx < 0 || yy < 0 || zz < 0 || xx >= nx || yy >= ny || zz >= nz)
                    continue;
                const std::size_t j = mask.index(xx, yy, zz);
                if (mask.data[j] && !provisional.data[j]) {
                    provisional.data[j] = static_cast<std::int16_t>(next);
                    stack.push_back(j);
                }
            }
        }
        sizes.push_back(count);
        first_index.push_back(i);  // scan order makes i the smallest index
    }

    // Renumber by decreasing size, ties by smallest contained linear index.
    std::vector<int> order(sizes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (sizes[a] != sizes[b]) return sizes[a] > sizes[b];
        return first_index[a] < first_index[b];
    });
    std::vector<std::int16_t> remap(sizes.size() + 1, 0);
    for (std::size_t r = 0; r < order.size(); ++r)
        remap[order[r] + 1] = static_cast<std::int16_t>(r + 1);

    ComponentLabeling out;
    out.labels = LabelMap(mask.dims, mask.spacing, mask.origin);
    for (std::size_t i = 0; i < mask.data.size(); ++i)
        out.labels.data[i] = remap[provisional.data[i]];
    out.sizes.resize(sizes.size());
    for (std::size_t r = 0; r < order.size(); ++r) out.sizes[r] = sizes[order[r]];
    return out;
}

namespace {

// Fill background holes slice-by-slice: in each axial slice, background
// pixels not 4-connected to the slice border become foreground.
void fill_holes_slicewise(Mask& mask) {
    const int nx = mask.dims[0], ny = mask.dims[1], nz = mask.dims[2];
    std::vector<std::uint8_t> outside(static_cast<std::size_t>(nx) * ny);
    std::vector<int> stack;
    for (int z = 0; z < nz; ++z) {
        std::fill(outside.begin(), outside.end(), 0);
        stack.clear();
        auto push = [&](int x, int y) {
            const int id = x + nx * y;
            if (!outside[id] && !mask.at(x, y, z)) {
                outside[id] = 1;
                stack.push_back(id);
            }
        };
        for (int x = 0; x < nx; ++x) { push(x, 0); push(x, ny - 1); }
        for (int y = 0; y < ny; ++y) { push(0, y); push(nx - 1, y); }
        while (!stack.empty()) {
            const int id = stack.back();
            stack.pop_back();
            const int x = id % nx, y = id / nx;
            if (x > 0) push(x - 1, y);
            if (x < nx - 1) push(x + 1, y);
            if (y > 0) push(x, y - 1);
            if (y < ny - 1) push(x, y + 1);
        }
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x)
                if (!mask.at(x, y, z) && !outside[x + nx * y]) mask.at(x, y, z) = 1;
    }
}

int faces_touched(const Mask& mask, const LabelMap& labels, int label) {
    const int nx = mask.dims[0], ny = mask.dims[1], nz = mask.dims[2];
    bool face[6] = {false, false, false, false, false, false};
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                if (labels.at(x, y, z) != label) continue;
                if (x == 0) face[0] = true;
                if (x == nx - 1) face[1] = true;
                if (y == 0) face[2] = true;
                if (y == ny - 1) face[3] = true;
                if (z == 0) face[4] = true;
                if (z == nz - 1) face[5] = true;
            }
    int n = 0;
    for (bool f : face) n += f;
    return n;
}

}  // namespace

Mask segment_lung_coarse(const VoxelGrid& intensity, const LungParams& params) {
    Mask air(intensity.dims, intensity.spacing, intensity.origin);
    for (std::size_t i = 0; i < intensity.data.size(); ++i)
        air.data[i] = intensity.data[i] < params.threshold_hu ? 1 : 0;

    auto cc = connected_components(air, 6);
    if (cc.sizes.empty()) throw DegenerateError("segment_lung_coarse: no air-like voxels");

    // Drop outside air (touches several volume faces), then keep two largest.
    std::vector<bool> keep(cc.sizes.size() + 1, false);
    std::vector<int> candidates;
    for (std::size_t lbl = 1; lbl <= cc.sizes.size(); ++lbl) {
        if (faces_touched(air, cc.labels, static_cast<int>(lbl)) >=
            params.border_faces_outside)
            continue;
        candidates.push_back(static_cast<int>(lbl));
    }
    if (candidates.empty())
        throw DegenerateError("segment_lung_coarse: no lung candidate components");
    for (std::size_t k = 0; k < candidates.size() && k < 2; ++k)
        keep[candidates[k]] = true;  // labels already sorted by size

    Mask lung(intensity.dims, intensity.spacing, intensity.origin);
    for (std::size_t i = 0; i < lung.data.size(); ++i)
        lung.data[i] = keep[cc.labels.data[i]] ? 1 : 0;

    fill_holes_slicewise(lung);
    return lung;
}

std::pair<Mask, GrowthTrace> region_grow_airway(const VoxelGrid& intensity,
                                                Index3 seed,
                                                const RegionGrowParams& params) {
    const int nx = intensity.dims[0], ny = intensity.dims[1], nz = intensity.dims[2];
    if (seed[0] < 0 || seed[1] < 0 || seed[2] < 0 || seed[0] >= nx ||
        seed[1] >= ny || seed[2] >= nz)
        throw ConfigError("region_grow_airway: seed outside volume");
    if (!(intensity.at(seed[0], seed[1], seed[2]) < params.t_start_hu))
        throw DegenerateError("region_grow_airway: seed voxel is not air-like");
    if (!(params.t_start_hu < params.t_max_hu) || params.t_step_hu <= 0)
        throw ConfigError("region_grow_airway: bad threshold sweep");

    const auto nb = neighbors(26);
    auto grow = [&](double t, Mask& out) -> std::pair<std::size_t, int> {
        std::fill(out.data.begin(), out.data.end(), 0);
        std::vector<std::size_t> stack;
        const std::size_t s = intensity.index(seed[0], seed[1], seed[2]);
        out.data[s] = 1;
        stack.push_back(s);
        std::size_t count = 0;
        bool face[6] = {};
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            ++count;
            const int x = static_cast<int>(cur % nx);
            const int y = static_cast<int>((cur / nx) % ny);
            const int z = static_cast<int>(cur / (static_cast<std::size_t>(nx) * ny));
            face[0] |= x == 0;
            face[1] |= x == nx - 1;
            face[2] |= y == 0;
            face[3] |= y == ny - 1;
            face[4] |= z == 0;
            face[5] |= z == nz - 1;
            for (int k = 0; k < nb.count; ++k) {
                const int xx = x + nb.offsets[k][0];
                const int yy = y + nb.offsets[k][1];
                const int zz = z + nb.offsets[k][2];
                if (xx < 0 || yy < 0 || zz < 0 || xx >= nx || yy >= ny || zz >= nz)
                    continue;
                const std::size_t j = intensity.index(xx, yy, zz);
                if (!out.data[j] && intensity.data[j] < t) {
                    out.data[j] = 1;
                    stack.push_back(j);
                }
            }
        }
        int faces = 0;
        for (bool f : face) faces += f;
        return {count, faces};
    };

    GrowthTrace trace;
    Mask current(intensity.dims, intensity.spacing, intensity.origin);
    Mask best(intensity.dims, intensity.spacing, intensity.origin);
    std::size_t prev_count = 0;
    bool have_best = false;
    bool all_leak_border = true;

    for (double t = params.t_start_hu; t <= params.t_max_hu + 1e-9;
         t += params.t_step_hu) {
        const auto [count, faces] = grow(t, current);
        trace.steps.push_back({t, count});
        if (have_best && prev_count > 0 &&
            static_cast<double>(count) >
                params.explosion_ratio * static_cast<double>(prev_count)) {
            trace.leakage = true;
            break;
        }
        best.data = current.data;
        trace.chosen_threshold_hu = t;
        prev_count = count;
        have_best = true;
        // a trachea legitimately enters through one or two faces; spreading
        // over three or more means the fill escaped into outside air
        all_leak_border = all_leak_border && faces >= 3;
    }
    if (all_leak_border)
        throw DegenerateError(
            "region_grow_airway: growth reached the volume border at every threshold");
    return {std::move(best), trace};
}

Index3 find_trachea_seed(const VoxelGrid& intensity, const TracheaSeedParams& params) {
    const int nx = intensity.dims[0], ny = intensity.dims[1], nz = intensity.dims[2];
    const int slab = std::max(1, static_cast<int>(std::lround(nz * params.top_fraction)));
    const double pixel_area = intensity.spacing[0] * intensity.spacing[1];

    double best_area = 0.0;
    Index3 best_seed{-1, -1, -1};

    std::vector<int> labels(static_cast<std::size_t>(nx) * ny);
    std::vector<int> stack;
    for (int z = nz - 1; z >= nz - slab; --z) {
        std::fill(labels.begin(), labels.end(), 0);
        int next = 0;
        for (int y0 = 0; y0 < ny; ++y0)
            for (int x0 = 0; x0 < nx; ++x0) {
                const int id0 = x0 + nx * y0;
                if (labels[id0] || !(intensity.at(x0, y0, z) < params.air_threshold_hu))
                    continue;
                ++next;
                stack.clear();
                stack.push_back(id0);
                labels[id0] = next;
                std::size_t count = 0;
                double cx = 0, cy = 0;
                while (!stack.empty()) {
                    const int id = stack.back();
                    stack.pop_back();
                    const int x = id % nx, y = id / nx;
                    ++count;
                    cx += x;
                    cy += y;
                    const int dx4[4] = {1, -1, 0, 0}, dy4[4] = {0, 0, 1, -1};
                    for (int k = 0; k < 4; ++k) {
                        const int xx = x + dx4[k], yy = y + dy4[k];
                        if (xx < 0 || yy < 0 || xx >= nx || yy >= ny) continue;
                        const int jd = xx + nx * yy;
                        if (!labels[jd] && intensity.at(xx, yy, z) < params.air_threshold_hu) {
                            labels[jd] = next;
                            stack.push_back(jd);
                        }
                    }
                }
                const double area = static_cast<double>(count) * pixel_area;
                if (area < params.min_area_mm2 || area > params.max_area_mm2) continue;
                if (area > best_area) {
                    int sx = static_cast<int>(std::lround(cx / static_cast<double>(count)));
                    int sy = static_cast<int>(std::lround(cy / static_cast<double>(count)));
                    // Snap to a component pixel if the centroid misses it.
                    if (labels[sx + nx * sy] != next) {
                        double best_d = std::numeric_limits<double>::max();
                        for (int y = 0; y < ny; ++y)
                            for (int x = 0; x < nx; ++x)
                                if (labels[x + nx * y] == next) {
                                    const double d = (x - cx / count) * (x - cx / count) +
                                                     (y - cy / count) * (y - cy / count);
                                    if (d < best_d) {
                                        best_d = d;
                                        sx = x;
                                        sy = y;
                                    }
                                }
                    }
                    best_area = area;
                    best_seed = {sx, sy, z};
                }
            }
    }
    if (best_seed[0] < 0)
        throw DegenerateError("find_trachea_seed: no candidate component in top slices");
    return best_seed;
}

std::vector<WindowBox> sliding_windows(Index3 dims, Index3 window, double overlap) {
    for (int i = 0; i < 3; ++i)
        if (window[i] <= 0 || window[i] > dims[i])
            throw ConfigError("sliding_windows: window exceeds volume dims");
    if (overlap < 0.0 || overlap > 0.9)
        throw ConfigError("sliding_windows: overlap must be in [0, 0.9]");

    std::array<std::vector<int>, 3> starts;
    for (int i = 0; i < 3; ++i) {
        const int stride =
            std::max(1, static_cast<int>(std::lround(window[i] * (1.0 - overlap))));
        for (int s = 0;; s += stride) {
            if (s + window[i] >= dims[i]) {
                starts[i].push_back(dims[i] - window[i]);  // flush to boundary
                break;
            }
            starts[i].push_back(s);
        }
    }
    std::vector<WindowBox> out;
    out.reserve(starts[0].size() * starts[1].size() * starts[2].size());
    for (int sz : starts[2])
        for (int sy : starts[1])
            for (int sx : starts[0])
                out.push_back({{sx, sy, sz}, window});
    return out;
}

VoxelGrid sliding_window_infer(const VoxelGrid& intensity,
                               const std::vector<WindowBox>& windows,
                               const Predictor& predictor) {
    VoxelGrid sum(intensity.dims, intensity.spacing, intensity.origin, DType::F32);
    std::vector<float> hits(intensity.voxel_count(), 0.0f);

    for (const auto& w : windows) {
        Vec3 origin;
        for (int i = 0; i < 3; ++i)
            origin[i] = intensity.origin[i] + w.start[i] * intensity.spacing[i];
        VoxelGrid patch(w.size, intensity.spacing, origin, DType::F32);
        for (int z = 0; z < w.size[2]; ++z)
            for (int y = 0; y < w.size[1]; ++y)
                for (int x = 0; x < w.size[0]; ++x)
                    patch.at(x, y, z) =
                        intensity.at(w.start[0] + x, w.start[1] + y, w.start[2] + z);

        const VoxelGrid pred = predictor(patch);
        if (pred.dims != w.size)
            throw GeometryError("predictor output dims differ from input patch");
        for (int z = 0; z < w.size[2]; ++z)
            for (int y = 0; y < w.size[1]; ++y)
                for (int x = 0; x < w.size[0]; ++x) {
                    const float p = pred.at(x, y, z);
                    if (p < 0.0f || p > 1.0f)
                        throw GeometryError("predictor output outside [0,1]");
                    const std::size_t j = intensity.index(
                        w.start[0] + x, w.start[1] + y, w.start[2] + z);
                    sum.data[j] += p;
                    hits[j] += 1.0f;
                }
    }
    for (std::size_t i = 0; i < sum.data.size(); ++i) {
        if (hits[i] == 0.0f)
            throw GeometryError("sliding_window_infer: uncovered voxel");
        sum.data[i] /= hits[i];
    }
    return sum;
}

VoxelGrid sliding_window_infer(const VoxelGrid& intensity, Index3 window,
                               double overlap, const Predictor& predictor) {
    return sliding_window_infer(intensity,
                                sliding_windows(intensity.dims, window, overlap),
                                predictor);
}

Mask binarize(const VoxelGrid& prob, double threshold) {
    Mask out(prob.dims, prob.spacing, prob.origin);
    for (std::size_t i = 0; i < prob.data.size(); ++i)
        out.data[i] = prob.data[i] > threshold ? 1 : 0;
    return out;
}

Mask largest_component(const Mask& mask) {
    if (mask.foreground_count() == 0) return mask;
    auto cc = connected_components(mask, 26);
    Mask out(mask.dims, mask.spacing, mask.origin);
    for (std::size_t i = 0; i < mask.data.size(); ++i)
        out.data[i] = cc.labels.data[i] == 1 ? 1 : 0;
    return out;
}

}  // namespace airquant
