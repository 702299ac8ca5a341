#include "airquant/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace airquant {

namespace {

constexpr double kPi = 3.14159265358979323846;

double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0]};
}
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
Vec3 normalized(const Vec3& a) {
    const double n = norm(a);
    return {a[0] / n, a[1] / n, a[2] / n};
}
Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
Vec3 add(const Vec3& a, const Vec3& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

// Rodrigues rotation of v around unit axis by angle.
Vec3 rotate(const Vec3& v, const Vec3& axis, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    const Vec3 kxv = cross(axis, v);
    const double kdv = dot(axis, v);
    return {v[0] * c + kxv[0] * s + axis[0] * kdv * (1 - c),
            v[1] * c + kxv[1] * s + axis[1] * kdv * (1 - c),
            v[2] * c + kxv[2] * s + axis[2] * kdv * (1 - c)};
}

// Uniform in [-1, 1), identical across platforms (mt19937_64 is pinned by
// the standard; distributions are not).
double uniform_pm1(std::mt19937_64& rng) {
    return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
}

}  // namespace

TreeSpec generate_tree(const TreeParams& params) {
    if (params.depth < 1) throw ConfigError("generate_tree: depth must be >= 1");
    if (!(params.ratio > 0.0 && params.ratio < 1.0))
        throw ConfigError("generate_tree: ratio must be in (0, 1)");
    if (!(params.angle_deg > 0.0 && params.angle_deg < 90.0))
        throw ConfigError("generate_tree: angle must be in (0, 90) degrees");
    if (params.root_radius_mm <= 0 || params.root_length_mm <= 0)
        throw ConfigError("generate_tree: root radius and length must be positive");
    const double deepest_radius =
        params.root_radius_mm * std::pow(params.ratio, params.depth - 1);
    if (deepest_radius < params.min_radius_mm)
        throw ConfigError(
            "generate_tree: requested depth drives branch radius below the minimum (" +
            std::to_string(deepest_radius) + " < " +
            std::to_string(params.min_radius_mm) + " mm)");

    const int seg_gen =
        params.segmental_generation < 0 ? params.depth - 1 : params.segmental_generation;
    if (seg_gen >= params.depth && params.depth > 1)
        throw ConfigError("generate_tree: segmental generation beyond tree depth");

    std::mt19937_64 rng(params.seed);
    const double theta = params.angle_deg * kPi / 180.0;
    const double max_tilt_cos = std::cos(params.max_tilt_deg * kPi / 180.0);

    TreeSpec tree;
    tree.half_angle_deg = params.angle_deg;
    tree.ratio = params.ratio;

    std::vector<Vec3> normals;  // branching plane normal per branch

    BranchSpec root;
    root.id = 0;
    root.parent = -1;
    root.generation = 0;
    root.region = 0;
    root.start = {0.0, 0.0, 0.0};
    root.direction = {0.0, 0.0, -1.0};
    root.length_mm = params.root_length_mm;
    root.radius_mm = params.root_radius_mm;
    tree.branches.push_back(root);
    normals.push_back({1.0, 0.0, 0.0});

    std::vector<int> frontier{0};
    for (int g = 1; g < params.depth; ++g) {
        std::vector<int> next;
        next.reserve(frontier.size() * 2);
        for (int bi : frontier) {
            const BranchSpec b = tree.branches[bi];
            const Vec3 n = normals[bi];
            const Vec3 end = tree.branch_end(b);
            for (int sgn : {+1, -1}) {
                const double ang =
                    theta * (1.0 + params.jitter * uniform_pm1(rng));
                Vec3 dir = rotate(b.direction, n, sgn * ang);
                // Keep growth generally downward.
                if (-dir[2] < max_tilt_cos) {
                    const double w = 0.5;
                    dir = normalized(add(scale(dir, 1.0 - w), {0.0, 0.0, -w}));
                }
                Vec3 child_normal = cross(dir, n);
                if (norm(child_normal) < 1e-9)
                    child_normal = cross(dir, Vec3{0.0, 1.0, 0.0});
                child_normal = normalized(child_normal);

                BranchSpec c;
                c.id = static_cast<int>(tree.branches.size());
                c.parent = bi;
                c.generation = g;
                c.region = 0;
                c.start = end;
                c.direction = normalized(dir);
                c.length_mm =
                    b.length_mm * params.ratio * (1.0 + params.jitter * uniform_pm1(rng));
                c.radius_mm = b.radius_mm * params.ratio;
                tree.branches.push_back(c);
                normals.push_back(child_normal);
                next.push_back(c.id);
            }
        }
        frontier = std::move(next);
    }

    // Segment codes: subtrees rooted at the segmental generation, contiguous
    // groups over at most 18 codes, inherited by descendants.
    if (params.depth > 1 && seg_gen >= 1) {
        std::vector<int> roots;
        for (const auto& b : tree.branches)
            if (b.generation == seg_gen) roots.push_back(b.id);
        const std::size_t nsub = roots.size();
        const std::size_t ncodes = std::min<std::size_t>(18, nsub);
        for (std::size_t k = 0; k < nsub; ++k) {
            const int code = static_cast<int>(k * ncodes / nsub) + 1;
            std::vector<int> stack{roots[k]};
            while (!stack.empty()) {
                const int j = stack.back();
                stack.pop_back();
                tree.branches[j].region = code;
                for (const auto& c : tree.branches)
                    if (c.parent == j) stack.push_back(c.id);
            }
        }
    }
    return tree;
}

double analytic_branch_volume_mm3(const BranchSpec& branch) {
    return kPi * branch.radius_mm * branch.radius_mm * branch.length_mm;
}

RasterResult rasterize_tree_labeled(const TreeSpec& tree, const GridGeometry& geom) {
    const int nx = geom.dims[0], ny = geom.dims[1], nz = geom.dims[2];
    if (nx <= 0 || ny <= 0 || nz <= 0)
        throw GeometryError("rasterize_tree: empty geometry");
    RasterResult out;
    out.mask = Mask(geom.dims, geom.spacing, geom.origin);
    out.region_labels = LabelMap(geom.dims, geom.spacing, geom.origin);
    out.claim.assign(out.mask.voxel_count(), -1);

    std::vector<float> best(out.mask.voxel_count(),
                            std::numeric_limits<float>::infinity());

    for (const auto& b : tree.branches) {
        const Vec3 end = tree.branch_end(b);
        Vec3 lo, hi;
        for (int i = 0; i < 3; ++i) {
            lo[i] = std::min(b.start[i], end[i]) - b.radius_mm;
            hi[i] = std::max(b.start[i], end[i]) + b.radius_mm;
        }
        Index3 i0, i1;
        bool outside = false;
        for (int i = 0; i < 3; ++i) {
            // half-voxel slack: the grid covers centers, not cell faces
            if (lo[i] < geom.origin[i] - 0.5 * geom.spacing[i] ||
                hi[i] > geom.origin[i] + (geom.dims[i] - 0.5) * geom.spacing[i])
                out.clipped = true;
            const int a = static_cast<int>(std::floor((lo[i] - geom.origin[i]) / geom.spacing[i]));
            const int bb = static_cast<int>(std::ceil((hi[i] - geom.origin[i]) / geom.spacing[i]));
            i0[i] = std::max(0, a);
            i1[i] = std::min(geom.dims[i] - 1, bb);
            if (i0[i] > i1[i]) outside = true;
        }
        if (outside) continue;

        for (int z = i0[2]; z <= i1[2]; ++z)
            for (int y = i0[1]; y <= i1[1]; ++y)
                for (int x = i0[0]; x <= i1[0]; ++x) {
                    const Vec3 p = {geom.origin[0] + x * geom.spacing[0] - b.start[0],
                                    geom.origin[1] + y * geom.spacing[1] - b.start[1],
                                    geom.origin[2] + z * geom.spacing[2] - b.start[2]};
                    double t = dot(p, b.direction);
                    t = std::clamp(t, 0.0, b.length_mm);
                    const Vec3 q = {p[0] - t * b.direction[0],
                                    p[1] - t * b.direction[1],
                                    p[2] - t * b.direction[2]};
                    const double dist = norm(q);
                    const float signed_dist = static_cast<float>(dist - b.radius_mm);
                    const std::size_t idx = out.mask.index(x, y, z);
                    if (signed_dist < best[idx]) {
                        best[idx] = signed_dist;
                        out.claim[idx] = b.id;
                    }
                    if (dist <= b.radius_mm) out.mask.data[idx] = 1;
                }
    }
    for (std::size_t i = 0; i < out.mask.data.size(); ++i) {
        if (out.mask.data[i])
            out.region_labels.data[i] =
                static_cast<std::int16_t>(tree.branches[out.claim[i]].region);
        else
            out.claim[i] = -1;  // only foreground voxels keep a claim
    }
    return out;
}

Mask rasterize_tree(const TreeSpec& tree, const GridGeometry& geom, bool* clipped) {
    RasterResult r = rasterize_tree_labeled(tree, geom);
    if (clipped) *clipped = r.clipped;
    return std::move(r.mask);
}

VoxelGrid synthesize_intensity(const Mask& airway, const Mask& lung,
                               double noise_sd_hu, std::uint64_t seed) {
    if (!airway.same_geometry(lung))
        throw GeometryError("synthesize_intensity: airway/lung geometry mismatch");

    const int nx = airway.dims[0], ny = airway.dims[1], nz = airway.dims[2];
    VoxelGrid hu(airway.dims, airway.spacing, airway.origin, DType::F32);

    // Wall: 26-neighborhood shell so the lumen is sealed against diagonal
    // leaks during 26-connected region growing.
    std::vector<std::uint8_t> wall(airway.voxel_count(), 0);
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                if (airway.at(x, y, z)) continue;
                bool near = false;
                for (int dz = -1; dz <= 1 && !near; ++dz)
                    for (int dy = -1; dy <= 1 && !near; ++dy)
                        for (int dx = -1; dx <= 1 && !near; ++dx) {
                            const int xx = x + dx, yy = y + dy, zz = z + dz;
                            if (xx < 0 || yy < 0 || zz < 0 || xx >= nx || yy >= ny ||
                                zz >= nz)
                                continue;
                            if (airway.at(xx, yy, zz)) near = true;
                        }
                wall[airway.index(x, y, z)] = near ? 1 : 0;
            }

    for (std::size_t i = 0; i < hu.data.size(); ++i) {
        if (airway.data[i]) hu.data[i] = -1000.0f;
        else if (wall[i]) hu.data[i] = -100.0f;
        else if (lung.data[i]) hu.data[i] = -850.0f;
        else hu.data[i] = 0.0f;
    }

    if (noise_sd_hu > 0.0) {
        std::mt19937_64 rng(seed);
        // Box-Muller on raw mt19937_64 output for cross-platform determinism.
        auto next_uniform = [&rng]() {
            return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
        };
        const std::size_t n = hu.data.size();
        for (std::size_t i = 0; i < n; i += 2) {
            const double u1 = next_uniform(), u2 = next_uniform();
            const double r = std::sqrt(-2.0 * std::log(u1));
            hu.data[i] += static_cast<float>(noise_sd_hu * r * std::cos(2.0 * kPi * u2));
            if (i + 1 < n)
                hu.data[i + 1] +=
                    static_cast<float>(noise_sd_hu * r * std::sin(2.0 * kPi * u2));
        }
    }
    return hu;
}

std::vector<Centerline> emit_centerlines(const TreeSpec& tree, double step_mm) {
    if (step_mm <= 0) throw ConfigError("emit_centerlines: step must be positive");
    std::vector<Centerline> out;
    out.reserve(tree.branches.size());
    for (const auto& b : tree.branches) {
        Centerline cl;
        cl.branch_id = b.id;
        cl.region = b.region;
        const int npts =
            static_cast<int>(std::ceil(b.length_mm / step_mm - 1e-12)) + 1;
        for (int k = 0; k < npts; ++k) {
            const double t =
                b.length_mm * static_cast<double>(k) / static_cast<double>(npts - 1);
            cl.points.push_back(add(b.start, scale(b.direction, t)));
        }
        out.push_back(std::move(cl));
    }
    return out;
}

namespace {

struct Ellipsoid {
    Vec3 center;
    Vec3 semi;
};

Ellipsoid side_ellipsoid(const TreeSpec& tree, const std::vector<int>& branch_ids,
                         double inflation, double apex_z) {
    Vec3 lo = {1e30, 1e30, 1e30}, hi = {-1e30, -1e30, -1e30};
    for (int id : branch_ids) {
        const auto& b = tree.branches[id];
        const Vec3 end = tree.branch_end(b);
        for (int i = 0; i < 3; ++i) {
            lo[i] = std::min({lo[i], b.start[i] - b.radius_mm, end[i] - b.radius_mm});
            hi[i] = std::max({hi[i], b.start[i] + b.radius_mm, end[i] + b.radius_mm});
        }
    }
    hi[2] = std::max(hi[2], apex_z);  // lungs flank the trachea up to its start
    Ellipsoid e;
    for (int i = 0; i < 3; ++i) {
        e.center[i] = 0.5 * (lo[i] + hi[i]);
        e.semi[i] = std::max(1e-3, 0.5 * (hi[i] - lo[i]) * inflation);
    }
    return e;
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& dir,
                              double len) {
    const Vec3 ap = {p[0] - a[0], p[1] - a[1], p[2] - a[2]};
    const double t = std::clamp(dot(ap, dir), 0.0, len);
    const Vec3 q = {ap[0] - t * dir[0], ap[1] - t * dir[1], ap[2] - t * dir[2]};
    return norm(q);
}

}  // namespace

PhantomOutput build_phantom(const PhantomConfig& config) {
    PhantomOutput out;
    TreeParams tp = config.tree;

    // Auto geometry: spacing at a third of the finest branch radius.
    const double rmin = tp.root_radius_mm * std::pow(tp.ratio, tp.depth - 1);
    Vec3 spacing = config.spacing;
    if (spacing[0] <= 0 || spacing[1] <= 0 || spacing[2] <= 0) {
        const double s = rmin / 3.0;
        spacing = {s, s, s};
    }
    Index3 dims = config.dims;
    if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0)
        dims = tp.depth <= 5 ? Index3{96, 96, 96} : Index3{144, 144, 144};
    // Honor the radius floor: sub-voxel branches rasterize to noise.
    const double floor_radius =
        0.5 * std::max({spacing[0], spacing[1], spacing[2]});
    if (tp.min_radius_mm < floor_radius) tp.min_radius_mm = floor_radius;

    out.tree = generate_tree(tp);

    // Place the tree centered in x/y with the trachea start near the top.
    Vec3 lo = {1e30, 1e30, 1e30}, hi = {-1e30, -1e30, -1e30};
    for (const auto& b : out.tree.branches) {
        const Vec3 end = out.tree.branch_end(b);
        for (int i = 0; i < 3; ++i) {
            lo[i] = std::min({lo[i], b.start[i] - b.radius_mm, end[i] - b.radius_mm});
            hi[i] = std::max({hi[i], b.start[i] + b.radius_mm, end[i] + b.radius_mm});
        }
    }
    GridGeometry geom;
    geom.dims = dims;
    geom.spacing = spacing;
    const double top_margin = 2.0 * spacing[2];
    geom.origin = {
        0.5 * (lo[0] + hi[0]) - 0.5 * (dims[0] - 1) * spacing[0],
        0.5 * (lo[1] + hi[1]) - 0.5 * (dims[1] - 1) * spacing[1],
        hi[2] + top_margin - (dims[2] - 1) * spacing[2],
    };
    out.geometry = geom;

    RasterResult raster = rasterize_tree_labeled(out.tree, geom);
    out.clipped = raster.clipped;
    out.airway_gt = std::move(raster.mask);

    // Lungs: one inflated ellipsoid per main-bronchus subtree, minus a hilum
    // corridor around generations 0-1, plus the exact intra-lung airway.
    std::vector<int> left_ids, right_ids;
    for (const auto& b : out.tree.branches) {
        if (b.generation < 2) continue;
        // walk up to the generation-1 ancestor
        int cur = b.id;
        while (out.tree.branches[cur].generation > 1)
            cur = out.tree.branches[cur].parent;
        (cur == 1 ? left_ids : right_ids).push_back(b.id);
    }
    const double apex_z = out.tree.branches[0].start[2];
    std::vector<Ellipsoid> lungs;
    if (!left_ids.empty())
        lungs.push_back(side_ellipsoid(out.tree, left_ids, config.lung_inflation, apex_z));
    if (!right_ids.empty())
        lungs.push_back(side_ellipsoid(out.tree, right_ids, config.lung_inflation, apex_z));

    std::vector<const BranchSpec*> hilum_branches;
    for (const auto& b : out.tree.branches)
        if (b.generation <= 1) hilum_branches.push_back(&b);
    const double corridor_margin =
        std::max(1.5, 2.0 * std::min({spacing[0], spacing[1], spacing[2]}));

    out.lung_mask = Mask(dims, spacing, geom.origin);
    const int nx = dims[0], ny = dims[1], nz = dims[2];
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                const Vec3 p = out.lung_mask.position(x, y, z);
                bool inside = false;
                for (const auto& e : lungs) {
                    const double u = (p[0] - e.center[0]) / e.semi[0];
                    const double v = (p[1] - e.center[1]) / e.semi[1];
                    const double w = (p[2] - e.center[2]) / e.semi[2];
                    if (u * u + v * v + w * w <= 1.0) {
                        inside = true;
                        break;
                    }
                }
                if (!inside) continue;
                bool in_corridor = false;
                for (const auto* b : hilum_branches) {
                    if (point_segment_distance(p, b->start, b->direction, b->length_mm) <=
                        b->radius_mm + corridor_margin) {
                        in_corridor = true;
                        break;
                    }
                }
                if (!in_corridor) out.lung_mask.at(x, y, z) = 1;
            }
    // Intra-lung airway voxels (claimed by generation >= 2) always belong.
    for (std::size_t i = 0; i < out.airway_gt.data.size(); ++i) {
        if (!out.airway_gt.data[i]) continue;
        const int claim = raster.claim[i];
        if (out.tree.branches[claim].generation >= 2) out.lung_mask.data[i] = 1;
        else out.lung_mask.data[i] = 0;  // hilum is excluded from the lung mask
    }

    // Region labels: airway voxels take the claiming branch's code; other
    // lung voxels take the code of the nearest leaf endpoint.
    out.region_labels = LabelMap(dims, spacing, geom.origin);
    std::vector<std::pair<Vec3, int>> leaf_ends;
    const int last_gen = tp.depth - 1;
    for (const auto& b : out.tree.branches)
        if (b.generation == last_gen)
            leaf_ends.emplace_back(out.tree.branch_end(b), b.region);
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                const std::size_t i = out.region_labels.index(x, y, z);
                if (out.airway_gt.data[i]) {
                    out.region_labels.data[i] = raster.region_labels.data[i];
                } else if (out.lung_mask.data[i]) {
                    const Vec3 p = out.lung_mask.position(x, y, z);
                    double bestd = std::numeric_limits<double>::max();
                    int bestc = 0;
                    for (const auto& [end, code] : leaf_ends) {
                        const double dx = p[0] - end[0], dy = p[1] - end[1],
                                     dz = p[2] - end[2];
                        const double d = dx * dx + dy * dy + dz * dz;
                        if (d < bestd) {
                            bestd = d;
                            bestc = code;
                        }
                    }
                    out.region_labels.data[i] = static_cast<std::int16_t>(bestc);
                }
            }

    out.intensity = synthesize_intensity(out.airway_gt, out.lung_mask,
                                         config.noise_sd_hu, tp.seed);

    const double step = config.centerline_step_mm > 0
                            ? config.centerline_step_mm
                            : std::min({spacing[0], spacing[1], spacing[2]});
    out.centerlines = emit_centerlines(out.tree, step);

    for (const auto& b : out.tree.branches)
        out.branch_table.push_back({b.id, b.region, b.radius_mm, b.length_mm,
                                    analytic_branch_volume_mm3(b)});
    return out;
}

}  // namespace airquant
