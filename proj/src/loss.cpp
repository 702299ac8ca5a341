#include "airquant/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace airquant {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1D squared-distance transform (lower envelope of parabolas), spacing s.
// f holds input costs, d receives min_p (s^2 (q-p)^2 + f(p)). Infinite
// entries (no foreground reached yet) contribute no parabola.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, double s2) {
    const int n = static_cast<int>(f.size());
    static thread_local std::vector<int> v;
    static thread_local std::vector<double> z;
    v.assign(n, 0);
    z.assign(n + 1, 0.0);

    int q0 = 0;
    while (q0 < n && f[q0] == kInf) ++q0;
    if (q0 == n) {
        std::fill(d.begin(), d.end(), kInf);
        return;
    }

    int k = 0;
    v[0] = q0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = q0 + 1; q < n; ++q) {
        if (f[q] == kInf) continue;
        while (true) {
            const int p = v[k];
            const double inter =
                ((f[q] + s2 * (static_cast<double>(q) * q)) -
                 (f[p] + s2 * (static_cast<double>(p) * p))) /
                (2.0 * s2 * (q - p));
            if (inter <= z[k]) {
                --k;  // k >= 1 here: z[0] = -inf and inter is finite
            } else {
                ++k;
                v[k] = q;
                z[k] = inter;
                z[k + 1] = kInf;
                break;
            }
        }
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[j + 1] < q) ++j;
        const int p = v[j];
        const double dq = static_cast<double>(q - p);
        d[q] = s2 * (dq * dq) + f[p];
    }
}

}  // namespace

EdtResult edt(const Mask& mask, Vec3 spacing) {
    const int nx = mask.dims[0], ny = mask.dims[1], nz = mask.dims[2];
    EdtResult result;
    result.distance = VoxelGrid(mask.dims, mask.spacing, mask.origin, DType::F32);

    if (mask.foreground_count() == 0) {
        result.no_foreground = true;
        std::fill(result.distance.data.begin(), result.distance.data.end(),
                  std::numeric_limits<float>::infinity());
        return result;
    }

    std::vector<double> cost(mask.voxel_count());
    for (std::size_t i = 0; i < cost.size(); ++i)
        cost[i] = mask.data[i] ? 0.0 : kInf;

    const double sx2 = spacing[0] * spacing[0];
    const double sy2 = spacing[1] * spacing[1];
    const double sz2 = spacing[2] * spacing[2];

    std::vector<double> line, out;
    // x pass
    line.resize(nx);
    out.resize(nx);
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) line[x] = cost[mask.index(x, y, z)];
            edt_1d(line, out, sx2);
            for (int x = 0; x < nx; ++x) cost[mask.index(x, y, z)] = out[x];
        }
    // y pass
    line.resize(ny);
    out.resize(ny);
    for (int z = 0; z < nz; ++z)
        for (int x = 0; x < nx; ++x) {
            for (int y = 0; y < ny; ++y) line[y] = cost[mask.index(x, y, z)];
            edt_1d(line, out, sy2);
            for (int y = 0; y < ny; ++y) cost[mask.index(x, y, z)] = out[y];
        }
    // z pass
    line.resize(nz);
    out.resize(nz);
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
            for (int z = 0; z < nz; ++z) line[z] = cost[mask.index(x, y, z)];
            edt_1d(line, out, sz2);
            for (int z = 0; z < nz; ++z) cost[mask.index(x, y, z)] = out[z];
        }

    for (std::size_t i = 0; i < cost.size(); ++i)
        result.distance.data[i] = static_cast<float>(std::sqrt(cost[i]));
    return result;
}

Mask boundary_set(const Mask& mask) {
    const int nx = mask.dims[0], ny = mask.dims[1], nz = mask.dims[2];
    Mask b(mask.dims, mask.spacing, mask.origin);
    const int dx[6] = {1, -1, 0, 0, 0, 0};
    const int dy[6] = {0, 0, 1, -1, 0, 0};
    const int dz[6] = {0, 0, 0, 0, 1, -1};
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                const std::uint8_t v = mask.at(x, y, z);
                bool mixed = false;
                for (int k = 0; k < 6 && !mixed; ++k) {
                    const int xx = x + dx[k], yy = y + dy[k], zz = z + dz[k];
                    if (xx < 0 || yy < 0 || zz < 0 || xx >= nx || yy >= ny || zz >= nz)
                        continue;
                    if (mask.at(xx, yy, zz) != v) mixed = true;
                }
                b.at(x, y, z) = mixed ? 1 : 0;
            }
    return b;
}

VoxelGrid boundary_weights(const Mask& gt, double alpha, double sigma) {
    if (alpha < 0) throw ConfigError("boundary_weights: alpha must be >= 0");
    if (sigma <= 0) throw ConfigError("boundary_weights: sigma must be > 0");

    VoxelGrid w(gt.dims, gt.spacing, gt.origin, DType::F32);
    if (gt.foreground_count() == 0 || alpha == 0.0) {
        std::fill(w.data.begin(), w.data.end(), 1.0f);
        return w;
    }
    const Mask b = boundary_set(gt);
    const EdtResult d = edt(b, gt.spacing);
    if (d.no_foreground) {  // mask fills whole volume: no boundary
        std::fill(w.data.begin(), w.data.end(), 1.0f);
        return w;
    }
    const double two_sigma2 = 2.0 * sigma * sigma;
    for (std::size_t i = 0; i < w.data.size(); ++i) {
        const double dist = d.distance.data[i];
        w.data[i] = static_cast<float>(1.0 + alpha * std::exp(-dist * dist / two_sigma2));
    }
    return w;
}

namespace {

void check_loss_inputs(const VoxelGrid& p, const Mask& g, const VoxelGrid& w) {
    if (p.dims != g.dims || p.dims != w.dims)
        throw GeometryError("loss: dims mismatch between p, g, w");
}

}  // namespace

LossPart weighted_dice_loss(const VoxelGrid& p, const Mask& g, const VoxelGrid& w,
                            double eps) {
    check_loss_inputs(p, g, w);
    double wpg = 0.0, wp = 0.0, wg = 0.0;
    for (std::size_t i = 0; i < p.data.size(); ++i) {
        const double wi = w.data[i];
        const double pi = p.data[i];
        const double gi = g.data[i];
        wpg += wi * pi * gi;
        wp += wi * pi;
        wg += wi * gi;
    }
    const double num = 2.0 * wpg + eps;
    const double den = wp + wg + eps;

    LossPart out;
    out.value = 1.0 - num / den;
    out.gradient = VoxelGrid(p.dims, p.spacing, p.origin, DType::F32);
    const double den2 = den * den;
    for (std::size_t i = 0; i < p.data.size(); ++i) {
        const double wi = w.data[i];
        const double gi = g.data[i];
        out.gradient.data[i] = static_cast<float>(wi * (num - 2.0 * gi * den) / den2);
    }
    return out;
}

LossPart weighted_ce_loss(const VoxelGrid& p, const Mask& g, const VoxelGrid& w,
                          double clamp_eps) {
    check_loss_inputs(p, g, w);
    if (clamp_eps <= 0 || clamp_eps >= 0.5)
        throw ConfigError("weighted_ce_loss: clamp_eps out of (0, 0.5)");

    double wsum = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < p.data.size(); ++i) wsum += w.data[i];
    if (wsum <= 0) throw DegenerateError("weighted_ce_loss: zero total weight");

    LossPart out;
    out.gradient = VoxelGrid(p.dims, p.spacing, p.origin, DType::F32);
    for (std::size_t i = 0; i < p.data.size(); ++i) {
        const double wi = w.data[i];
        const double gi = g.data[i];
        const double pi = p.data[i];
        const double pc = std::clamp(pi, clamp_eps, 1.0 - clamp_eps);
        acc += wi * (gi * std::log(pc) + (1.0 - gi) * std::log(1.0 - pc));
        // clamp saturates the gradient outside (eps, 1-eps)
        double grad = 0.0;
        if (pi > clamp_eps && pi < 1.0 - clamp_eps)
            grad = -wi * (gi / pc - (1.0 - gi) / (1.0 - pc)) / wsum;
        out.gradient.data[i] = static_cast<float>(grad);
    }
    out.value = -acc / wsum;
    return out;
}

LossValue hybrid_loss(const VoxelGrid& p, const Mask& g, const VoxelGrid& w,
                      const LossParams& params) {
    const LossPart dice = weighted_dice_loss(p, g, w, params.dice_eps);
    const LossPart ce = weighted_ce_loss(p, g, w, params.ce_clamp_eps);

    LossValue out;
    out.dice_term = dice.value;
    out.ce_term = ce.value;
    out.total = 0.5 * dice.value + 0.5 * ce.value;
    out.gradient = VoxelGrid(p.dims, p.spacing, p.origin, DType::F32);
    for (std::size_t i = 0; i < p.data.size(); ++i)
        out.gradient.data[i] =
            0.5f * dice.gradient.data[i] + 0.5f * ce.gradient.data[i];
    return out;
}

}  // namespace airquant
