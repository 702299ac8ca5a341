#include "airquant/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace airquant {

double dice(const Mask& pred, const Mask& gt) {
    if (!pred.same_geometry(gt))
        throw GeometryError("dice: pred and gt geometry differ");
    std::size_t inter = 0, np = 0, ng = 0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const bool p = pred.data[i] != 0;
        const bool g = gt.data[i] != 0;
        np += p;
        ng += g;
        inter += (p && g);
    }
    if (np + ng == 0) return 1.0;  // empty vs empty
    return 2.0 * static_cast<double>(inter) / static_cast<double>(np + ng);
}

double centerline_recall(const std::vector<Centerline>& gt_centerlines,
                         const Mask& pred, double tolerance_mm) {
    std::size_t total = 0;
    for (const auto& cl : gt_centerlines) total += cl.points.size();
    if (total == 0) throw DegenerateError("centerline_recall: no centerline points");

    const int nx = pred.dims[0], ny = pred.dims[1], nz = pred.dims[2];
    const Vec3& sp = pred.spacing;
    const Vec3& org = pred.origin;
    // voxel radius to search around each point
    const int rx = static_cast<int>(std::ceil(tolerance_mm / sp[0]));
    const int ry = static_cast<int>(std::ceil(tolerance_mm / sp[1]));
    const int rz = static_cast<int>(std::ceil(tolerance_mm / sp[2]));
    const double tol2 = tolerance_mm * tolerance_mm;

    std::size_t hit = 0;
    for (const auto& cl : gt_centerlines) {
        for (const auto& pt : cl.points) {
            // containing voxel: nearest center
            const int cx = static_cast<int>(std::lround((pt[0] - org[0]) / sp[0]));
            const int cy = static_cast<int>(std::lround((pt[1] - org[1]) / sp[1]));
            const int cz = static_cast<int>(std::lround((pt[2] - org[2]) / sp[2]));
            bool found = cx >= 0 && cy >= 0 && cz >= 0 && cx < nx && cy < ny &&
                         cz < nz && pred.at(cx, cy, cz) != 0;
            if (tolerance_mm > 0.0) {
                // a positive tolerance widens the containing-voxel rule
                for (int dz = -rz; dz <= rz && !found; ++dz)
                    for (int dy = -ry; dy <= ry && !found; ++dy)
                        for (int dx = -rx; dx <= rx && !found; ++dx) {
                            const int x = cx + dx, y = cy + dy, z = cz + dz;
                            if (x < 0 || y < 0 || z < 0 || x >= nx || y >= ny || z >= nz)
                                continue;
                            if (!pred.at(x, y, z)) continue;
                            const double ex = org[0] + x * sp[0] - pt[0];
                            const double ey = org[1] + y * sp[1] - pt[1];
                            const double ez = org[2] + z * sp[2] - pt[2];
                            if (ex * ex + ey * ey + ez * ez <= tol2) found = true;
                        }
            }
            hit += found;
        }
    }
    return static_cast<double>(hit) / static_cast<double>(total);
}

double mask_volume_mm3(const Mask& mask) {
    return static_cast<double>(mask.foreground_count()) * mask.voxel_volume_mm3();
}

EvalReport evaluate_segmentation(const Mask& pred, const Mask& gt,
                                 const std::vector<Centerline>& gt_centerlines,
                                 double tolerance_mm) {
    EvalReport r;
    r.dice = dice(pred, gt);
    r.cl_recall = centerline_recall(gt_centerlines, pred, tolerance_mm);
    r.gt_volume_mm3 = mask_volume_mm3(gt);
    r.pred_volume_mm3 = mask_volume_mm3(pred);
    return r;
}

}  // namespace airquant
