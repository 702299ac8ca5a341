#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "airquant/loss.hpp"
#include "airquant/metrics.hpp"
#include "airquant/nifti.hpp"
#include "airquant/phantom.hpp"
#include "airquant/quant.hpp"
#include "airquant/segment.hpp"
#include "airquant/stats.hpp"
#include "airquant/volume_ops.hpp"

namespace py = pybind11;
using namespace airquant;

namespace {

// numpy array (x-fastest => F-order triple) <-> VoxelGrid/Mask
py::array_t<float> grid_array(const VoxelGrid& g) {
    py::array_t<float> arr({g.dims[0], g.dims[1], g.dims[2]},
                           {sizeof(float), sizeof(float) * g.dims[0],
                            sizeof(float) * g.dims[0] * g.dims[1]});
    std::memcpy(arr.mutable_data(), g.data.data(), g.data.size() * sizeof(float));
    return arr;
}

VoxelGrid grid_from(py::array_t<float, py::array::f_style | py::array::forcecast> arr,
                    Vec3 spacing, Vec3 origin) {
    if (arr.ndim() != 3) throw GeometryError("expected a 3D array");
    VoxelGrid g({static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)),
                 static_cast<int>(arr.shape(2))},
                spacing, origin, DType::F32);
    std::memcpy(g.data.data(), arr.data(), g.data.size() * sizeof(float));
    return g;
}

Mask mask_from(py::array_t<float, py::array::f_style | py::array::forcecast> arr,
               Vec3 spacing, Vec3 origin) {
    return to_mask(grid_from(arr, spacing, origin));
}

py::array_t<float> mask_array(const Mask& m) { return grid_array(mask_to_grid(m)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "airway quantification core (phantoms, segmentation, metrics, stats)";

    py::register_exception<ConfigError>(m, "AirquantConfigError");
    py::register_exception<IoError>(m, "AirquantIoError");
    py::register_exception<GeometryError>(m, "AirquantGeometryError");
    py::register_exception<DegenerateError>(m, "AirquantDegenerateError");

    py::class_<VoxelGrid>(m, "VoxelGrid")
        .def_readonly("dims", &VoxelGrid::dims)
        .def_readonly("spacing", &VoxelGrid::spacing)
        .def_readonly("origin", &VoxelGrid::origin)
        .def("to_numpy", &grid_array)
        .def("voxel_volume_mm3", &VoxelGrid::voxel_volume_mm3);
    py::class_<Mask>(m, "Mask")
        .def_readonly("dims", &Mask::dims)
        .def_readonly("spacing", &Mask::spacing)
        .def_readonly("origin", &Mask::origin)
        .def("to_numpy", &mask_array)
        .def("foreground_count", &Mask::foreground_count);

    m.def("grid_from_numpy", &grid_from, py::arg("array"),
          py::arg("spacing") = Vec3{1, 1, 1}, py::arg("origin") = Vec3{0, 0, 0});
    m.def("mask_from_numpy", &mask_from, py::arg("array"),
          py::arg("spacing") = Vec3{1, 1, 1}, py::arg("origin") = Vec3{0, 0, 0});

    m.def("read_nifti", &read_nifti, py::arg("path"));
    m.def("write_nifti", py::overload_cast<const VoxelGrid&, const std::string&>(&write_nifti),
          py::arg("grid"), py::arg("path"));

    m.def(
        "clip_normalize",
        [](const VoxelGrid& g, double lo, double hi) { return clip_normalize(g, lo, hi); },
        py::arg("grid"), py::arg("lo_hu") = -1000.0, py::arg("hi_hu") = 400.0);
    m.def("resample_trilinear", &resample_trilinear, py::arg("grid"), py::arg("dims"));

    m.def("dice", &dice, py::arg("pred"), py::arg("gt"));
    m.def("mask_volume_mm3", &mask_volume_mm3, py::arg("mask"));

    m.def("bsa_dubois", &bsa_dubois, py::arg("weight_kg"), py::arg("height_cm"));
    m.def("normalize_by_bsa", &normalize_by_bsa, py::arg("volume_mm3"), py::arg("bsa_m2"));

    py::class_<TestResult>(m, "TestResult")
        .def_readonly("statistic", &TestResult::statistic)
        .def_readonly("df", &TestResult::df)
        .def_readonly("p", &TestResult::p)
        .def_readonly("method", &TestResult::method)
        .def_readonly("degenerate", &TestResult::degenerate);

    m.def(
        "t_test_summary",
        [](std::size_t n0, double mean0, double sd0, std::size_t n1, double mean1,
           double sd1) { return t_test_summary({n0, mean0, sd0}, {n1, mean1, sd1}); },
        py::arg("n0"), py::arg("mean0"), py::arg("sd0"), py::arg("n1"), py::arg("mean1"),
        py::arg("sd1"));
    m.def(
        "t_test_raw",
        [](const std::vector<double>& a, const std::vector<double>& b, bool welch) {
            return t_test_raw(a, b, welch ? TVariant::Welch : TVariant::Pooled);
        },
        py::arg("a"), py::arg("b"), py::arg("welch") = false);
    m.def(
        "fisher_exact_2x2",
        [](long long a, long long b, long long c, long long d) {
            const FisherResult r = fisher_exact_2x2(a, b, c, d);
            return py::make_tuple(r.one_sided, r.two_sided);
        },
        py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"));
    m.def("shapiro_wilk", &shapiro_wilk, py::arg("samples"));

    m.def(
        "segment_lung_coarse",
        [](const VoxelGrid& hu, double threshold) {
            LungParams p;
            p.threshold_hu = threshold;
            return segment_lung_coarse(hu, p);
        },
        py::arg("intensity"), py::arg("threshold_hu") = -500.0);
    m.def(
        "region_grow_airway",
        [](const VoxelGrid& hu, Index3 seed, double t_start, double t_max, double t_step,
           double explosion_ratio) {
            RegionGrowParams p{t_start, t_max, t_step, explosion_ratio};
            auto [mask, trace] = region_grow_airway(hu, seed, p);
            return py::make_tuple(mask, trace.chosen_threshold_hu, trace.leakage);
        },
        py::arg("intensity"), py::arg("seed"), py::arg("t_start_hu") = -950.0,
        py::arg("t_max_hu") = -300.0, py::arg("t_step_hu") = 50.0,
        py::arg("explosion_ratio") = 1.5);
    m.def("find_trachea_seed",
          [](const VoxelGrid& hu) { return find_trachea_seed(hu); },
          py::arg("intensity"));
    m.def("binarize", &binarize, py::arg("prob"), py::arg("threshold") = 0.5);

    py::class_<EdtResult>(m, "EdtResult")
        .def_readonly("no_foreground", &EdtResult::no_foreground)
        .def_property_readonly("distance",
                               [](const EdtResult& r) { return grid_array(r.distance); });
    m.def("edt", [](const Mask& m_) { return edt(m_); }, py::arg("mask"));
    m.def("boundary_weights",
          [](const Mask& gt, double alpha, double sigma) {
              return grid_array(boundary_weights(gt, alpha, sigma));
          },
          py::arg("gt"), py::arg("alpha") = 2.0, py::arg("sigma_mm") = 2.0);
    m.def(
        "hybrid_loss",
        [](const VoxelGrid& p, const Mask& g, py::object weights) {
            VoxelGrid w = weights.is_none()
                              ? boundary_weights(g, 2.0, 2.0 * std::max({g.spacing[0],
                                                                         g.spacing[1],
                                                                         g.spacing[2]}))
                              : weights.cast<VoxelGrid>();
            const LossValue v = hybrid_loss(p, g, w);
            return py::make_tuple(v.total, v.dice_term, v.ce_term, grid_array(v.gradient));
        },
        py::arg("prob"), py::arg("gt"), py::arg("weights") = py::none());

    py::class_<PhantomOutput>(m, "PhantomOutput")
        .def_readonly("intensity", &PhantomOutput::intensity)
        .def_readonly("airway_gt", &PhantomOutput::airway_gt)
        .def_readonly("lung_mask", &PhantomOutput::lung_mask)
        .def_readonly("clipped", &PhantomOutput::clipped)
        .def_property_readonly("region_labels",
                               [](const PhantomOutput& p) {
                                   return grid_array(labels_to_grid(p.region_labels));
                               })
        .def_property_readonly("branch_table", [](const PhantomOutput& p) {
            py::list out;
            for (const auto& b : p.branch_table)
                out.append(py::make_tuple(b.branch_id, b.region, b.radius_mm,
                                          b.length_mm, b.analytic_volume_mm3));
            return out;
        })
        .def_property_readonly("centerline_points", [](const PhantomOutput& p) {
            py::list out;
            for (const auto& cl : p.centerlines)
                for (const auto& pt : cl.points)
                    out.append(py::make_tuple(cl.branch_id, cl.region, pt[0], pt[1], pt[2]));
            return out;
        });
    m.def(
        "build_phantom",
        [](int depth, std::uint64_t seed, Index3 dims, double noise_sd) {
            PhantomConfig cfg;
            cfg.tree.depth = depth;
            cfg.tree.seed = seed;
            cfg.dims = dims;
            cfg.noise_sd_hu = noise_sd;
            return build_phantom(cfg);
        },
        py::arg("depth") = 5, py::arg("seed") = 0, py::arg("dims") = Index3{0, 0, 0},
        py::arg("noise_sd_hu") = 0.0);

    m.def(
        "centerline_recall",
        [](py::list points, const Mask& pred, double tol) {
            std::vector<Centerline> cls(1);
            for (auto item : points) {
                auto t = item.cast<py::tuple>();
                cls[0].points.push_back({t[0].cast<double>(), t[1].cast<double>(),
                                         t[2].cast<double>()});
            }
            return centerline_recall(cls, pred, tol);
        },
        py::arg("points_mm"), py::arg("pred"), py::arg("tolerance_mm") = 0.0);

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
