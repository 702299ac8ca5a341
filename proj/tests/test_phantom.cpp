#include <doctest.h>

#include <cmath>
#include <set>

#include "airquant/metrics.hpp"
#include "airquant/phantom.hpp"
#include "airquant/quant.hpp"
#include "airquant/segment.hpp"
#include "testutil.hpp"

using namespace airquant;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("generate_tree base cases and determinism") {
    TreeParams p;
    p.depth = 1;
    const TreeSpec t1 = generate_tree(p);
    REQUIRE(t1.branches.size() == 1);
    CHECK(t1.branches[0].region == 0);
    CHECK(t1.branches[0].generation == 0);

    TreeParams p3;
    p3.depth = 3;
    p3.jitter = 0.0;
    p3.seed = 7;
    const TreeSpec a = generate_tree(p3);
    const TreeSpec b = generate_tree(p3);
    REQUIRE(a.branches.size() == b.branches.size());
    CHECK(a.branches.size() == 7);  // 1 + 2 + 4
    for (std::size_t i = 0; i < a.branches.size(); ++i) {
        CHECK(a.branches[i].start == b.branches[i].start);
        CHECK(a.branches[i].direction == b.branches[i].direction);
        CHECK(a.branches[i].length_mm == b.branches[i].length_mm);
    }

    // jittered trees differ across seeds but not across runs of one seed
    TreeParams pj = p3;
    pj.jitter = 0.1;
    pj.seed = 1;
    const TreeSpec j1 = generate_tree(pj);
    const TreeSpec j1b = generate_tree(pj);
    pj.seed = 2;
    const TreeSpec j2 = generate_tree(pj);
    CHECK(j1.branches[3].direction == j1b.branches[3].direction);
    CHECK(j1.branches[3].direction != j2.branches[3].direction);
}

TEST_CASE("generate_tree structural invariants") {
    TreeParams p;
    p.depth = 5;
    p.ratio = 0.78;
    const TreeSpec t = generate_tree(p);
    REQUIRE(t.branches.size() == 31);
    for (const auto& b : t.branches) {
        // unit direction
        const double n = std::sqrt(b.direction[0] * b.direction[0] +
                                   b.direction[1] * b.direction[1] +
                                   b.direction[2] * b.direction[2]);
        CHECK(std::abs(n - 1.0) < 1e-9);
        if (b.parent >= 0) {
            const auto& par = t.branches[b.parent];
            // child starts at parent end
            const Vec3 end = t.branch_end(par);
            for (int i = 0; i < 3; ++i) CHECK(b.start[i] == doctest::Approx(end[i]).epsilon(1e-12));
            // radius decays by the ratio
            CHECK(b.radius_mm == doctest::Approx(par.radius_mm * p.ratio).epsilon(1e-9));
            CHECK(b.generation == par.generation + 1);
        }
    }
    // generation-4 radius = root * ratio^4
    for (const auto& b : t.branches)
        if (b.generation == 4)
            CHECK(b.radius_mm ==
                  doctest::Approx(p.root_radius_mm * std::pow(p.ratio, 4)).epsilon(1e-9));
}

TEST_CASE("generate_tree region codes cover the configured segment count") {
    TreeParams p;
    p.depth = 6;  // segmental generation defaults to 5 -> 32 subtrees
    const TreeSpec t = generate_tree(p);
    std::set<int> codes;
    for (const auto& b : t.branches) {
        if (b.generation <= 1) CHECK(b.region == 0);  // trachea and main bronchi
        if (b.generation == 5) codes.insert(b.region);
    }
    CHECK(codes.size() == 18);
    CHECK(*codes.begin() == 1);
    CHECK(*codes.rbegin() == 18);
}

TEST_CASE("generate_tree radius floor error") {
    TreeParams p;
    p.depth = 12;
    p.min_radius_mm = 1.0;  // 4.0 * 0.8^11 = 0.34 < 1.0
    CHECK_THROWS_AS(generate_tree(p), ConfigError);
    CHECK_THROWS_AS(generate_tree({.depth = 0}), ConfigError);
}

TEST_CASE("analytic branch volume formula") {
    BranchSpec b;
    b.radius_mm = 1.0;
    b.length_mm = 1.0;
    CHECK(analytic_branch_volume_mm3(b) == doctest::Approx(kPi));
    b.radius_mm = 2.0;
    b.length_mm = 10.0;
    CHECK(analytic_branch_volume_mm3(b) == doctest::Approx(40.0 * kPi));
    b.radius_mm = 0.5;
    b.length_mm = 4.0;
    CHECK(analytic_branch_volume_mm3(b) == doctest::Approx(kPi));
}

TEST_CASE("rasterized axis-aligned branch, r=3mm at 1mm spacing, within 5%") {
    // slender so the spherocylinder caps stay inside the 5% budget; generic
    // sub-voxel position avoids the lattice-aligned worst case
    const double r = 3.0, L = 400.0;
    TreeSpec t;
    t.branches.push_back({0, -1, 0, 0, {0.37, 0.29, 0.0}, {0, 0, 1}, L, r});
    const double analytic = kPi * r * r * L;
    const double sp = 1.0;
    const int nxy = static_cast<int>(2 * r / sp) + 11;
    GridGeometry g;
    g.dims = {nxy, nxy, static_cast<int>((L + 2 * r) / sp) + 9};
    g.spacing = {sp, sp, sp};
    g.origin = {-0.5 * (nxy - 1) * sp, -0.5 * (nxy - 1) * sp, -(r + 3 * sp)};
    bool clipped = false;
    const double v = mask_volume_mm3(rasterize_tree(t, g, &clipped));
    CHECK_FALSE(clipped);
    CHECK(std::abs(v - analytic) / analytic < 0.05);
}

TEST_CASE("rasterized isolated branch converges to the analytic volume") {
    // oblique direction: slice-wise lattice fluctuations average out along
    // the axis, leaving only the end-cap contribution
    const double r = 3.0, L = 400.0;
    Vec3 d{0.31, 0.22, 0.92};
    const double n = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    d = {d[0] / n, d[1] / n, d[2] / n};
    TreeSpec t;
    t.branches.push_back({0, -1, 0, 0, {0.37, 0.29, 0.0}, d, L, r});
    const double analytic = kPi * r * r * L;

    auto rastvol = [&](double sp) {
        const Vec3 e = {0.37 + d[0] * L, 0.29 + d[1] * L, d[2] * L};
        GridGeometry g;
        g.dims = {static_cast<int>((std::abs(e[0]) + 2 * r) / sp) + 11,
                  static_cast<int>((std::abs(e[1]) + 2 * r) / sp) + 11,
                  static_cast<int>((e[2] + 2 * r) / sp) + 11};
        g.spacing = {sp, sp, sp};
        g.origin = {-(r + 3 * sp), -(r + 3 * sp), -(r + 3 * sp)};
        bool clipped = false;
        const Mask m = rasterize_tree(t, g, &clipped);
        CHECK_FALSE(clipped);
        return mask_volume_mm3(m);
    };
    const double v3 = rastvol(r / 3.0);
    const double v6 = rastvol(r / 6.0);
    CHECK(std::abs(v3 - analytic) / analytic < 0.05);
    CHECK(std::abs(v6 - analytic) / analytic < 0.02);

    // doubling the spacing (r/6 -> r/3) changes the volume by < 10%
    CHECK(std::abs(v3 - v6) / v6 < 0.10);
}

TEST_CASE("rasterize, tree outside geometry, warn-and-clip") {
    TreeSpec t;
    t.branches.push_back({0, -1, 0, 0, {100, 100, 100}, {0, 0, 1}, 5, 1});
    GridGeometry g;
    g.dims = {16, 16, 16};
    g.spacing = {1, 1, 1};
    g.origin = {0, 0, 0};
    bool clipped = false;
    const Mask m = rasterize_tree(t, g, &clipped);
    CHECK(clipped);
    CHECK(m.foreground_count() == 0);
}

TEST_CASE("emit_centerlines point counts and on-axis placement") {
    TreeSpec t;
    t.branches.push_back({0, -1, 0, 3, {0, 0, 0}, {1, 0, 0}, 10.0, 1.0});
    const auto cls = emit_centerlines(t, 1.0);
    REQUIRE(cls.size() == 1);
    CHECK(cls[0].points.size() == 11);  // ceil(L/step) + 1
    CHECK(cls[0].region == 3);
    for (const auto& pt : cls[0].points) {
        CHECK(pt[1] == 0.0);  // exactly on the axis
        CHECK(pt[2] == 0.0);
    }
    CHECK(cls[0].points.front()[0] == 0.0);
    CHECK(cls[0].points.back()[0] == doctest::Approx(10.0));

    // consecutive spacing never exceeds the step
    const auto fine = emit_centerlines(t, 0.7);
    for (std::size_t i = 1; i < fine[0].points.size(); ++i)
        CHECK(fine[0].points[i][0] - fine[0].points[i - 1][0] <= 0.7 + 1e-12);

    CHECK_THROWS_AS(emit_centerlines(t, 0.0), ConfigError);
}

TEST_CASE("synthesize_intensity noiseless values and determinism") {
    TreeParams tp;
    tp.depth = 4;
    PhantomConfig cfg;
    cfg.tree = tp;
    cfg.dims = {64, 64, 64};
    const PhantomOutput ph = build_phantom(cfg);

    std::set<float> values(ph.intensity.data.begin(), ph.intensity.data.end());
    CHECK(values == std::set<float>{-1000.0f, -850.0f, -100.0f, 0.0f});

    // lumen voxels are exactly the airway mask
    for (std::size_t i = 0; i < ph.intensity.data.size(); ++i)
        CHECK((ph.intensity.data[i] == -1000.0f) == (ph.airway_gt.data[i] != 0));

    // determinism with noise
    PhantomConfig noisy = cfg;
    noisy.noise_sd_hu = 20.0;
    noisy.tree.seed = 5;
    const PhantomOutput n1 = build_phantom(noisy);
    const PhantomOutput n2 = build_phantom(noisy);
    CHECK(n1.intensity.data == n2.intensity.data);
}

TEST_CASE("noisy lumen mean approaches -1000 HU") {
    TreeParams tp;
    tp.depth = 5;
    PhantomConfig cfg;
    cfg.tree = tp;
    cfg.noise_sd_hu = 20.0;
    const PhantomOutput ph = build_phantom(cfg);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < ph.intensity.data.size(); ++i)
        if (ph.airway_gt.data[i]) {
            sum += ph.intensity.data[i];
            ++count;
        }
    REQUIRE(count >= 10000);  // enough lumen voxels for a tight SEM
    CHECK(std::abs(sum / count - (-1000.0)) < 3.0);
}

TEST_CASE("phantom invariants: centerline containment and label partition") {
    TreeParams tp;
    tp.depth = 5;
    tp.seed = 11;
    PhantomConfig cfg;
    cfg.tree = tp;
    const PhantomOutput ph = build_phantom(cfg);
    CHECK_FALSE(ph.clipped);

    // every centerline point inside the rasterized mask
    CHECK(centerline_recall(ph.centerlines, ph.airway_gt) == 1.0);

    // per-region voxel volumes + label-0 volume = total airway volume
    const double vox = ph.airway_gt.voxel_volume_mm3();
    double labeled = 0.0, label0 = 0.0;
    for (std::size_t i = 0; i < ph.airway_gt.data.size(); ++i) {
        if (!ph.airway_gt.data[i]) continue;
        if (ph.region_labels.data[i] > 0) labeled += vox;
        else label0 += vox;
    }
    CHECK(labeled + label0 ==
          doctest::Approx(mask_volume_mm3(ph.airway_gt)).epsilon(1e-12));

    // airway is contained in lung + hilum: any airway voxel outside the lung
    // mask must carry label 0 (hilum-adjacent generations)
    for (std::size_t i = 0; i < ph.airway_gt.data.size(); ++i)
        if (ph.airway_gt.data[i] && !ph.lung_mask.data[i])
            CHECK(ph.region_labels.data[i] == 0);

    // the airway mask is one 26-connected component
    const auto cc = connected_components(ph.airway_gt, 26);
    CHECK(cc.sizes.size() == 1);
}

TEST_CASE("phantom lungs: two components, disjoint from the hilum corridor") {
    TreeParams tp;
    tp.depth = 5;
    PhantomConfig cfg;
    cfg.tree = tp;
    const PhantomOutput ph = build_phantom(cfg);

    const auto cc = connected_components(ph.lung_mask, 6);
    CHECK(cc.sizes.size() == 2);
    // both lungs have real volume
    CHECK(cc.sizes[1] > cc.sizes[0] / 4);

    // depth-6 default phantom carries exactly codes {0} + 18 segments
    TreeParams tp6;
    tp6.depth = 6;
    PhantomConfig cfg6;
    cfg6.tree = tp6;
    const PhantomOutput ph6 = build_phantom(cfg6);
    std::set<int> codes(ph6.region_labels.data.begin(), ph6.region_labels.data.end());
    std::set<int> expected;
    for (int c = 0; c <= 18; ++c) expected.insert(c);
    CHECK(codes == expected);
}

TEST_CASE("lung coarse segmentation recovers the phantom lungs") {
    TreeParams tp;
    tp.depth = 5;
    tp.seed = 7;
    PhantomConfig cfg;
    cfg.tree = tp;
    const PhantomOutput ph = build_phantom(cfg);

    const Mask lung = segment_lung_coarse(ph.intensity);
    CHECK(dice(lung, ph.lung_mask) >= 0.95);
    CHECK(connected_components(lung, 6).sizes.size() == 2);

    // trachea seed finder lands inside the airway ground truth
    const Index3 seed = find_trachea_seed(ph.intensity);
    CHECK(ph.airway_gt.at(seed[0], seed[1], seed[2]) == 1);
}

TEST_CASE("hilum exclusion: restricted volume = GT minus generations 0-1") {
    TreeParams tp;
    tp.depth = 5;
    tp.seed = 7;
    PhantomConfig cfg;
    cfg.tree = tp;
    const PhantomOutput ph = build_phantom(cfg);

    const Mask restricted = restrict_to_lung(ph.airway_gt, ph.lung_mask);
    const double excluded =
        mask_volume_mm3(ph.airway_gt) - mask_volume_mm3(restricted);
    double analytic01 = 0.0;
    for (const auto& b : ph.tree.branches)
        if (b.generation <= 1) analytic01 += analytic_branch_volume_mm3(b);
    // rasterization caps and junction claiming leave a one-layer-scale slack
    CHECK(excluded > 0.0);
    CHECK(std::abs(excluded - analytic01) / analytic01 < 0.20);
}

TEST_CASE("synthesize_intensity rejects mismatched geometries") {
    Mask a({8, 8, 8}, {1, 1, 1}, {0, 0, 0});
    Mask b({8, 8, 9}, {1, 1, 1}, {0, 0, 0});
    CHECK_THROWS_AS(synthesize_intensity(a, b, 0.0, 0), GeometryError);
}

TEST_CASE("centerline containment holds across jittered trees at radius/3") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        TreeParams tp;
        tp.depth = 4;
        tp.seed = seed;
        tp.jitter = 0.1;
        PhantomConfig cfg;
        cfg.tree = tp;
        cfg.dims = {72, 72, 72};
        const PhantomOutput ph = build_phantom(cfg);
        REQUIRE_FALSE(ph.clipped);
        CHECK(centerline_recall(ph.centerlines, ph.airway_gt) == 1.0);
    }
}

TEST_CASE("depth-6 phantom: per-segment volumes within 10% of analytic sums") {
    TreeParams tp;
    tp.depth = 6;
    tp.seed = 1;
    PhantomConfig cfg;
    cfg.tree = tp;
    const PhantomOutput ph = build_phantom(cfg);
    REQUIRE_FALSE(ph.clipped);

    std::map<int, double> analytic;
    for (const auto& b : ph.branch_table)
        if (b.region > 0) analytic[b.region] += b.analytic_volume_mm3;

    const double vox = ph.airway_gt.voxel_volume_mm3();
    std::map<int, double> rasterized;
    for (std::size_t i = 0; i < ph.airway_gt.data.size(); ++i)
        if (ph.airway_gt.data[i] && ph.region_labels.data[i] > 0)
            rasterized[ph.region_labels.data[i]] += vox;

    REQUIRE(analytic.size() == 18);
    for (const auto& [code, va] : analytic) {
        const double vr = rasterized[code];
        CHECK(std::abs(vr - va) / va < 0.10);
    }
}
