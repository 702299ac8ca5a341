#include <doctest.h>

#include <cmath>

#include "airquant/quant.hpp"
#include "testutil.hpp"

using namespace airquant;

TEST_CASE("region code naming round trip and lobe membership") {
    for (RegionCode c : segment_codes()) {
        CHECK(region_from_name(region_name(c)) == c);
        const RegionCode lobe = lobe_of_segment(c);
        bool found = false;
        for (RegionCode s : segments_of_lobe(lobe)) found = found || s == c;
        CHECK(found);
    }
    CHECK(segment_codes().size() == 18);
    CHECK(lobe_codes().size() == 5);
    CHECK(region_name(RegionCode::L12) == "L1-2");
    CHECK(region_name(RegionCode::L78) == "L7-8");
    CHECK(segments_of_lobe(RegionCode::RUL).size() == 3);
    CHECK(segments_of_lobe(RegionCode::RML).size() == 2);
    CHECK(segments_of_lobe(RegionCode::RLL).size() == 5);
    CHECK(segments_of_lobe(RegionCode::LUL).size() == 4);
    CHECK(segments_of_lobe(RegionCode::LLL).size() == 4);
    CHECK_THROWS_AS(region_from_name("R99"), ConfigError);
}

TEST_CASE("restrict_to_lung is a voxelwise AND and idempotent") {
    std::mt19937_64 rng(17);
    const Mask airway = testutil::random_mask({8, 8, 8}, 0.4, rng);
    Mask lung = testutil::random_mask({8, 8, 8}, 0.6, rng);

    const Mask r = restrict_to_lung(airway, lung);
    for (std::size_t i = 0; i < r.data.size(); ++i)
        CHECK(r.data[i] == (airway.data[i] && lung.data[i] ? 1 : 0));

    const Mask rr = restrict_to_lung(r, lung);
    CHECK(rr.data == r.data);

    Mask full({8, 8, 8}, {1, 1, 1}, {0, 0, 0});
    std::fill(full.data.begin(), full.data.end(), 1);
    CHECK(restrict_to_lung(airway, full).data == airway.data);

    Mask empty({8, 8, 8}, {1, 1, 1}, {0, 0, 0});
    CHECK(restrict_to_lung(airway, empty).foreground_count() == 0);

    Mask other({9, 8, 8}, {1, 1, 1}, {0, 0, 0});
    CHECK_THROWS_AS(restrict_to_lung(airway, other), GeometryError);
}

TEST_CASE("regional volumes: single-segment airway and partition identity") {
    const Index3 dims{12, 12, 12};
    Mask airway(dims, {0.5, 0.5, 0.5}, {0, 0, 0});
    LabelMap labels(dims, {0.5, 0.5, 0.5}, {0, 0, 0});

    // airway entirely inside R3's region
    for (int z = 2; z < 6; ++z)
        for (int y = 2; y < 6; ++y)
            for (int x = 2; x < 6; ++x) {
                airway.at(x, y, z) = 1;
                labels.at(x, y, z) = static_cast<int>(RegionCode::R3);
            }
    const RegionalVolumes rv = regional_volumes(airway, labels);
    const double expected = 64 * 0.125;
    CHECK(rv.volumes_mm3.at(RegionCode::R3) == doctest::Approx(expected));
    for (RegionCode c : segment_codes())
        if (c != RegionCode::R3) CHECK(rv.volumes_mm3.at(c) == 0.0);
    // lobar mode: sum of members
    CHECK_FALSE(rv.lobar_from_map);
    CHECK(rv.volumes_mm3.at(RegionCode::RUL) == doctest::Approx(expected));
    CHECK(rv.volumes_mm3.at(RegionCode::RML) == 0.0);
}

TEST_CASE("regional volumes partition: segment sum equals labeled airway volume") {
    std::mt19937_64 rng(23);
    const Index3 dims{16, 16, 16};
    Mask airway = testutil::random_mask(dims, 0.3, rng, {0.5, 0.5, 0.5});
    LabelMap labels(dims, {0.5, 0.5, 0.5}, {0, 0, 0});
    for (auto& v : labels.data)
        v = static_cast<std::int16_t>(rng() % 19);  // 0..18

    const RegionalVolumes rv = regional_volumes(airway, labels);
    double seg_sum = 0.0;
    for (RegionCode c : segment_codes()) seg_sum += rv.volumes_mm3.at(c);

    double labeled = 0.0;
    for (std::size_t i = 0; i < airway.data.size(); ++i)
        if (airway.data[i] && labels.data[i] > 0) labeled += airway.voxel_volume_mm3();
    CHECK(seg_sum == doctest::Approx(labeled).epsilon(1e-12));

    // label-0 voxels are excluded
    CHECK(seg_sum <= airway.foreground_count() * airway.voxel_volume_mm3());
}

TEST_CASE("regional volumes rejects out-of-range labels") {
    Mask airway({4, 4, 4}, {1, 1, 1}, {0, 0, 0});
    airway.at(1, 1, 1) = 1;
    LabelMap labels({4, 4, 4}, {1, 1, 1}, {0, 0, 0});
    labels.at(1, 1, 1) = 42;
    CHECK_THROWS_AS(regional_volumes(airway, labels), ConfigError);
}

TEST_CASE("lobar volumes from a direct lobar map") {
    const Index3 dims{8, 8, 8};
    Mask airway(dims, {1, 1, 1}, {0, 0, 0});
    LabelMap seg(dims, {1, 1, 1}, {0, 0, 0});
    LabelMap lob(dims, {1, 1, 1}, {0, 0, 0});
    // two airway voxels in R1 (belongs to RUL); lobar map marks an extra voxel
    airway.at(1, 1, 1) = 1;
    airway.at(2, 1, 1) = 1;
    airway.at(3, 1, 1) = 1;
    seg.at(1, 1, 1) = static_cast<int>(RegionCode::R1);
    seg.at(2, 1, 1) = static_cast<int>(RegionCode::R1);
    // voxel (3,1,1) unassigned at segment level, but inside the lobar RUL map
    lob.at(1, 1, 1) = static_cast<int>(RegionCode::RUL);
    lob.at(2, 1, 1) = static_cast<int>(RegionCode::RUL);
    lob.at(3, 1, 1) = static_cast<int>(RegionCode::RUL);

    const RegionalVolumes direct = regional_volumes(airway, seg, &lob);
    CHECK(direct.lobar_from_map);
    CHECK(direct.volumes_mm3.at(RegionCode::RUL) == doctest::Approx(3.0));
    CHECK(direct.volumes_mm3.at(RegionCode::R1) == doctest::Approx(2.0));

    // segment sums within a lobe never exceed a containing lobar map volume
    const RegionalVolumes summed = regional_volumes(airway, seg);
    CHECK(summed.volumes_mm3.at(RegionCode::RUL) <=
          direct.volumes_mm3.at(RegionCode::RUL));
}

TEST_CASE("bsa_dubois reference value and scaling laws") {
    // independent evaluation of the printed formula
    const double expected = std::pow(70.0, 0.425) * std::pow(170.0, 0.725) * 0.007184;
    CHECK(bsa_dubois(70, 170) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(bsa_dubois(70, 170) == doctest::Approx(1.810).epsilon(0.003));

    CHECK(bsa_dubois(1, 1) == doctest::Approx(0.007184).epsilon(1e-12));

    // doubling weight multiplies BSA by 2^0.425 exactly
    CHECK(bsa_dubois(140, 170) / bsa_dubois(70, 170) ==
          doctest::Approx(std::pow(2.0, 0.425)).epsilon(1e-12));
    CHECK(bsa_dubois(70, 340) / bsa_dubois(70, 170) ==
          doctest::Approx(std::pow(2.0, 0.725)).epsilon(1e-12));

    // strictly increasing in each argument
    CHECK(bsa_dubois(71, 170) > bsa_dubois(70, 170));
    CHECK(bsa_dubois(70, 171) > bsa_dubois(70, 170));

    CHECK_THROWS_AS(bsa_dubois(0, 170), ConfigError);
    CHECK_THROWS_AS(bsa_dubois(70, -1), ConfigError);
}

TEST_CASE("normalize_by_bsa") {
    CHECK(normalize_by_bsa(0.0, 1.8) == 0.0);
    CHECK(normalize_by_bsa(3815.58, 1.810) == doctest::Approx(2108.06).epsilon(1e-4));
    // order preserved at fixed bsa
    CHECK(normalize_by_bsa(100.0, 1.7) < normalize_by_bsa(200.0, 1.7));
    CHECK_THROWS_AS(normalize_by_bsa(1.0, 0.0), ConfigError);
}

TEST_CASE("build_cohort validates and counts groups") {
    std::vector<SubjectRecord> records;
    for (int i = 0; i < 79; ++i) {
        SubjectRecord r;
        r.id = "n" + std::to_string(i);
        r.group = "SLE-non-ILD";
        records.push_back(r);
    }
    for (int i = 0; i < 27; ++i) {
        SubjectRecord r;
        r.id = "i" + std::to_string(i);
        r.group = "SLE-ILD";
        records.push_back(r);
    }
    const CohortTable t = build_cohort(records);
    CHECK(t.group_counts.at("SLE-non-ILD") == 79);
    CHECK(t.group_counts.at("SLE-ILD") == 27);
    CHECK(t.groups.size() == 2);

    CHECK(build_cohort({}).subjects.empty());  // empty list is fine

    records.push_back(records.front());  // duplicate id
    CHECK_THROWS_WITH_AS(build_cohort(records),
                         doctest::Contains("duplicate subject id \"n0\""), ConfigError);
}

TEST_CASE("subject bsa requires both height and weight") {
    SubjectRecord r;
    r.id = "s";
    r.group = "g";
    CHECK_FALSE(r.bsa_m2().has_value());
    r.height_cm = 170.0;
    CHECK_FALSE(r.bsa_m2().has_value());
    r.weight_kg = 70.0;
    REQUIRE(r.bsa_m2().has_value());
    CHECK(*r.bsa_m2() == doctest::Approx(1.810).epsilon(0.003));
}
