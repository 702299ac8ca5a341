#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "airquant/types.hpp"

namespace airquant {

// Region coding. Segment codes 1..18 follow the lobar reading order
// R1..R10, L1-2, L3, L4, L5, L6, L7-8, L9, L10; lobes are 19..23.
// Code 0 is unassigned / hilum.
enum class RegionCode : int {
    Unassigned = 0,
    R1 = 1, R2, R3, R4, R5, R6, R7, R8, R9, R10,
    L12, L3, L4, L5, L6, L78, L9, L10,
    RUL = 19, RML, RLL, LUL, LLL,
};

constexpr int kFirstSegment = 1;
constexpr int kLastSegment = 18;
constexpr int kFirstLobe = 19;
constexpr int kLastLobe = 23;

const std::vector<RegionCode>& segment_codes();
const std::vector<RegionCode>& lobe_codes();
const std::vector<RegionCode>& segments_of_lobe(RegionCode lobe);
RegionCode lobe_of_segment(RegionCode segment);

std::string region_name(RegionCode code);
RegionCode region_from_name(const std::string& name);

// Voxelwise AND; idempotent.
Mask restrict_to_lung(const Mask& airway, const Mask& lung);

struct RegionalVolumes {
    std::map<RegionCode, double> volumes_mm3;  // segments always, lobes always
    bool lobar_from_map = false;  // false: lobar volumes are sums of member segments
};

// Per-region airway volume: voxels with airway=1 and segment label=c.
// Label-0 (hilum / unassigned) voxels are excluded. Lobar volumes come from
// the lobar map when one is supplied, otherwise as sums of member segments.
RegionalVolumes regional_volumes(const Mask& airway, const LabelMap& segment_labels,
                                 const LabelMap* lobar_labels = nullptr);

// DuBois: BSA(m^2) = Weight(kg)^0.425 * Height(cm)^0.725 * 0.007184
double bsa_dubois(double weight_kg, double height_cm);

double normalize_by_bsa(double volume_mm3, double bsa_m2);

struct SubjectRecord {
    std::string id;
    std::string group;  // e.g. "SLE-non-ILD" / "SLE-ILD"
    std::string sex;
    std::optional<double> age_years;
    std::optional<double> height_cm;
    std::optional<double> weight_kg;
    std::map<RegionCode, double> volumes_mm3;

    std::optional<double> bsa_m2() const;
};

struct CohortTable {
    std::vector<SubjectRecord> subjects;
    std::vector<std::string> groups;              // distinct, in first-seen order
    std::map<std::string, std::size_t> group_counts;
    std::vector<std::string> missing_fields;      // "<id>: height_cm", ...
};

// Validates unique ids and non-empty group labels.
CohortTable build_cohort(const std::vector<SubjectRecord>& records);

}  // namespace airquant
