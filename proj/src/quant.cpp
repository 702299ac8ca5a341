#include "airquant/quant.hpp"

#include <cmath>
#include <set>

namespace airquant {

namespace {

const std::vector<std::pair<RegionCode, const char*>>& region_names() {
    static const std::vector<std::pair<RegionCode, const char*>> names = {
        {RegionCode::R1, "R1"},   {RegionCode::R2, "R2"},
        {RegionCode::R3, "R3"},   {RegionCode::R4, "R4"},
        {RegionCode::R5, "R5"},   {RegionCode::R6, "R6"},
        {RegionCode::R7, "R7"},   {RegionCode::R8, "R8"},
        {RegionCode::R9, "R9"},   {RegionCode::R10, "R10"},
        {RegionCode::L12, "L1-2"}, {RegionCode::L3, "L3"},
        {RegionCode::L4, "L4"},   {RegionCode::L5, "L5"},
        {RegionCode::L6, "L6"},   {RegionCode::L78, "L7-8"},
        {RegionCode::L9, "L9"},   {RegionCode::L10, "L10"},
        {RegionCode::RUL, "RUL"}, {RegionCode::RML, "RML"},
        {RegionCode::RLL, "RLL"}, {RegionCode::LUL, "LUL"},
        {RegionCode::LLL, "LLL"},
    };
    return names;
}

}  // namespace

const std::vector<RegionCode>& segment_codes() {
    static const std::vector<RegionCode> codes = [] {
        std::vector<RegionCode> v;
        for (int c = kFirstSegment; c <= kLastSegment; ++c)
            v.push_back(static_cast<RegionCode>(c));
        return v;
    }();
    return codes;
}

const std::vector<RegionCode>& lobe_codes() {
    static const std::vector<RegionCode> codes = {
        RegionCode::RUL, RegionCode::RML, RegionCode::RLL,
        RegionCode::LUL, RegionCode::LLL};
    return codes;
}

const std::vector<RegionCode>& segments_of_lobe(RegionCode lobe) {
    static const std::map<RegionCode, std::vector<RegionCode>> members = {
        {RegionCode::RUL, {RegionCode::R1, RegionCode::R2, RegionCode::R3}},
        {RegionCode::RML, {RegionCode::R4, RegionCode::R5}},
        {RegionCode::RLL,
         {RegionCode::R6, RegionCode::R7, RegionCode::R8, RegionCode::R9,
          RegionCode::R10}},
        {RegionCode::LUL,
         {RegionCode::L12, RegionCode::L3, RegionCode::L4, RegionCode::L5}},
        {RegionCode::LLL,
         {RegionCode::L6, RegionCode::L78, RegionCode::L9, RegionCode::L10}},
    };
    auto it = members.find(lobe);
    if (it == members.end()) throw ConfigError("segments_of_lobe: not a lobe code");
    return it->second;
}

RegionCode lobe_of_segment(RegionCode segment) {
    for (RegionCode lobe : lobe_codes())
        for (RegionCode s : segments_of_lobe(lobe))
            if (s == segment) return lobe;
    throw ConfigError("lobe_of_segment: not a segment code");
}

std::string region_name(RegionCode code) {
    for (const auto& [c, n] : region_names())
        if (c == code) return n;
    if (code == RegionCode::Unassigned) return "0";
    throw ConfigError("region_name: unknown code " +
                      std::to_string(static_cast<int>(code)));
}

RegionCode region_from_name(const std::string& name) {
    for (const auto& [c, n] : region_names())
        if (name == n) return c;
    throw ConfigError("region_from_name: unknown region \"" + name + "\"");
}

Mask restrict_to_lung(const Mask& airway, const Mask& lung) {
    if (!airway.same_geometry(lung))
        throw GeometryError("restrict_to_lung: geometry mismatch");
    Mask out = airway;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = (airway.data[i] && lung.data[i]) ? 1 : 0;
    return out;
}

RegionalVolumes regional_volumes(const Mask& airway, const LabelMap& segment_labels,
                                 const LabelMap* lobar_labels) {
    if (airway.dims != segment_labels.dims)
        throw GeometryError("regional_volumes: airway/label dims mismatch");
    if (lobar_labels && airway.dims != lobar_labels->dims)
        throw GeometryError("regional_volumes: airway/lobar-label dims mismatch");

    const double vox = airway.voxel_volume_mm3();
    RegionalVolumes out;
    for (RegionCode c : segment_codes()) out.volumes_mm3[c] = 0.0;
    for (RegionCode c : lobe_codes()) out.volumes_mm3[c] = 0.0;

    std::vector<std::size_t> seg_counts(kLastSegment + 1, 0);
    for (std::size_t i = 0; i < airway.data.size(); ++i) {
        if (!airway.data[i]) continue;
        const int lbl = segment_labels.data[i];
        if (lbl == 0) continue;  // hilum / unassigned excluded
        if (lbl < kFirstSegment || lbl > kLastSegment)
            throw ConfigError("regional_volumes: segment label " +
                              std::to_string(lbl) + " outside enumeration");
        ++seg_counts[lbl];
    }
    for (int c = kFirstSegment; c <= kLastSegment; ++c)
        out.volumes_mm3[static_cast<RegionCode>(c)] =
            static_cast<double>(seg_counts[c]) * vox;

    if (lobar_labels) {
        out.lobar_from_map = true;
        std::vector<std::size_t> lobe_counts(kLastLobe + 1, 0);
        for (std::size_t i = 0; i < airway.data.size(); ++i) {
            if (!airway.data[i]) continue;
            const int lbl = lobar_labels->data[i];
            if (lbl == 0) continue;
            if (lbl < kFirstLobe || lbl > kLastLobe)
                throw ConfigError("regional_volumes: lobar label " +
                                  std::to_string(lbl) + " outside enumeration");
            ++lobe_counts[lbl];
        }
        for (int c = kFirstLobe; c <= kLastLobe; ++c)
            out.volumes_mm3[static_cast<RegionCode>(c)] =
                static_cast<double>(lobe_counts[c]) * vox;
    } else {
        out.lobar_from_map = false;
        for (RegionCode lobe : lobe_codes()) {
            double sum = 0.0;
            for (RegionCode s : segments_of_lobe(lobe))
                sum += out.volumes_mm3[s];
            out.volumes_mm3[lobe] = sum;
        }
    }
    return out;
}

double bsa_dubois(double weight_kg, double height_cm) {
    if (weight_kg <= 0 || height_cm <= 0)
        throw ConfigError("bsa_dubois: weight and height must be positive");
    return std::pow(weight_kg, 0.425) * std::pow(height_cm, 0.725) * 0.007184;
}

double normalize_by_bsa(double volume_mm3, double bsa_m2) {
    if (bsa_m2 <= 0) throw ConfigError("normalize_by_bsa: bsa must be positive");
    return volume_mm3 / bsa_m2;
}

std::optional<double> SubjectRecord::bsa_m2() const {
    if (!height_cm || !weight_kg) return std::nullopt;
    return bsa_dubois(*weight_kg, *height_cm);
}

CohortTable build_cohort(const std::vector<SubjectRecord>& records) {
    CohortTable table;
    std::set<std::string> seen;
    for (const auto& r : records) {
        if (r.id.empty()) throw ConfigError("build_cohort: subject with empty id");
        if (!seen.insert(r.id).second)
            throw ConfigError("build_cohort: duplicate subject id \"" + r.id + "\"");
        if (r.group.empty())
            throw ConfigError("build_cohort: subject \"" + r.id + "\" has no group");
        if (table.group_counts.find(r.group) == table.group_counts.end())
            table.groups.push_back(r.group);
        table.group_counts[r.group] += 1;
        if (!r.height_cm) table.missing_fields.push_back(r.id + ": height_cm");
        if (!r.weight_kg) table.missing_fields.push_back(r.id + ": weight_kg");
        table.subjects.push_back(r);
    }
    return table;
}

}  // namespace airquant
