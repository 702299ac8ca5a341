#pragma once

#include <string>
#include <vector>

#include "airquant/phantom.hpp"
#include "airquant/quant.hpp"
#include "airquant/segment.hpp"
#include "airquant/stats.hpp"
#include "airquant/types.hpp"

namespace airquant {

// centerlines.csv: branch_id, region_code, x_mm, y_mm, z_mm
void write_centerlines_csv(const std::vector<Centerline>& centerlines,
                           const std::string& path);
std::vector<Centerline> read_centerlines_csv(const std::string& path);

// branches.csv: branch_id, region_code, radius_mm, length_mm, analytic_volume_mm3
void write_branch_table_csv(const std::vector<BranchRecord>& table,
                            const std::string& path);
std::vector<BranchRecord> read_branch_table_csv(const std::string& path);

// growth_trace.csv: threshold_hu, voxels
void write_growth_trace_csv(const GrowthTrace& trace, const std::string& path);

// Subject CSV: id, group, sex, age, height_cm, weight_kg, vol_<code>_mm3 x23.
std::vector<std::string> subject_csv_header();
void append_subject_csv(const SubjectRecord& record, const std::string& path);
std::vector<SubjectRecord> read_subject_csv(const std::string& path);

// Summary CSV: region, n0, mean0, sd0, n1, mean1, sd1
std::vector<RegionSummaryRow> read_summary_csv(const std::string& path);

// Report CSV: region, n0, mean0, sd0, n1, mean1, sd1, t, df, p, p_formatted, significant
void write_report_csv(const std::vector<CompareRow>& rows, const std::string& path);

// t-value CSV: region_code, t_value
void write_tvalue_csv(const std::vector<CompareRow>& rows, const std::string& path);

}  // namespace airquant
