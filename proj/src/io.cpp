#include "airquant/io.hpp"

#include <cstdio>
#include <map>

#include "airquant/csv.hpp"

namespace airquant {

namespace {

std::string fmt(double v, const char* spec = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError("CSV: cannot parse " + what + " from \"" + s + "\"");
    }
}

long long parse_ll(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError("CSV: cannot parse " + what + " from \"" + s + "\"");
    }
}

}  // namespace

void write_centerlines_csv(const std::vector<Centerline>& centerlines,
                           const std::string& path) {
    CsvTable t;
    t.header = {"branch_id", "region_code", "x_mm", "y_mm", "z_mm"};
    for (const auto& cl : centerlines)
        for (const auto& p : cl.points)
            t.rows.push_back({std::to_string(cl.branch_id), std::to_string(cl.region),
                              fmt(p[0]), fmt(p[1]), fmt(p[2])});
    write_csv(path, t);
}

std::vector<Centerline> read_centerlines_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int ci = t.column("branch_id"), cr = t.column("region_code");
    const int cx = t.column("x_mm"), cy = t.column("y_mm"), cz = t.column("z_mm");
    std::vector<Centerline> out;
    std::map<int, std::size_t> by_id;
    for (const auto& row : t.rows) {
        const int id = static_cast<int>(parse_ll(row[ci], "branch_id"));
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            Centerline cl;
            cl.branch_id = id;
            cl.region = static_cast<int>(parse_ll(row[cr], "region_code"));
            by_id[id] = out.size();
            out.push_back(std::move(cl));
            it = by_id.find(id);
        }
        out[it->second].points.push_back({parse_double(row[cx], "x_mm"),
                                          parse_double(row[cy], "y_mm"),
                                          parse_double(row[cz], "z_mm")});
    }
    return out;
}

void write_branch_table_csv(const std::vector<BranchRecord>& table,
                            const std::string& path) {
    CsvTable t;
    t.header = {"branch_id", "region_code", "radius_mm", "length_mm",
                "analytic_volume_mm3"};
    for (const auto& b : table)
        t.rows.push_back({std::to_string(b.branch_id), std::to_string(b.region),
                          fmt(b.radius_mm), fmt(b.length_mm),
                          fmt(b.analytic_volume_mm3)});
    write_csv(path, t);
}

std::vector<BranchRecord> read_branch_table_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int ci = t.column("branch_id"), cr = t.column("region_code");
    const int cra = t.column("radius_mm"), cl = t.column("length_mm");
    const int cv = t.column("analytic_volume_mm3");
    std::vector<BranchRecord> out;
    for (const auto& row : t.rows)
        out.push_back({static_cast<int>(parse_ll(row[ci], "branch_id")),
                       static_cast<int>(parse_ll(row[cr], "region_code")),
                       parse_double(row[cra], "radius_mm"),
                       parse_double(row[cl], "length_mm"),
                       parse_double(row[cv], "analytic_volume_mm3")});
    return out;
}

void write_growth_trace_csv(const GrowthTrace& trace, const std::string& path) {
    CsvTable t;
    t.header = {"threshold_hu", "voxels"};
    for (const auto& s : trace.steps)
        t.rows.push_back({fmt(s.threshold_hu), std::to_string(s.voxels)});
    write_csv(path, t);
}

std::vector<std::string> subject_csv_header() {
    std::vector<std::string> h = {"id", "group", "sex", "age", "height_cm", "weight_kg"};
    for (RegionCode c : segment_codes()) h.push_back("vol_" + region_name(c) + "_mm3");
    for (RegionCode c : lobe_codes()) h.push_back("vol_" + region_name(c) + "_mm3");
    h.push_back("bsa_m2");
    return h;
}

void append_subject_csv(const SubjectRecord& record, const std::string& path) {
    const auto header = subject_csv_header();
    bool need_header = true;
    {
        std::ifstream probe(path);
        if (probe && probe.peek() != std::ifstream::traits_type::eof())
            need_header = false;
    }
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("cannot open cohort CSV for append: " + path);
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    };
    if (need_header) emit(header);

    std::vector<std::string> row = {
        record.id,
        record.group,
        record.sex,
        record.age_years ? fmt(*record.age_years) : "",
        record.height_cm ? fmt(*record.height_cm) : "",
        record.weight_kg ? fmt(*record.weight_kg) : "",
    };
    auto vol = [&](RegionCode c) {
        auto it = record.volumes_mm3.find(c);
        return it == record.volumes_mm3.end() ? std::string() : fmt(it->second);
    };
    for (RegionCode c : segment_codes()) row.push_back(vol(c));
    for (RegionCode c : lobe_codes()) row.push_back(vol(c));
    const auto bsa = record.bsa_m2();
    row.push_back(bsa ? fmt(*bsa) : "");
    emit(row);
}

std::vector<SubjectRecord> read_subject_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int ci = t.column("id"), cg = t.column("group"), cs = t.column("sex");
    const int ca = t.column("age"), ch = t.column("height_cm"), cw = t.column("weight_kg");
    std::vector<std::pair<RegionCode, int>> vol_cols;
    for (RegionCode c : segment_codes())
        vol_cols.emplace_back(c, t.column("vol_" + region_name(c) + "_mm3"));
    for (RegionCode c : lobe_codes())
        vol_cols.emplace_back(c, t.column("vol_" + region_name(c) + "_mm3"));

    std::vector<SubjectRecord> out;
    for (const auto& row : t.rows) {
        SubjectRecord r;
        r.id = row[ci];
        r.group = row[cg];
        r.sex = row[cs];
        if (!row[ca].empty()) r.age_years = parse_double(row[ca], "age");
        if (!row[ch].empty()) r.height_cm = parse_double(row[ch], "height_cm");
        if (!row[cw].empty()) r.weight_kg = parse_double(row[cw], "weight_kg");
        for (const auto& [code, col] : vol_cols)
            if (col < static_cast<int>(row.size()) && !row[col].empty())
                r.volumes_mm3[code] = parse_double(row[col], "volume");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<RegionSummaryRow> read_summary_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int cr = t.column("region");
    const int n0 = t.column("n0"), m0 = t.column("mean0"), s0 = t.column("sd0");
    const int n1 = t.column("n1"), m1 = t.column("mean1"), s1 = t.column("sd1");
    std::vector<RegionSummaryRow> out;
    for (const auto& row : t.rows) {
        RegionSummaryRow r;
        r.region = row[cr];
        r.group0 = {static_cast<std::size_t>(parse_ll(row[n0], "n0")),
                    parse_double(row[m0], "mean0"), parse_double(row[s0], "sd0")};
        r.group1 = {static_cast<std::size_t>(parse_ll(row[n1], "n1")),
                    parse_double(row[m1], "mean1"), parse_double(row[s1], "sd1")};
        out.push_back(std::move(r));
    }
    return out;
}

void write_report_csv(const std::vector<CompareRow>& rows, const std::string& path) {
    CsvTable t;
    t.header = {"region", "n0", "mean0", "sd0", "n1",          "mean1",
                "sd1",    "t",  "df",    "p",   "p_formatted", "significant"};
    for (const auto& r : rows)
        t.rows.push_back({r.region, std::to_string(r.group0.n), fmt(r.group0.mean),
                          fmt(r.group0.sd), std::to_string(r.group1.n),
                          fmt(r.group1.mean), fmt(r.group1.sd), fmt(r.t), fmt(r.df),
                          fmt(r.p, "%.12g"), r.p_formatted,
                          r.significant ? "1" : "0"});
    write_csv(path, t);
}

void write_tvalue_csv(const std::vector<CompareRow>& rows, const std::string& path) {
    CsvTable t;
    t.header = {"region_code", "t_value"};
    for (const auto& r : rows) t.rows.push_back({r.region, fmt(r.t)});
    write_csv(path, t);
}

}  // namespace airquant
