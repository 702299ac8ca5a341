// airquant: bronchial phantom generation, airway segmentation, evaluation,
// regional quantification and cohort comparison from the command line.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "airquant/csv.hpp"
#include "airquant/io.hpp"
#include "airquant/loss.hpp"
#include "airquant/metrics.hpp"
#include "airquant/nifti.hpp"
#include "airquant/phantom.hpp"
#include "airquant/quant.hpp"
#include "airquant/segment.hpp"
#include "airquant/stats.hpp"
#include "airquant/volume_ops.hpp"

using json = nlohmann::json;
using namespace airquant;
namespace fs = std::filesystem;

namespace {

json default_config() {
    return json{
        {"seed", 0},
        {"out", "out"},
        {"phantom",
         {{"depth", 6},
          {"root_radius_mm", 4.0},
          {"root_length_mm", 12.0},
          {"ratio", 0.8},
          {"angle_deg", 42.0},
          {"jitter", 0.0},
          {"segmental_generation", -1},
          {"max_tilt_deg", 80.0},
          {"dims", json::array({0, 0, 0})},
          {"spacing_mm", json::array({0.0, 0.0, 0.0})},
          {"noise_sd_hu", 0.0},
          {"centerline_step_mm", 0.0},
          {"lung_inflation", 1.25}}},
        {"segment",
         {{"input", ""},
          {"method", "region-grow"},
          {"lung_threshold_hu", -500.0},
          {"crop_margin_voxels", 4},
          {"seed_voxel", json::array({-1, -1, -1})},
          {"grow",
           {{"t_start_hu", -950.0},
            {"t_max_hu", -300.0},
            {"t_step_hu", 50.0},
            {"explosion_ratio", 1.5}}},
          {"trachea",
           {{"top_fraction", 0.10},
            {"air_threshold_hu", -900.0},
            {"min_area_mm2", 20.0},
            {"max_area_mm2", 600.0}}},
          {"normalize", {{"lo_hu", -1000.0}, {"hi_hu", 400.0}}},
          {"window", json::array({96, 96, 96})},
          {"overlap", 0.5},
          {"predictor", "constant"},
          {"predictor_value", 0.7},
          {"binarize_threshold", 0.5}}},
        {"eval",
         {{"pred", ""}, {"gt", ""}, {"centerlines", ""}, {"tolerance_mm", 0.0}}},
        {"quant",
         {{"airway", ""},
          {"lung", ""},
          {"labels", ""},
          {"lobar_labels", ""},
          {"cohort_csv", ""},
          {"subject",
           {{"id", ""},
            {"group", ""},
            {"sex", ""},
            {"age", -1.0},
            {"height_cm", -1.0},
            {"weight_kg", -1.0}}}}},
        {"compare",
         {{"subjects_csv", ""},
          {"lobar_summary_csv", ""},
          {"segmental_summary_csv", ""},
          {"demographics_csv", ""},
          {"variant", "pooled"},
          {"normalized", false}}},
        {"loss_check",
         {{"prob", ""},
          {"gt", ""},
          {"alpha", 2.0},
          {"sigma_mm", 0.0},
          {"dice_eps", 1e-5},
          {"ce_clamp_eps", 1e-7},
          {"fd_samples", 64},
          {"fd_step", 1e-4}}},
    };
}

// Reject unknown keys and type mismatches against the default skeleton;
// omitted keys keep their defaults.
void merge_config(json& base, const json& user, const std::string& prefix) {
    if (!user.is_object())
        throw ConfigError("config: expected an object at " +
                          (prefix.empty() ? "top level" : prefix));
    for (const auto& [key, value] : user.items()) {
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        if (!base.contains(key)) throw ConfigError("config: unknown key \"" + path + "\"");
        json& slot = base[key];
        if (slot.is_object()) {
            merge_config(slot, value, path);
        } else if (slot.is_array()) {
            if (!value.is_array() || value.size() != slot.size())
                throw ConfigError("config: \"" + path + "\" must be an array of " +
                                  std::to_string(slot.size()));
            slot = value;
        } else if (slot.is_string()) {
            if (!value.is_string())
                throw ConfigError("config: \"" + path + "\" must be a string");
            slot = value;
        } else if (slot.is_boolean()) {
            if (!value.is_boolean())
                throw ConfigError("config: \"" + path + "\" must be a boolean");
            slot = value;
        } else {
            if (!value.is_number())
                throw ConfigError("config: \"" + path + "\" must be a number");
            slot = value;
        }
    }
}

json load_config(const std::string& path) {
    json cfg = default_config();
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    json user;
    try {
        in >> user;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    merge_config(cfg, user, "");
    return cfg;
}

void echo_config(const json& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::ofstream out(out_dir / "config.json", std::ios::trunc);
    if (!out) throw IoError("cannot write effective config to " + out_dir.string());
    out << cfg.dump(2) << "\n";
}

Index3 index3_of(const json& a) {
    return {a.at(0).get<int>(), a.at(1).get<int>(), a.at(2).get<int>()};
}
Vec3 vec3_of(const json& a) {
    return {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
}

// ---- subcommands ----------------------------------------------------------

int cmd_phantom(const json& cfg) {
    const json& p = cfg.at("phantom");
    PhantomConfig pc;
    pc.tree.depth = p.at("depth").get<int>();
    pc.tree.root_radius_mm = p.at("root_radius_mm").get<double>();
    pc.tree.root_length_mm = p.at("root_length_mm").get<double>();
    pc.tree.ratio = p.at("ratio").get<double>();
    pc.tree.angle_deg = p.at("angle_deg").get<double>();
    pc.tree.jitter = p.at("jitter").get<double>();
    pc.tree.seed = cfg.at("seed").get<std::uint64_t>();
    pc.tree.segmental_generation = p.at("segmental_generation").get<int>();
    pc.tree.max_tilt_deg = p.at("max_tilt_deg").get<double>();
    pc.dims = index3_of(p.at("dims"));
    pc.spacing = vec3_of(p.at("spacing_mm"));
    pc.noise_sd_hu = p.at("noise_sd_hu").get<double>();
    pc.centerline_step_mm = p.at("centerline_step_mm").get<double>();
    pc.lung_inflation = p.at("lung_inflation").get<double>();

    const PhantomOutput ph = build_phantom(pc);
    if (ph.clipped)
        std::cerr << "warning: tree extends outside the phantom geometry; clipped\n";

    const fs::path out = cfg.at("out").get<std::string>();
    fs::create_directories(out);
    write_nifti(ph.intensity, (out / "intensity.nii").string());
    write_nifti(ph.airway_gt, (out / "airway_gt.nii").string());
    write_nifti(ph.lung_mask, (out / "lung_mask.nii").string());
    write_nifti(ph.region_labels, (out / "region_labels.nii").string());
    write_centerlines_csv(ph.centerlines, (out / "centerlines.csv").string());
    write_branch_table_csv(ph.branch_table, (out / "branches.csv").string());
    echo_config(cfg, out);
    std::cout << "phantom: " << ph.tree.branches.size() << " branches, "
              << ph.airway_gt.foreground_count() << " airway voxels -> " << out.string()
              << "\n";
    return 0;
}

int cmd_segment(const json& cfg) {
    const json& s = cfg.at("segment");
    const std::string input = s.at("input").get<std::string>();
    if (input.empty()) throw ConfigError("segment: input NIfTI path required");
    const VoxelGrid intensity = read_nifti(input);

    LungParams lung_params;
    lung_params.threshold_hu = s.at("lung_threshold_hu").get<double>();
    const Mask lung = segment_lung_coarse(intensity, lung_params);

    const int margin = s.at("crop_margin_voxels").get<int>();
    auto [cropped, box] = crop_to_bbox(intensity, lung, margin);

    const fs::path out = cfg.at("out").get<std::string>();
    fs::create_directories(out);

    Mask pred_cropped(cropped.dims, cropped.spacing, cropped.origin);
    const std::string method = s.at("method").get<std::string>();
    if (method == "region-grow") {
        Index3 seed = index3_of(s.at("seed_voxel"));
        if (seed[0] >= 0) {
            for (int i = 0; i < 3; ++i) seed[i] -= box.lo[i];  // full-volume coords
        } else {
            TracheaSeedParams tp;
            const json& t = s.at("trachea");
            tp.top_fraction = t.at("top_fraction").get<double>();
            tp.air_threshold_hu = t.at("air_threshold_hu").get<double>();
            tp.min_area_mm2 = t.at("min_area_mm2").get<double>();
            tp.max_area_mm2 = t.at("max_area_mm2").get<double>();
            seed = find_trachea_seed(cropped, tp);
        }
        RegionGrowParams gp;
        const json& g = s.at("grow");
        gp.t_start_hu = g.at("t_start_hu").get<double>();
        gp.t_max_hu = g.at("t_max_hu").get<double>();
        gp.t_step_hu = g.at("t_step_hu").get<double>();
        gp.explosion_ratio = g.at("explosion_ratio").get<double>();
        auto [mask, trace] = region_grow_airway(cropped, seed, gp);
        pred_cropped = std::move(mask);
        write_growth_trace_csv(trace, (out / "growth_trace.csv").string());
        if (trace.leakage)
            std::cerr << "warning: leakage detected; stopped at "
                      << trace.chosen_threshold_hu << " HU\n";
    } else if (method == "predictor") {
        const json& nrm = s.at("normalize");
        const VoxelGrid normalized = clip_normalize(
            cropped, nrm.at("lo_hu").get<double>(), nrm.at("hi_hu").get<double>());
        Index3 window = index3_of(s.at("window"));
        for (int i = 0; i < 3; ++i) window[i] = std::min(window[i], cropped.dims[i]);

        Predictor predictor;
        const std::string kind = s.at("predictor").get<std::string>();
        if (kind == "constant") {
            const float value = s.at("predictor_value").get<float>();
            predictor = [value](const VoxelGrid& patch) {
                VoxelGrid out(patch.dims, patch.spacing, patch.origin, DType::F32);
                std::fill(out.data.begin(), out.data.end(), value);
                return out;
            };
        } else if (kind == "air-threshold") {
            // airway-like where the normalized intensity is low
            predictor = [](const VoxelGrid& patch) {
                VoxelGrid out(patch.dims, patch.spacing, patch.origin, DType::F32);
                for (std::size_t i = 0; i < patch.data.size(); ++i)
                    out.data[i] = 1.0f - patch.data[i];
                return out;
            };
        } else {
            throw ConfigError("segment: unknown predictor \"" + kind + "\"");
        }
        const VoxelGrid prob =
            sliding_window_infer(normalized, window, s.at("overlap").get<double>(), predictor);
        pred_cropped = binarize(prob, s.at("binarize_threshold").get<double>());
    } else {
        throw ConfigError("segment: unknown method \"" + method + "\"");
    }

    pred_cropped = largest_component(pred_cropped);
    Mask reference(intensity.dims, intensity.spacing, intensity.origin);
    const Mask pred = embed_mask(pred_cropped, box, reference);
    write_nifti(pred, (out / "pred.nii").string());
    write_nifti(lung, (out / "lung.nii").string());
    echo_config(cfg, out);
    std::cout << "segment: " << pred.foreground_count() << " airway voxels -> "
              << (out / "pred.nii").string() << "\n";
    return 0;
}

int cmd_eval(const json& cfg) {
    const json& e = cfg.at("eval");
    const Mask pred = to_mask(read_nifti(e.at("pred").get<std::string>()));
    const Mask gt = to_mask(read_nifti(e.at("gt").get<std::string>()));
    const auto centerlines =
        read_centerlines_csv(e.at("centerlines").get<std::string>());
    const double tol = e.at("tolerance_mm").get<double>();

    const EvalReport report = evaluate_segmentation(pred, gt, centerlines, tol);
    const fs::path out = cfg.at("out").get<std::string>();
    fs::create_directories(out);
    json j{{"dice", report.dice},
           {"cl_recall", report.cl_recall},
           {"gt_volume_mm3", report.gt_volume_mm3},
           {"pred_volume_mm3", report.pred_volume_mm3},
           {"tolerance_mm", tol}};
    std::ofstream of(out / "eval.json", std::ios::trunc);
    of << j.dump(2) << "\n";
    echo_config(cfg, out);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_quant(const json& cfg) {
    const json& q = cfg.at("quant");
    const Mask airway = to_mask(read_nifti(q.at("airway").get<std::string>()));
    const Mask lung = to_mask(read_nifti(q.at("lung").get<std::string>()));
    const LabelMap labels = to_labels(read_nifti(q.at("labels").get<std::string>()));
    std::optional<LabelMap> lobar;
    if (!q.at("lobar_labels").get<std::string>().empty())
        lobar = to_labels(read_nifti(q.at("lobar_labels").get<std::string>()));

    const Mask restricted = restrict_to_lung(airway, lung);
    const RegionalVolumes rv =
        regional_volumes(restricted, labels, lobar ? &*lobar : nullptr);

    SubjectRecord rec;
    const json& subj = q.at("subject");
    rec.id = subj.at("id").get<std::string>();
    rec.group = subj.at("group").get<std::string>();
    rec.sex = subj.at("sex").get<std::string>();
    if (subj.at("age").get<double>() >= 0) rec.age_years = subj.at("age").get<double>();
    if (subj.at("height_cm").get<double>() > 0)
        rec.height_cm = subj.at("height_cm").get<double>();
    if (subj.at("weight_kg").get<double>() > 0)
        rec.weight_kg = subj.at("weight_kg").get<double>();
    if (rec.id.empty()) throw ConfigError("quant: subject id required");
    rec.volumes_mm3 = rv.volumes_mm3;
    if (!rec.bsa_m2())
        std::cerr << "warning: subject \"" << rec.id
                  << "\" lacks height/weight; bsa column left empty\n";

    const fs::path out = cfg.at("out").get<std::string>();
    fs::create_directories(out);
    std::string cohort = q.at("cohort_csv").get<std::string>();
    if (cohort.empty()) cohort = (out / "cohort.csv").string();
    append_subject_csv(rec, cohort);
    echo_config(cfg, out);
    std::cout << "quant: subject " << rec.id << " ("
              << (rv.lobar_from_map ? "lobar map" : "lobar = segment sums")
              << ") appended to " << cohort << "\n";
    return 0;
}

void write_demographics_table(const std::string& csv_path, const fs::path& out) {
    const CsvTable t = read_csv(csv_path);
    const int cv = t.column("variable"), ck = t.column("kind");
    CsvTable report;
    report.header = {"variable", "kind",        "statistic",  "df",
                     "p",        "p_one_sided", "p_two_sided", "p_formatted",
                     "significant"};
    auto num = [&](const std::vector<std::string>& row, const char* name) {
        return std::stod(row[t.column(name)]);
    };
    for (const auto& row : t.rows) {
        const std::string kind = row[ck];
        if (kind == "continuous") {
            const SummaryStat a{static_cast<std::size_t>(num(row, "n0")),
                                num(row, "mean0"), num(row, "sd0")};
            const SummaryStat b{static_cast<std::size_t>(num(row, "n1")),
                                num(row, "mean1"), num(row, "sd1")};
            const TestResult r = t_test_summary(a, b);
            report.rows.push_back({row[cv], kind, std::to_string(r.statistic),
                                   std::to_string(r.df), std::to_string(r.p), "", "",
                                   format_p_value(r.p), r.p < 0.05 ? "1" : "0"});
        } else if (kind == "categorical") {
            const auto a = static_cast<long long>(num(row, "a"));
            const auto b = static_cast<long long>(num(row, "b"));
            const auto c = static_cast<long long>(num(row, "c"));
            const auto d = static_cast<long long>(num(row, "d"));
            const FisherResult r = fisher_exact_2x2(a, b, c, d);
            report.rows.push_back({row[cv], kind, std::to_string(a), "",
                                   std::to_string(r.two_sided.p),
                                   std::to_string(r.one_sided.p),
                                   std::to_string(r.two_sided.p),
                                   format_p_value(r.two_sided.p),
                                   r.two_sided.p < 0.05 ? "1" : "0"});
        } else {
            throw ConfigError("demographics: kind must be continuous or categorical");
        }
    }
    write_csv((out / "table_demographics.csv").string(), report);
}

int cmd_compare(const json& cfg) {
    const json& c = cfg.at("compare");
    const fs::path out = cfg.at("out").get<std::string>();
    fs::create_directories(out);
    const TVariant variant = c.at("variant").get<std::string>() == "welch"
                                 ? TVariant::Welch
                                 : TVariant::Pooled;

    std::vector<CompareRow> lobar, segmental;
    const std::string subjects_csv = c.at("subjects_csv").get<std::string>();
    if (!subjects_csv.empty()) {
        const CohortTable cohort = build_cohort(read_subject_csv(subjects_csv));
        for (const auto& missing : cohort.missing_fields)
            std::cerr << "warning: missing field " << missing << "\n";
        const bool normalized = c.at("normalized").get<bool>();
        lobar = group_compare(cohort, lobe_codes(), normalized, variant);
        segmental = group_compare(cohort, segment_codes(), normalized, variant);
    } else {
        const std::string lob = c.at("lobar_summary_csv").get<std::string>();
        const std::string seg = c.at("segmental_summary_csv").get<std::string>();
        if (lob.empty() && seg.empty())
            throw ConfigError(
                "compare: provide subjects_csv or summary CSVs (lobar/segmental)");
        if (!lob.empty()) lobar = group_compare(read_summary_csv(lob), variant);
        if (!seg.empty()) segmental = group_compare(read_summary_csv(seg), variant);
    }

    if (!lobar.empty()) write_report_csv(lobar, (out / "table_lobar.csv").string());
    if (!segmental.empty()) {
        write_report_csv(segmental, (out / "table_segmental.csv").string());
        write_tvalue_csv(segmental, (out / "tvalues.csv").string());
    }
    const std::string demo = c.at("demographics_csv").get<std::string>();
    if (!demo.empty()) write_demographics_table(demo, out);

    echo_config(cfg, out);
    for (const auto& rows : {lobar, segmental})
        for (const auto& r : rows)
            std::cout << r.region << ": p = " << r.p_formatted
                      << (r.significant ? " *" : "") << "\n";
    return 0;
}

int cmd_loss_check(const json& cfg) {
    const json& l = cfg.at("loss_check");
    const VoxelGrid prob = read_nifti(l.at("prob").get<std::string>());
    const Mask gt = to_mask(read_nifti(l.at("gt").get<std::string>()));
    if (prob.dims != gt.dims)
        throw GeometryError("loss-check: prob and gt dims differ");

    const double alpha = l.at("alpha").get<double>();
    double sigma = l.at("sigma_mm").get<double>();
    if (sigma <= 0)
        sigma = 2.0 * std::max({gt.spacing[0], gt.spacing[1], gt.spacing[2]});
    const LossParams params{l.at("dice_eps").get<double>(),
                            l.at("ce_clamp_eps").get<double>()};

    const VoxelGrid w = boundary_weights(gt, alpha, sigma);
    const LossValue loss = hybrid_loss(prob, gt, w, params);

    // spot-check the analytic gradient with central differences; the step is
    // measured back from the stored floats
    const int samples = l.at("fd_samples").get<int>();
    const double h = l.at("fd_step").get<double>();
    std::mt19937_64 rng(cfg.at("seed").get<std::uint64_t>());
    VoxelGrid probe = prob;
    double max_rel = 0.0, max_abs = 0.0;
    for (int k = 0; k < samples; ++k) {
        const std::size_t i = rng() % probe.data.size();
        const float saved = probe.data[i];
        probe.data[i] = static_cast<float>(saved + h);
        const double x_up = probe.data[i];
        const double up = hybrid_loss(probe, gt, w, params).total;
        probe.data[i] = static_cast<float>(saved - h);
        const double x_dn = probe.data[i];
        const double dn = hybrid_loss(probe, gt, w, params).total;
        probe.data[i] = saved;
        if (x_up == x_dn) continue;  // p clamped at both ends
        const double fd = (up - dn) / (x_up - x_dn);
        const double analytic = loss.gradient.data[i];
        const double mag = std::max(std::abs(fd), std::abs(analytic));
        max_abs = std::max(max_abs, std::abs(fd - analytic));
        if (mag > 1e-6)
            max_rel = std::max(max_rel, std::abs(fd - analytic) / mag);
    }

    const fs::path out = cfg.at("out").get<std::string>();
    fs::create_directories(out);
    write_nifti(loss.gradient, (out / "gradient.nii").string());
    json j{{"total", loss.total},
           {"dice_term", loss.dice_term},
           {"ce_term", loss.ce_term},
           {"alpha", alpha},
           {"sigma_mm", sigma},
           {"fd_check",
            {{"samples", samples}, {"max_rel_error", max_rel}, {"max_abs_error", max_abs}}}};
    std::ofstream of(out / "loss_report.json", std::ios::trunc);
    of << j.dump(2) << "\n";
    echo_config(cfg, out);
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"airway quantification pipeline"};
    app.require_subcommand(1);
    app.fallthrough();  // global --config/--seed/--out may follow the subcommand

    std::string config_path, out_dir;
    long long seed = -1;
    app.add_option("--config", config_path, "JSON config file")->envname("AIRQUANT_CONFIG");
    app.add_option("--seed", seed, "RNG seed (overrides config)");
    app.add_option("--out", out_dir, "output directory (overrides config)");

    auto* sc_phantom = app.add_subcommand("phantom", "generate a phantom bundle");
    int depth = -1;
    double noise_sd = -1.0;
    sc_phantom->add_option("--depth", depth, "tree generations");
    sc_phantom->add_option("--noise-sd", noise_sd, "intensity noise SD (HU)");

    auto* sc_segment = app.add_subcommand("segment", "segment an intensity volume");
    std::string seg_input, seg_method;
    sc_segment->add_option("--input", seg_input, "input intensity NIfTI");
    sc_segment->add_option("--method", seg_method, "region-grow | predictor");

    auto* sc_eval = app.add_subcommand("eval", "evaluate a segmentation");
    std::string ev_pred, ev_gt, ev_cl;
    double ev_tol = -1.0;
    sc_eval->add_option("--pred", ev_pred, "predicted mask NIfTI");
    sc_eval->add_option("--gt", ev_gt, "ground-truth mask NIfTI");
    sc_eval->add_option("--centerlines", ev_cl, "ground-truth centerline CSV");
    sc_eval->add_option("--tolerance", ev_tol, "centerline tolerance (mm)");

    auto* sc_quant = app.add_subcommand("quant", "regional volumes for one subject");
    std::string q_airway, q_lung, q_labels, q_id, q_group, q_cohort;
    sc_quant->add_option("--airway", q_airway, "airway mask NIfTI");
    sc_quant->add_option("--lung", q_lung, "lung mask NIfTI");
    sc_quant->add_option("--labels", q_labels, "segment label map NIfTI");
    sc_quant->add_option("--id", q_id, "subject id");
    sc_quant->add_option("--group", q_group, "subject group");
    sc_quant->add_option("--cohort", q_cohort, "cohort CSV to append to");

    auto* sc_compare = app.add_subcommand("compare", "group comparison tables");
    std::string cp_subjects, cp_lobar, cp_segmental, cp_demo;
    sc_compare->add_option("--subjects", cp_subjects, "cohort subject CSV");
    sc_compare->add_option("--lobar-summary", cp_lobar, "lobar summary CSV");
    sc_compare->add_option("--segmental-summary", cp_segmental, "segmental summary CSV");
    sc_compare->add_option("--demographics", cp_demo, "demographics CSV");

    auto* sc_loss = app.add_subcommand("loss-check", "loss values and gradient check");
    std::string lc_prob, lc_gt;
    sc_loss->add_option("--prob", lc_prob, "probability NIfTI");
    sc_loss->add_option("--gt", lc_gt, "ground-truth mask NIfTI");

    try {
        app.parse(argc, argv);

        json cfg = load_config(config_path);
        if (seed >= 0) cfg["seed"] = seed;
        if (!out_dir.empty()) cfg["out"] = out_dir;
        if (depth > 0) cfg["phantom"]["depth"] = depth;
        if (noise_sd >= 0) cfg["phantom"]["noise_sd_hu"] = noise_sd;
        if (!seg_input.empty()) cfg["segment"]["input"] = seg_input;
        if (!seg_method.empty()) cfg["segment"]["method"] = seg_method;
        if (!ev_pred.empty()) cfg["eval"]["pred"] = ev_pred;
        if (!ev_gt.empty()) cfg["eval"]["gt"] = ev_gt;
        if (!ev_cl.empty()) cfg["eval"]["centerlines"] = ev_cl;
        if (ev_tol >= 0) cfg["eval"]["tolerance_mm"] = ev_tol;
        if (!q_airway.empty()) cfg["quant"]["airway"] = q_airway;
        if (!q_lung.empty()) cfg["quant"]["lung"] = q_lung;
        if (!q_labels.empty()) cfg["quant"]["labels"] = q_labels;
        if (!q_id.empty()) cfg["quant"]["subject"]["id"] = q_id;
        if (!q_group.empty()) cfg["quant"]["subject"]["group"] = q_group;
        if (!q_cohort.empty()) cfg["quant"]["cohort_csv"] = q_cohort;
        if (!cp_subjects.empty()) cfg["compare"]["subjects_csv"] = cp_subjects;
        if (!cp_lobar.empty()) cfg["compare"]["lobar_summary_csv"] = cp_lobar;
        if (!cp_segmental.empty()) cfg["compare"]["segmental_summary_csv"] = cp_segmental;
        if (!cp_demo.empty()) cfg["compare"]["demographics_csv"] = cp_demo;
        if (!lc_prob.empty()) cfg["loss_check"]["prob"] = lc_prob;
        if (!lc_gt.empty()) cfg["loss_check"]["gt"] = lc_gt;

        if (sc_phantom->parsed()) return cmd_phantom(cfg);
        if (sc_segment->parsed()) return cmd_segment(cfg);
        if (sc_eval->parsed()) return cmd_eval(cfg);
        if (sc_quant->parsed()) return cmd_quant(cfg);
        if (sc_compare->parsed()) return cmd_compare(cfg);
        if (sc_loss->parsed()) return cmd_loss_check(cfg);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {  // includes NIfTI format errors
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const GeometryError& e) {
        std::cerr << "geometry error: " << e.what() << "\n";
        return 4;
    } catch (const DegenerateError& e) {
        std::cerr << "degenerate input: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
