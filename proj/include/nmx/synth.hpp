#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "nmx/csv.hpp"
#include "nmx/error.hpp"
#include "nmx/rng.hpp"
#include "nmx/stats_types.hpp"
#include "nmx/util.hpp"

namespace nmx {

// Multiplicative one-sided shift applied to one parameter over a region
// subset, restricted to one class. Multiplicative keeps values positive and
// interacts cleanly with the scale-free features.
struct PlantedEffect {
    std::string param;
    TableKind kind = TableKind::cortical;
    Hemisphere hemisphere = Hemisphere::left;
    double shift = 1.0;
    Label target_class = Label::recurrence;
    std::vector<std::size_t> regions;
};

struct ParamProfile {
    double mean = 1.0;
    double rel_spread = 0.1;  // lognormal spread of per-region base means
};

inline const std::map<std::string, ParamProfile>& default_param_profiles() {
    static const std::map<std::string, ParamProfile> profiles = {
        {"SurfArea", {2400.0, 0.55}}, {"GrayVol", {7200.0, 0.55}},  {"ThickAvg", {2.55, 0.08}},
        {"ThickStd", {0.5, 0.15}},    {"MeanCurv", {0.13, 0.18}},   {"GausCurv", {0.026, 0.3}},
        {"FoldInd", {15.0, 0.5}},     {"CurvInd", {2.3, 0.45}},     {"NVoxels", {4200.0, 0.75}},
        {"Volume", {4000.0, 0.75}},   {"normMean", {78.0, 0.1}},    {"normStdDev", {7.5, 0.2}},
        {"normMax", {101.0, 0.04}},
    };
    return profiles;
}

struct SynthSpec {
    std::size_t n_positive = 0;
    std::size_t n_negative = 0;
    double noise_scale = 0.05;  // lognormal sigma per cell
    std::uint64_t seed = 0;
    std::vector<std::string> cortical_regions = desikan_killiany_regions();
    std::vector<std::string> subcortical_structures = default_subcortical_structures();
    std::map<std::string, ParamProfile> profiles = default_param_profiles();
    std::vector<PlantedEffect> plants;

    void validate() const;
    static SynthSpec parse(std::string_view text);
    static SynthSpec parse_file(const std::filesystem::path& path) { return parse(read_text_file(path)); }
};

namespace detail {

inline TableKind kind_of_param(const std::string& param) {
    const auto& cort = cortical_param_labels();
    if (std::find(cort.begin(), cort.end(), param) != cort.end()) return TableKind::cortical;
    const auto& sub = subcortical_param_labels();
    if (std::find(sub.begin(), sub.end(), param) != sub.end()) return TableKind::subcortical;
    raise(errc::invalid_spec, "unknown parameter '" + param + "'");
}

inline std::size_t param_column(TableKind kind, const std::string& param) {
    const auto& labels = kind == TableKind::cortical ? cortical_param_labels() : subcortical_param_labels();
    auto it = std::find(labels.begin(), labels.end(), param);
    return static_cast<std::size_t>(it - labels.begin());
}

inline std::string padded_index(std::size_t i, std::size_t width = 4) {
    std::string s = std::to_string(i);
    while (s.size() < width) s.insert(s.begin(), '0');
    return s;
}

}  // namespace detail

inline void SynthSpec::validate() const {
    if (n_positive + n_negative == 0) raise(errc::invalid_spec, "cohort size is zero");
    if (noise_scale < 0) raise(errc::invalid_spec, "noise_scale must be >= 0");
    if (cortical_regions.empty() || subcortical_structures.empty())
        raise(errc::invalid_spec, "region lists must be non-empty");
    for (const auto& p : {cortical_param_labels(), subcortical_param_labels()})
        for (const auto& label : p)
            if (!profiles.count(label)) raise(errc::invalid_spec, "no profile for parameter '" + label + "'");
    for (const auto& plant : plants) {
        if (plant.shift <= 0) raise(errc::invalid_spec, "plant shift must be positive");
        if (plant.target_class == Label::unlabeled) raise(errc::invalid_spec, "plant class must be labelled");
        std::size_t n_regions =
            plant.kind == TableKind::cortical ? cortical_regions.size() : subcortical_structures.size();
        if (plant.regions.empty()) raise(errc::invalid_spec, "plant needs at least one region index");
        for (std::size_t r : plant.regions)
            if (r >= n_regions)
                raise(errc::invalid_spec, "plant region index " + std::to_string(r) + " out of range");
    }
}

// Key-value config, '#' comments. Repeatable keys: plant, profile.
//   n_positive = 145
//   n_negative = 24
//   noise_scale = 0.05
//   seed = 7
//   plant = FoldInd left 0.6 positive 0 3 7 11 19
//   profile = FoldInd 15.0 0.5
inline SynthSpec SynthSpec::parse(std::string_view text) {
    SynthSpec spec;
    std::size_t line_no = 0;
    for (const auto& raw_line : split_char(text, '\n')) {
        ++line_no;
        std::string line = raw_line;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            raise(errc::invalid_config, "synth spec line " + std::to_string(line_no) + ": expected key = value");
        std::string key(trim(sv.substr(0, eq)));
        std::string value(trim(sv.substr(eq + 1)));
        auto bad = [&](const std::string& what) {
            raise(errc::invalid_config, "synth spec line " + std::to_string(line_no) + ": " + what);
        };

        if (key == "n_positive" || key == "n_negative" || key == "seed") {
            std::uint64_t v = 0;
            if (!try_parse_u64(value, v)) bad("'" + value + "' is not a non-negative integer");
            if (key == "n_positive") spec.n_positive = static_cast<std::size_t>(v);
            else if (key == "n_negative") spec.n_negative = static_cast<std::size_t>(v);
            else spec.seed = v;
        } else if (key == "noise_scale") {
            if (!try_parse_double(value, spec.noise_scale)) bad("'" + value + "' is not a number");
        } else if (key == "cortical_regions") {
            spec.cortical_regions.clear();
            for (auto& name : split_char(value, ','))
                if (!trim(name).empty()) spec.cortical_regions.emplace_back(trim(name));
        } else if (key == "subcortical_structures") {
            spec.subcortical_structures.clear();
            for (auto& name : split_char(value, ','))
                if (!trim(name).empty()) spec.subcortical_structures.emplace_back(trim(name));
        } else if (key == "profile") {
            auto tokens = split_whitespace(value);
            if (tokens.size() != 3) bad("profile wants: <param> <mean> <rel_spread>");
            ParamProfile p;
            if (!try_parse_double(tokens[1], p.mean) || !try_parse_double(tokens[2], p.rel_spread))
                bad("profile numbers unparseable");
            detail::kind_of_param(tokens[0]);
            spec.profiles[tokens[0]] = p;
        } else if (key == "plant") {
            auto tokens = split_whitespace(value);
            if (tokens.size() < 5) bad("plant wants: <param> <left|right> <shift> <positive|negative> <regions...>");
            PlantedEffect plant;
            plant.param = tokens[0];
            plant.kind = detail::kind_of_param(plant.param);
            if (tokens[1] == "left") plant.hemisphere = Hemisphere::left;
            else if (tokens[1] == "right") plant.hemisphere = Hemisphere::right;
            else bad("hemisphere must be left or right");
            if (!try_parse_double(tokens[2], plant.shift)) bad("shift unparseable");
            if (tokens[3] == "positive" || tokens[3] == "recurrence") plant.target_class = Label::recurrence;
            else if (tokens[3] == "negative" || tokens[3] == "no_recurrence")
                plant.target_class = Label::no_recurrence;
            else bad("class must be positive or negative");
            for (std::size_t i = 4; i < tokens.size(); ++i) {
                std::uint64_t r = 0;
                if (!try_parse_u64(tokens[i], r)) bad("region index '" + tokens[i] + "' unparseable");
                plant.regions.push_back(static_cast<std::size_t>(r));
            }
            spec.plants.push_back(std::move(plant));
        } else {
            bad("unknown key '" + key + "'");
        }
    }
    spec.validate();
    return spec;
}

// Deterministic cohort generation. A per-run lognormal region profile is
// shared by all subjects and hemispheres; per-cell lognormal noise then
// breaks the left/right symmetry, and plants multiply their target cells.
// noise_scale = 0 with no plants yields perfectly symmetric subjects.
inline std::vector<SubjectScan> generate_cohort(const SynthSpec& spec) {
    spec.validate();

    auto make_profile = [&](TableKind kind) {
        const auto& regions = kind == TableKind::cortical ? spec.cortical_regions : spec.subcortical_structures;
        const auto& params = kind == TableKind::cortical ? cortical_param_labels() : subcortical_param_labels();
        RngStream rng(spec.seed, kind == TableKind::cortical ? 1 : 2);
        Matrix base(regions.size(), params.size());
        for (std::size_t r = 0; r < regions.size(); ++r)
            for (std::size_t p = 0; p < params.size(); ++p) {
                const auto& prof = spec.profiles.at(params[p]);
                base.at(r, p) = prof.mean * std::exp(prof.rel_spread * rng.next_normal());
            }
        return base;
    };
    const Matrix cortical_base = make_profile(TableKind::cortical);
    const Matrix subcortical_base = make_profile(TableKind::subcortical);

    const std::size_t total = spec.n_positive + spec.n_negative;
    std::vector<SubjectScan> cohort;
    cohort.reserve(total);

    for (std::size_t i = 0; i < total; ++i) {
        const bool positive = i < spec.n_positive;
        SubjectScan scan;
        scan.label = positive ? Label::recurrence : Label::no_recurrence;
        scan.subject_id = (positive ? "pos_" : "neg_") +
                          detail::padded_index(positive ? i + 1 : i - spec.n_positive + 1);
        RngStream rng(spec.seed, 0x100000 + i);

        auto make_tables = [&](TableKind kind, const Matrix& base) {
            const auto& regions =
                kind == TableKind::cortical ? spec.cortical_regions : spec.subcortical_structures;
            const auto& params = kind == TableKind::cortical ? cortical_param_labels() : subcortical_param_labels();
            HemisphereTable left{Hemisphere::left, kind, regions, params, Matrix(regions.size(), params.size())};
            HemisphereTable right{Hemisphere::right, kind, regions, params, Matrix(regions.size(), params.size())};
            for (std::size_t r = 0; r < regions.size(); ++r)
                for (std::size_t p = 0; p < params.size(); ++p) {
                    left.values.at(r, p) = base.at(r, p) * std::exp(spec.noise_scale * rng.next_normal());
                    right.values.at(r, p) = base.at(r, p) * std::exp(spec.noise_scale * rng.next_normal());
                }
            return std::pair{std::move(left), std::move(right)};
        };
        auto [cl, cr] = make_tables(TableKind::cortical, cortical_base);
        auto [sl, sr] = make_tables(TableKind::subcortical, subcortical_base);
        scan.cortical_left = std::move(cl);
        scan.cortical_right = std::move(cr);
        scan.subcortical_left = std::move(sl);
        scan.subcortical_right = std::move(sr);

        for (const auto& plant : spec.plants) {
            if (plant.target_class != scan.label) continue;
            HemisphereTable& table =
                plant.kind == TableKind::cortical
                    ? (plant.hemisphere == Hemisphere::left ? scan.cortical_left : scan.cortical_right)
                    : (plant.hemisphere == Hemisphere::left ? scan.subcortical_left : scan.subcortical_right);
            std::size_t col = detail::param_column(plant.kind, plant.param);
            for (std::size_t r : plant.regions) table.values.at(r, col) *= plant.shift;
        }

        // voxel counts are integral; intensity max may not drop below the mean
        for (HemisphereTable* t : {&scan.subcortical_left, &scan.subcortical_right}) {
            for (std::size_t r = 0; r < t->region_count(); ++r) {
                t->values.at(r, 0) = std::max(0.0, std::round(t->values.at(r, 0)));
                t->values.at(r, 4) = std::max(t->values.at(r, 4), t->values.at(r, 2));
            }
        }
        cohort.push_back(std::move(scan));
    }
    return cohort;
}

namespace detail {

// FreeSurfer color-table ids for the default lateralized structures; synthetic
// files fall back to computed ids for custom lists.
inline std::pair<int, int> seg_ids(const std::string& base, std::size_t index) {
    static const std::map<std::string, std::pair<int, int>> lut = {
        {"Lateral-Ventricle", {4, 43}}, {"Inf-Lat-Vent", {5, 44}},
        {"Cerebellum-White-Matter", {7, 46}}, {"Cerebellum-Cortex", {8, 47}},
        {"Thalamus-Proper", {10, 49}}, {"Caudate", {11, 50}},
        {"Putamen", {12, 51}}, {"Pallidum", {13, 52}},
        {"Hippocampus", {17, 53}}, {"Amygdala", {18, 54}},
        {"Accumbens-area", {26, 58}}, {"VentralDC", {28, 60}},
        {"vessel", {30, 62}}, {"choroid-plexus", {31, 63}},
    };
    if (auto it = lut.find(base); it != lut.end()) return it->second;
    int k = static_cast<int>(index);
    return {1000 + k, 2000 + k};
}

inline std::string aparc_text(const HemisphereTable& t) {
    std::string out;
    out += "# Table of FreeSurfer cortical parcellation anatomical statistics\n";
    out += std::string("# hemi ") + (t.hemisphere == Hemisphere::left ? "lh" : "rh") + "\n";
    out += "# anatomy_type surface\n";
    out += "# ColHeaders StructName NumVert SurfArea GrayVol ThickAvg ThickStd MeanCurv GausCurv FoldInd CurvInd\n";
    for (std::size_t r = 0; r < t.region_count(); ++r) {
        auto rec = cortical_record(t, r);
        long long num_vert = std::llround(rec.surf_area * 1.8) + 40;
        out += rec.region_name + "  " + std::to_string(num_vert);
        for (double v : {rec.surf_area, rec.gray_vol, rec.thick_avg, rec.thick_std, rec.mean_curv,
                         rec.gaus_curv, rec.fold_ind, rec.curv_ind})
            out += "  " + format_double(v);
        out += "\n";
    }
    return out;
}

inline std::string aseg_text(const HemisphereTable& left, const HemisphereTable& right) {
    std::string out;
    out += "# Title Segmentation Statistics\n";
    out += "# anatomy_type volume\n";
    out += "# ColHeaders Index SegId NVoxels Volume_mm3 StructName normMean normStdDev normMin normMax normRange\n";
    int index = 1;
    auto emit_side = [&](const HemisphereTable& t, bool is_left) {
        for (std::size_t r = 0; r < t.region_count(); ++r) {
            auto rec = subcortical_record(t, r);
            auto [lid, rid] = seg_ids(rec.region_name, r);
            double norm_min = std::max(0.0, rec.norm_mean - 2.5 * rec.norm_std);
            out += std::to_string(index++);
            out += "  " + std::to_string(is_left ? lid : rid);
            out += "  " + format_double(rec.n_voxels);
            out += "  " + format_double(rec.volume);
            out += std::string("  ") + (is_left ? "Left-" : "Right-") + rec.region_name;
            out += "  " + format_double(rec.norm_mean);
            out += "  " + format_double(rec.norm_std);
            out += "  " + format_double(norm_min);
            out += "  " + format_double(rec.norm_max);
            out += "  " + format_double(rec.norm_max - norm_min);
            out += "\n";
        }
    };
    emit_side(left, true);
    emit_side(right, false);
    return out;
}

}  // namespace detail

// Writes per-subject lh.aparc.stats / rh.aparc.stats / aseg.stats in the exact
// format the parser reads, plus a manifest CSV. Returns the manifest path.
// Values print in shortest round-trip form, so re-parsing is cell-exact.
inline std::filesystem::path write_stats_tree(const std::vector<SubjectScan>& cohort,
                                              const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    CsvWriter manifest(cohort_manifest_header());
    for (const auto& scan : cohort) {
        auto subject_dir = out_dir / scan.subject_id;
        write_text_file(subject_dir / "lh.aparc.stats", detail::aparc_text(scan.cortical_left));
        write_text_file(subject_dir / "rh.aparc.stats", detail::aparc_text(scan.cortical_right));
        write_text_file(subject_dir / "aseg.stats",
                        detail::aseg_text(scan.subcortical_left, scan.subcortical_right));
        manifest.add_row({scan.subject_id, label_to_string(scan.label), scan.subject_id + "/lh.aparc.stats",
                          scan.subject_id + "/rh.aparc.stats", scan.subject_id + "/aseg.stats"});
    }
    auto manifest_path = out_dir / "manifest.csv";
    manifest.save(manifest_path);
    return manifest_path;
}

}  // namespace nmx
