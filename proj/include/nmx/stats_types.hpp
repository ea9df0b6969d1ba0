#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "nmx/error.hpp"
#include "nmx/matrix.hpp"
#include "nmx/util.hpp"

namespace nmx {

enum class Hemisphere { left, right };
enum class TableKind { cortical, subcortical };
enum class Label { recurrence, no_recurrence, unlabeled };

inline const char* hemisphere_name(Hemisphere h) { return h == Hemisphere::left ? "left" : "right"; }
inline const char* kind_name(TableKind k) { return k == TableKind::cortical ? "cortical" : "subcortical"; }

inline std::string label_to_string(Label l) {
    switch (l) {
        case Label::recurrence: return "recurrence";
        case Label::no_recurrence: return "no_recurrence";
        case Label::unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

inline Label label_from_string(std::string_view s) {
    std::string v = to_lower(trim(s));
    if (v == "recurrence") return Label::recurrence;
    if (v == "no_recurrence" || v == "no-recurrence" || v == "non_recurrence") return Label::no_recurrence;
    if (v == "unlabeled") return Label::unlabeled;
    raise(errc::invalid_label, "unknown label '" + std::string(s) + "'");
}

// The eight cortical parameters, in table column order.
inline const std::vector<std::string>& cortical_param_labels() {
    static const std::vector<std::string> labels = {
        "SurfArea", "GrayVol", "ThickAvg", "ThickStd",
        "MeanCurv", "GausCurv", "FoldInd", "CurvInd",
    };
    return labels;
}

// The five subcortical parameters, in table column order.
inline const std::vector<std::string>& subcortical_param_labels() {
    static const std::vector<std::string> labels = {
        "NVoxels", "Volume", "normMean", "normStdDev", "normMax",
    };
    return labels;
}

// Desikan-Killiany cortical parcellation, standard aparc row order.
inline const std::vector<std::string>& desikan_killiany_regions() {
    static const std::vector<std::string> regions = {
        "bankssts", "caudalanteriorcingulate", "caudalmiddlefrontal", "cuneus",
        "entorhinal", "fusiform", "inferiorparietal", "inferiortemporal",
        "isthmuscingulate", "lateraloccipital", "lateralorbitofrontal", "lingual",
        "medialorbitofrontal", "middletemporal", "parahippocampal", "paracentral",
        "parsopercularis", "parsorbitalis", "parstriangularis", "pericalcarine",
        "postcentral", "posteriorcingulate", "precentral", "precuneus",
        "rostralanteriorcingulate", "rostralmiddlefrontal", "superiorfrontal",
        "superiorparietal", "superiortemporal", "supramarginal", "frontalpole",
        "temporalpole", "transversetemporal", "insula",
    };
    return regions;
}

// Lateralized segmentation structures paired across hemispheres
// (base names; stats rows carry Left-/Right- prefixes).
inline const std::vector<std::string>& default_subcortical_structures() {
    static const std::vector<std::string> structures = {
        "Lateral-Ventricle", "Inf-Lat-Vent", "Cerebellum-White-Matter",
        "Cerebellum-Cortex", "Thalamus-Proper", "Caudate", "Putamen",
        "Pallidum", "Hippocampus", "Amygdala", "Accumbens-area",
        "VentralDC", "vessel", "choroid-plexus",
    };
    return structures;
}

// Per-hemisphere matrix of region-specific parameters: N regions x P parameters.
struct HemisphereTable {
    Hemisphere hemisphere = Hemisphere::left;
    TableKind kind = TableKind::cortical;
    std::vector<std::string> region_labels;
    std::vector<std::string> param_labels;
    Matrix values;

    std::size_t region_count() const { return region_labels.size(); }
    std::size_t param_count() const { return param_labels.size(); }
};

struct CorticalRegionRecord {
    std::string region_name;
    double surf_area = 0;   // mm^2
    double gray_vol = 0;    // mm^3
    double thick_avg = 0;   // mm
    double thick_std = 0;   // mm
    double mean_curv = 0;
    double gaus_curv = 0;
    double fold_ind = 0;
    double curv_ind = 0;
};

struct SubcorticalRegionRecord {
    std::string region_name;
    double n_voxels = 0;    // integral count, stored as real
    double volume = 0;      // mm^3
    double norm_mean = 0;
    double norm_std = 0;
    double norm_max = 0;
};

inline CorticalRegionRecord cortical_record(const HemisphereTable& t, std::size_t row) {
    return {t.region_labels[row], t.values.at(row, 0), t.values.at(row, 1), t.values.at(row, 2),
            t.values.at(row, 3), t.values.at(row, 4), t.values.at(row, 5), t.values.at(row, 6),
            t.values.at(row, 7)};
}

inline SubcorticalRegionRecord subcortical_record(const HemisphereTable& t, std::size_t row) {
    return {t.region_labels[row], t.values.at(row, 0), t.values.at(row, 1), t.values.at(row, 2),
            t.values.at(row, 3), t.values.at(row, 4)};
}

inline const std::vector<std::string>& cohort_manifest_header() {
    static const std::vector<std::string> header = {"subject_id", "label", "lh_aparc", "rh_aparc", "aseg"};
    return header;
}

// One subject: paired cortical and subcortical tables plus outcome label.
struct SubjectScan {
    std::string subject_id;
    HemisphereTable cortical_left, cortical_right;
    HemisphereTable subcortical_left, subcortical_right;
    Label label = Label::unlabeled;
};

struct ParseOptions {
    // Strict mode enforces the configured cortical region count and the full
    // subcortical structure list; lenient accepts whatever a file provides.
    bool lenient = false;
    std::size_t cortical_region_count = 34;
    std::vector<std::string> subcortical_structures = default_subcortical_structures();
};

// Line accounting so callers can verify no data row was silently dropped.
struct ParseStats {
    std::size_t data_rows = 0;
    std::size_t skipped_lines = 0;  // comments and blanks
    std::size_t total_lines = 0;
};

}  // namespace nmx
