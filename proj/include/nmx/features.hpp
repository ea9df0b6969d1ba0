#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nmx/csv.hpp"
#include "nmx/error.hpp"
#include "nmx/matrix.hpp"
#include "nmx/stats_types.hpp"
#include "nmx/util.hpp"

namespace nmx {

// ---------------------------------------------------------------------------
// Seven whole-brain hemispheric-asymmetry features per morphometric parameter.
//
//   f1  cosine similarity of the paired region vectors
//   f2  dot product of the per-hemisphere normalized absolute deviations
//   f3  min-ratio of counts above mean + eps (per-side population std)
//   f4  min-ratio of counts below mean - eps
//   f5  mean of the entrywise min-ratio vector
//   f6  population std of the min-ratio vector
//   f7  min of the min-ratio vector
//
// All seven are symmetric under hemisphere swap and invariant to scaling both
// hemispheres by the same positive factor.
// ---------------------------------------------------------------------------

inline double vec_mean(std::span<const double> v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// population convention: divide by N
inline double vec_pop_std(std::span<const double> v) {
    double m = vec_mean(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

inline double vec_dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double vec_norm(std::span<const double> v) { return std::sqrt(vec_dot(v, v)); }

enum class ZeroRatioPolicy { both_zero_is_one_one_zero_is_zero };
enum class SignMismatchPolicy { clamp_to_zero };
enum class OutlierSide { above, below };

struct AsymmetryConfig {
    double epsilon_multiplier = 1.0;  // eps = multiplier * per-side population std
    ZeroRatioPolicy zero_ratio_policy = ZeroRatioPolicy::both_zero_is_one_one_zero_is_zero;
    SignMismatchPolicy sign_mismatch_policy = SignMismatchPolicy::clamp_to_zero;
    double mean_guard = 1e-12;
};

// f1: (xL . xR) / (|xL| |xR|)
inline double cosine_feature(std::span<const double> left, std::span<const double> right) {
    if (left.size() != right.size()) raise(errc::arity_mismatch, "cosine_feature: length mismatch");
    double nl = vec_norm(left);
    double nr = vec_norm(right);
    if (nl == 0.0 || nr == 0.0) raise(errc::zero_norm_vector, "cosine_feature: zero-norm input");
    return vec_dot(left, right) / (nl * nr);
}

// f2: Z_side = |mean - x| / mean elementwise; returns Z_L . Z_R
inline double deviation_feature(std::span<const double> left, std::span<const double> right,
                                double mean_guard = 1e-12) {
    if (left.size() != right.size()) raise(errc::arity_mismatch, "deviation_feature: length mismatch");
    double ml = vec_mean(left);
    double mr = vec_mean(right);
    if (std::abs(ml) <= mean_guard || std::abs(mr) <= mean_guard)
        raise(errc::degenerate_mean, "deviation_feature: mean magnitude within guard");
    double s = 0;
    for (std::size_t i = 0; i < left.size(); ++i)
        s += (std::abs(ml - left[i]) / ml) * (std::abs(mr - right[i]) / mr);
    return s;
}

// min(a/b, b/a) over non-negative integer counts, with the zero-count policy:
// 0/0 -> 1 (symmetric absence), x/0 or 0/x -> 0 (maximal asymmetry).
inline double count_min_ratio(std::size_t left_count, std::size_t right_count) {
    if (left_count == 0 && right_count == 0) return 1.0;
    if (left_count == 0 || right_count == 0) return 0.0;
    double a = static_cast<double>(left_count);
    double b = static_cast<double>(right_count);
    return std::min(a / b, b / a);
}

// f3 (side = above) and f4 (side = below): outlier-count min-ratio with the
// cutoff at mean +/- epsilon_multiplier * std, computed per side. Counting is
// strict, with a 1e-12 relative guard on the cutoff so values that sit exactly
// on it in real arithmetic (every entry of a constant vector; the extremes of
// a length-2 vector) resolve to "not outside" regardless of rounding, keeping
// the counts scale-invariant.
inline double outlier_ratio(std::span<const double> left, std::span<const double> right,
                            double epsilon_multiplier, OutlierSide side) {
    if (left.size() != right.size()) raise(errc::arity_mismatch, "outlier_ratio: length mismatch");
    auto count_side = [&](std::span<const double> v) {
        double m = vec_mean(v);
        double eps = epsilon_multiplier * vec_pop_std(v);
        double guard = 1e-12 * (std::abs(m) + eps);
        std::size_t n = 0;
        for (double x : v) {
            if (side == OutlierSide::above ? x > m + eps + guard : x < m - eps - guard) ++n;
        }
        return n;
    };
    return count_min_ratio(count_side(left), count_side(right));
}

// Entrywise r_j = min(L_j/R_j, R_j/L_j); 0/0 -> 1, one zero -> 0, and a
// negative min (sign mismatch between hemispheres) clamps to 0. Entries land
// in [0, 1] for all inputs. `clamped` reports how many entries were clamped.
inline std::vector<double> ratio_vector(std::span<const double> left, std::span<const double> right,
                                        const AsymmetryConfig& cfg = {}, std::size_t* clamped = nullptr) {
    if (left.size() != right.size()) raise(errc::arity_mismatch, "ratio_vector: length mismatch");
    (void)cfg;  // both policies have a single defined behavior in v1
    std::vector<double> r(left.size());
    std::size_t clamp_count = 0;
    for (std::size_t i = 0; i < left.size(); ++i) {
        double a = left[i];
        double b = right[i];
        if (a == 0.0 && b == 0.0) {
            r[i] = 1.0;
        } else if (a == 0.0 || b == 0.0) {
            r[i] = 0.0;
        } else {
            double m = std::min(a / b, b / a);
            if (m < 0.0) {
                m = 0.0;
                ++clamp_count;
            }
            r[i] = m;
        }
    }
    if (clamped) *clamped = clamp_count;
    return r;
}

struct RatioSummary {
    double mean = 0;    // f5
    double stddev = 0;  // f6
    double min = 0;     // f7
};

inline RatioSummary ratio_features(std::span<const double> r) {
    if (r.empty()) raise(errc::invalid_spec, "ratio_features: empty ratio vector");
    RatioSummary s;
    s.mean = vec_mean(r);
    s.stddev = vec_pop_std(r);
    s.min = r[0];
    for (double x : r) s.min = std::min(s.min, x);
    return s;
}

// ---------------------------------------------------------------------------
// Feature identities and per-subject assembly
// ---------------------------------------------------------------------------

struct FeatureId {
    int index = 1;  // 1..7
    std::string param;
    TableKind kind = TableKind::cortical;

    std::string to_string() const { return "f" + std::to_string(index) + "(" + param + ")"; }
};

// Canonical order: cortical parameters first (table order), then subcortical,
// with f1..f7 grouped per parameter. 8*7 + 5*7 = 91 ids. This order defines
// feature-matrix columns and selection tie-breaking.
inline const std::vector<FeatureId>& canonical_feature_ids() {
    static const std::vector<FeatureId> ids = [] {
        std::vector<FeatureId> v;
        for (const auto& p : cortical_param_labels())
            for (int k = 1; k <= 7; ++k) v.push_back({k, p, TableKind::cortical});
        for (const auto& p : subcortical_param_labels())
            for (int k = 1; k <= 7; ++k) v.push_back({k, p, TableKind::subcortical});
        return v;
    }();
    return ids;
}

inline std::vector<std::string> canonical_feature_names() {
    std::vector<std::string> names;
    names.reserve(canonical_feature_ids().size());
    for (const auto& id : canonical_feature_ids()) names.push_back(id.to_string());
    return names;
}

struct FeatureVector {
    std::string subject_id;
    std::vector<double> values;  // canonical order, length 91
    std::vector<std::string> warnings;
};

namespace detail {

inline void append_param_features(std::span<const double> left, std::span<const double> right,
                                  const std::string& param, const AsymmetryConfig& cfg,
                                  FeatureVector& out) {
    // f1
    try {
        out.values.push_back(cosine_feature(left, right));
    } catch (const Error& e) {
        if (e.code() != errc::zero_norm_vector) throw;
        out.values.push_back(0.0);
        out.warnings.push_back("f1(" + param + "): zero-norm vector, emitted 0");
    }
    // f2
    try {
        out.values.push_back(deviation_feature(left, right, cfg.mean_guard));
    } catch (const Error& e) {
        if (e.code() != errc::degenerate_mean) throw;
        out.values.push_back(0.0);
        out.warnings.push_back("f2(" + param + "): degenerate mean, emitted 0");
    }
    // f3, f4
    out.values.push_back(outlier_ratio(left, right, cfg.epsilon_multiplier, OutlierSide::above));
    out.values.push_back(outlier_ratio(left, right, cfg.epsilon_multiplier, OutlierSide::below));
    // f5, f6, f7
    std::size_t clamped = 0;
    auto r = ratio_vector(left, right, cfg, &clamped);
    if (clamped > 0)
        out.warnings.push_back("ratio(" + param + "): " + std::to_string(clamped) +
                               " sign-mismatch entries clamped to 0");
    auto s = ratio_features(r);
    out.values.push_back(s.mean);
    out.values.push_back(s.stddev);
    out.values.push_back(s.min);
}

}  // namespace detail

// Computes all 91 features for one subject, in canonical order. Per-feature
// degeneracies resolve to 0 with a warning instead of failing the subject.
inline FeatureVector build_features(const SubjectScan& scan, const AsymmetryConfig& cfg = {}) {
    FeatureVector out;
    out.subject_id = scan.subject_id;
    out.values.reserve(canonical_feature_ids().size());

    auto run_kind = [&](const HemisphereTable& l, const HemisphereTable& r) {
        if (l.region_labels != r.region_labels)
            raise(errc::region_pairing_mismatch, "subject '" + scan.subject_id + "': unpaired region lists");
        for (std::size_t p = 0; p < l.param_count(); ++p) {
            auto xl = l.values.column(p);
            auto xr = r.values.column(p);
            detail::append_param_features(xl, xr, l.param_labels[p], cfg, out);
        }
    };
    run_kind(scan.cortical_left, scan.cortical_right);
    run_kind(scan.subcortical_left, scan.subcortical_right);
    return out;
}

// ---------------------------------------------------------------------------
// Cohort feature matrix
// ---------------------------------------------------------------------------

struct FeatureMatrix {
    std::vector<std::string> subject_ids;
    std::vector<std::string> feature_ids;
    Matrix values;  // subjects x features
    std::vector<Label> labels;
    std::vector<std::string> warnings;

    std::size_t n_rows() const { return values.rows; }
    std::size_t n_features() const { return values.cols; }

    FeatureMatrix select_rows(const std::vector<std::size_t>& rows) const {
        FeatureMatrix out;
        out.feature_ids = feature_ids;
        out.values = Matrix(rows.size(), values.cols);
        out.subject_ids.reserve(rows.size());
        out.labels.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out.subject_ids.push_back(subject_ids[rows[i]]);
            out.labels.push_back(labels[rows[i]]);
            for (std::size_t c = 0; c < values.cols; ++c) out.values.at(i, c) = values.at(rows[i], c);
        }
        return out;
    }

    FeatureMatrix select_columns(const std::vector<std::size_t>& cols) const {
        FeatureMatrix out;
        out.subject_ids = subject_ids;
        out.labels = labels;
        out.values = Matrix(values.rows, cols.size());
        out.feature_ids.reserve(cols.size());
        for (std::size_t c : cols) out.feature_ids.push_back(feature_ids[c]);
        for (std::size_t r = 0; r < values.rows; ++r)
            for (std::size_t i = 0; i < cols.size(); ++i) out.values.at(r, i) = values.at(r, cols[i]);
        return out;
    }
};

// Stacks per-subject feature vectors in cohort order. With require_labels
// (training mode), an unlabeled subject is an error.
inline FeatureMatrix build_matrix(const std::vector<SubjectScan>& cohort, const AsymmetryConfig& cfg = {},
                                  bool require_labels = true) {
    if (cohort.empty()) raise(errc::invalid_spec, "cannot build features for an empty cohort");
    FeatureMatrix m;
    m.feature_ids = canonical_feature_names();
    m.values = Matrix(cohort.size(), m.feature_ids.size());
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        const auto& scan = cohort[i];
        if (require_labels && scan.label == Label::unlabeled)
            raise(errc::unlabeled_subject, "subject '" + scan.subject_id + "' has no outcome label");
        FeatureVector fv;
        try {
            fv = build_features(scan, cfg);
        } catch (const Error& e) {
            throw Error(e.code(), "subject '" + scan.subject_id + "': " + e.what());
        }
        if (fv.values.size() != m.feature_ids.size())
            raise(errc::invalid_spec, "subject '" + scan.subject_id + "' produced " +
                                          std::to_string(fv.values.size()) + " features, expected " +
                                          std::to_string(m.feature_ids.size()));
        for (std::size_t c = 0; c < fv.values.size(); ++c) m.values.at(i, c) = fv.values[c];
        m.subject_ids.push_back(scan.subject_id);
        m.labels.push_back(scan.label);
        for (const auto& w : fv.warnings) m.warnings.push_back(scan.subject_id + ": " + w);
    }
    return m;
}

inline void write_feature_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
    std::vector<std::string> header = {"subject_id", "label"};
    header.insert(header.end(), m.feature_ids.begin(), m.feature_ids.end());
    CsvWriter csv(header);
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
        std::vector<std::string> row = {m.subject_ids[r], label_to_string(m.labels[r])};
        for (std::size_t c = 0; c < m.n_features(); ++c) row.push_back(format_double(m.values.at(r, c)));
        csv.add_row(row);
    }
    csv.save(path);
}

inline FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
    auto records = read_csv_file(path);
    if (records.empty()) raise(errc::invalid_config, "feature CSV " + path.string() + " is empty");
    const auto& header = records[0];
    if (header.size() < 3 || header[0] != "subject_id" || header[1] != "label")
        raise(errc::invalid_config, "feature CSV header must start with subject_id,label");
    FeatureMatrix m;
    m.feature_ids.assign(header.begin() + 2, header.end());
    m.values = Matrix(records.size() - 1, m.feature_ids.size());
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.size() != header.size())
            raise(errc::invalid_config, "feature CSV row " + std::to_string(i + 1) + " arity mismatch");
        m.subject_ids.push_back(rec[0]);
        m.labels.push_back(label_from_string(rec[1]));
        for (std::size_t c = 0; c < m.feature_ids.size(); ++c) {
            double v = 0;
            if (!try_parse_double(rec[c + 2], v))
                raise(errc::invalid_config, "non-numeric feature cell '" + rec[c + 2] + "' at row " +
                                                std::to_string(i + 1));
            m.values.at(i - 1, c) = v;
        }
    }
    return m;
}

}  // namespace nmx
