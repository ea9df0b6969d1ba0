#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nmx/csv.hpp"
#include "nmx/error.hpp"
#include "nmx/eval.hpp"
#include "nmx/features.hpp"
#include "nmx/learners.hpp"

namespace nmx {

enum class SelectionMethod { sfs, sbe };

inline const char* selection_method_name(SelectionMethod m) { return m == SelectionMethod::sfs ? "sfs" : "sbe"; }

// One greedy step. `candidate_scores` keeps the CV accuracy of every feature
// evaluated at this step, so step optimality stays checkable after the fact.
struct SelectionStep {
    std::size_t feature = 0;  // column index: added (SFS) or removed (SBE)
    double cv_accuracy = 0;
    std::vector<std::pair<std::size_t, double>> candidate_scores;
};

struct SelectionTrace {
    SelectionMethod method = SelectionMethod::sfs;
    ModelSpec wrapper;
    std::size_t cv_folds = 5;
    std::uint64_t seed = 0;
    std::vector<SelectionStep> steps;
    std::vector<std::size_t> final_subset;  // SFS: insertion order; SBE: ascending column order
};

namespace detail {

inline double subset_cv_accuracy(const FeatureMatrix& m, const std::vector<std::size_t>& subset,
                                 const ModelSpec& wrapper, const std::vector<std::size_t>& fold_assignment,
                                 std::size_t folds) {
    auto sub = m.select_columns(subset);
    return cross_validate_with_assignment(sub, wrapper, fold_assignment, folds).mean_accuracy;
}

}  // namespace detail

// Sequential forward selection: greedily adds the feature that maximizes mean
// stratified CV accuracy of the wrapper; ties break toward the lower column
// index. Fold assignment is fixed once per run so candidates compare fairly.
inline SelectionTrace sfs(const FeatureMatrix& m, const ModelSpec& wrapper, std::size_t k_max,
                          std::size_t cv_folds = 5, std::uint64_t seed = 0) {
    const std::size_t p = m.n_features();
    if (k_max < 1 || k_max > p) raise(errc::invalid_spec, "sfs k_max must be in [1, feature count]");
    auto fold_assignment = stratified_fold_assignment(m.labels, cv_folds, seed);

    SelectionTrace trace{SelectionMethod::sfs, wrapper, cv_folds, seed, {}, {}};
    std::vector<std::size_t> selected;
    std::vector<bool> in_subset(p, false);

    for (std::size_t step = 0; step < k_max; ++step) {
        SelectionStep rec;
        bool have_best = false;
        double best_acc = 0;
        std::size_t best_feature = 0;
        for (std::size_t c = 0; c < p; ++c) {
            if (in_subset[c]) continue;
            auto candidate = selected;
            candidate.push_back(c);
            double acc = detail::subset_cv_accuracy(m, candidate, wrapper, fold_assignment, cv_folds);
            rec.candidate_scores.emplace_back(c, acc);
            if (!have_best || acc > best_acc) {
                have_best = true;
                best_acc = acc;
                best_feature = c;
            }
        }
        rec.feature = best_feature;
        rec.cv_accuracy = best_acc;
        selected.push_back(best_feature);
        in_subset[best_feature] = true;
        trace.steps.push_back(std::move(rec));
    }
    trace.final_subset = selected;
    return trace;
}

// Sequential backward elimination: starts from the full set and greedily
// removes the feature whose removal maximizes CV accuracy, down to k_min.
inline SelectionTrace sbe(const FeatureMatrix& m, const ModelSpec& wrapper, std::size_t k_min,
                          std::size_t cv_folds = 5, std::uint64_t seed = 0) {
    const std::size_t p = m.n_features();
    if (k_min < 1 || k_min > p) raise(errc::invalid_spec, "sbe k_min must be in [1, feature count]");
    auto fold_assignment = stratified_fold_assignment(m.labels, cv_folds, seed);

    SelectionTrace trace{SelectionMethod::sbe, wrapper, cv_folds, seed, {}, {}};
    std::vector<std::size_t> remaining(p);
    for (std::size_t c = 0; c < p; ++c) remaining[c] = c;

    while (remaining.size() > k_min) {
        SelectionStep rec;
        bool have_best = false;
        double best_acc = 0;
        std::size_t best_pos = 0;
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            std::vector<std::size_t> without;
            without.reserve(remaining.size() - 1);
            for (std::size_t j = 0; j < remaining.size(); ++j)
                if (j != i) without.push_back(remaining[j]);
            double acc = detail::subset_cv_accuracy(m, without, wrapper, fold_assignment, cv_folds);
            rec.candidate_scores.emplace_back(remaining[i], acc);
            if (!have_best || acc > best_acc) {
                have_best = true;
                best_acc = acc;
                best_pos = i;
            }
        }
        rec.feature = remaining[best_pos];
        rec.cv_accuracy = best_acc;
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_pos));
        trace.steps.push_back(std::move(rec));
    }
    trace.final_subset = remaining;
    return trace;
}

struct RankedFeature {
    std::size_t feature = 0;
    std::size_t rank = 0;  // 1 = selected first
};

// Rank = SFS entry step; features never selected rank after all selected
// ones, in column order. Only forward traces define entry order.
inline std::vector<RankedFeature> rank_features(const SelectionTrace& trace, std::size_t total_features) {
    if (trace.method != SelectionMethod::sfs)
        raise(errc::wrong_trace_kind, "feature ranking needs a forward-selection trace");
    std::vector<RankedFeature> out;
    std::vector<bool> ranked(total_features, false);
    std::size_t rank = 1;
    for (const auto& step : trace.steps) {
        out.push_back({step.feature, rank++});
        ranked[step.feature] = true;
    }
    for (std::size_t c = 0; c < total_features; ++c)
        if (!ranked[c]) out.push_back({c, rank++});
    return out;
}

// step, feature_id, cv_accuracy rows; doubles as accuracy-vs-size curve data.
inline void write_trace_csv(const SelectionTrace& trace, const std::vector<std::string>& feature_ids,
                            const std::filesystem::path& path,
                            const std::vector<std::string>& extra_header = {},
                            const std::vector<std::string>& extra_fields = {}) {
    std::vector<std::string> header = {"step", "feature_id", "cv_accuracy"};
    header.insert(header.end(), extra_header.begin(), extra_header.end());
    CsvWriter csv(header);
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        std::vector<std::string> row = {std::to_string(i + 1), feature_ids[trace.steps[i].feature],
                                        format_double(trace.steps[i].cv_accuracy)};
        row.insert(row.end(), extra_fields.begin(), extra_fields.end());
        csv.add_row(row);
    }
    csv.save(path);
}

}  // namespace nmx
