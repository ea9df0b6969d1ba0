#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nmx/error.hpp"
#include "nmx/features.hpp"
#include "nmx/learners.hpp"
#include "nmx/rng.hpp"

namespace nmx {

struct ConfusionCounts {
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    std::size_t total() const { return tp + tn + fp + fn; }
};

// A metric with a zero denominator is absent, never reported as 0.
struct MetricSet {
    std::optional<double> accuracy;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> f1;
};

inline MetricSet metrics(const ConfusionCounts& c) {
    MetricSet m;
    auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.accuracy = ratio(c.tp + c.tn, c.total());
    m.sensitivity = ratio(c.tp, c.tp + c.fn);
    m.specificity = ratio(c.tn, c.fp + c.tn);
    m.f1 = ratio(2 * c.tp, c.fp + 2 * c.tp + c.fn);
    return m;
}

// Rank-based (Mann-Whitney) AUROC with midrank tie handling; equals the
// trapezoidal area under the ROC curve.
inline double auroc(std::span<const double> scores, std::span<const int> positive) {
    if (scores.size() != positive.size()) raise(errc::arity_mismatch, "auroc: length mismatch");
    std::size_t n_pos = 0;
    for (int p : positive) n_pos += static_cast<std::size_t>(p);
    std::size_t n_neg = scores.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) raise(errc::single_class_input, "auroc needs both classes");

    std::vector<std::size_t> idx(scores.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0;
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
        double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            if (positive[idx[k]]) rank_sum_pos += midrank;
        i = j;
    }
    double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

struct RocPoint {
    double fpr = 0, tpr = 0, threshold = 0;
};

// Stepped ROC curve points from (0,0) to (1,1), thresholds descending.
inline std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> positive) {
    std::size_t n_pos = 0;
    for (int p : positive) n_pos += static_cast<std::size_t>(p);
    std::size_t n_neg = scores.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) raise(errc::single_class_input, "roc needs both classes");

    std::vector<std::size_t> idx(scores.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<RocPoint> pts;
    pts.push_back({0, 0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < idx.size()) {
        double s = scores[idx[i]];
        while (i < idx.size() && scores[idx[i]] == s) {
            if (positive[idx[i]]) ++tp;
            else ++fp;
            ++i;
        }
        pts.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                       static_cast<double>(tp) / static_cast<double>(n_pos), s});
    }
    return pts;
}

namespace detail {

inline std::vector<std::size_t> rows_of(const FeatureMatrix& m, Label l) {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < m.n_rows(); ++r)
        if (m.labels[r] == l) out.push_back(r);
    return out;
}

}  // namespace detail

// Stratified 70/30 split. Train size is ceil(0.7 n); per-class train quotas
// round down with leftover seats assigned by largest fractional share, the
// positive class first on ties. Row order inside each part follows the input.
inline std::pair<FeatureMatrix, FeatureMatrix> split_70_30(const FeatureMatrix& m, std::uint64_t seed) {
    auto pos = detail::rows_of(m, Label::recurrence);
    auto neg = detail::rows_of(m, Label::no_recurrence);
    if (pos.size() + neg.size() != m.n_rows()) raise(errc::invalid_spec, "split input has unlabeled rows");
    if (pos.size() < 2 || neg.size() < 2)
        raise(errc::class_too_small, "70/30 split needs at least two rows per class");

    const std::size_t n = m.n_rows();
    const std::size_t n_train = (7 * n + 9) / 10;  // ceil(0.7 n)

    struct ClassPart {
        std::vector<std::size_t>* rows;
        std::size_t train_quota;
        std::size_t remainder;  // of 7*n_c / 10
    };
    ClassPart parts[2] = {{&pos, 7 * pos.size() / 10, (7 * pos.size()) % 10},
                          {&neg, 7 * neg.size() / 10, (7 * neg.size()) % 10}};
    std::size_t assigned = parts[0].train_quota + parts[1].train_quota;
    while (assigned < n_train) {
        // larger remainder first; positive class (index 0) wins ties; prefer
        // a class that keeps at least one test row
        auto keeps_test_row = [](const ClassPart& p) { return p.train_quota + 1 < p.rows->size(); };
        std::size_t pick = parts[1].remainder > parts[0].remainder ? 1 : 0;
        if (!keeps_test_row(parts[pick]) && keeps_test_row(parts[1 - pick])) pick = 1 - pick;
        ++parts[pick].train_quota;
        parts[pick].remainder = 0;
        ++assigned;
    }

    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t ci = 0; ci < 2; ++ci) {
        auto shuffled = *parts[ci].rows;
        RngStream rng(seed, ci);
        rng.shuffle(shuffled);
        for (std::size_t i = 0; i < shuffled.size(); ++i)
            (i < parts[ci].train_quota ? train_rows : test_rows).push_back(shuffled[i]);
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    return {m.select_rows(train_rows), m.select_rows(test_rows)};
}

// Deterministic stratified fold assignment: per class, shuffle then deal
// round-robin. Every fold's class ratio stays within one sample of global.
inline std::vector<std::size_t> stratified_fold_assignment(const std::vector<Label>& labels,
                                                           std::size_t folds, std::uint64_t seed) {
    if (folds < 2) raise(errc::invalid_spec, "cross-validation needs at least 2 folds");
    for (Label l : labels)
        if (l == Label::unlabeled) raise(errc::invalid_spec, "fold assignment needs labelled rows");
    std::vector<std::size_t> assignment(labels.size(), 0);
    const Label classes[2] = {Label::recurrence, Label::no_recurrence};
    for (std::size_t ci = 0; ci < 2; ++ci) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < labels.size(); ++r)
            if (labels[r] == classes[ci]) rows.push_back(r);
        if (rows.size() < folds)
            raise(errc::class_too_small, std::string(label_to_string(classes[ci])) + " class has " +
                                             std::to_string(rows.size()) + " rows, needs >= " +
                                             std::to_string(folds));
        RngStream rng(seed, ci);
        rng.shuffle(rows);
        for (std::size_t i = 0; i < rows.size(); ++i) assignment[rows[i]] = i % folds;
    }
    return assignment;
}

struct CvResult {
    double mean_accuracy = 0;
    double std_accuracy = 0;  // population convention
    std::vector<double> per_fold;
};

inline CvResult cross_validate_with_assignment(const FeatureMatrix& m, const ModelSpec& spec,
                                               const std::vector<std::size_t>& assignment,
                                               std::size_t folds) {
    CvResult out;
    out.per_fold.reserve(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t r = 0; r < m.n_rows(); ++r)
            (assignment[r] == f ? test_rows : train_rows).push_back(r);
        auto train = m.select_rows(train_rows);
        auto test = m.select_rows(test_rows);
        auto model = fit(spec, train);
        std::size_t correct = 0;
        for (std::size_t r = 0; r < test.n_rows(); ++r)
            if (model.predict_label(test.values.row(r)) == test.labels[r]) ++correct;
        out.per_fold.push_back(static_cast<double>(correct) / static_cast<double>(test.n_rows()));
    }
    out.mean_accuracy = vec_mean(out.per_fold);
    out.std_accuracy = vec_pop_std(out.per_fold);
    return out;
}

inline CvResult cross_validate(const FeatureMatrix& m, const ModelSpec& spec, std::size_t folds = 5,
                               std::uint64_t seed = 0) {
    auto assignment = stratified_fold_assignment(m.labels, folds, seed);
    return cross_validate_with_assignment(m, spec, assignment, folds);
}

struct EvalReport {
    double auroc_value = 0;
    MetricSet metric_set;
    ConfusionCounts counts;
    std::string split_desc;
    std::uint64_t seed = 0;
};

// Confusion counts + metrics + AUROC of a fitted model over a labelled matrix.
// Labels come from predict_label (0.5 threshold, KNN tie rule).
inline EvalReport evaluate(const TrainedModel& model, const FeatureMatrix& m, std::string split_desc,
                           std::uint64_t seed) {
    EvalReport rep;
    rep.split_desc = std::move(split_desc);
    rep.seed = seed;
    std::vector<double> scores(m.n_rows());
    std::vector<int> positive(m.n_rows());
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
        scores[r] = model.predict_score(m.values.row(r));
        positive[r] = m.labels[r] == Label::recurrence ? 1 : 0;
        Label predicted = model.predict_label(m.values.row(r));
        if (positive[r]) {
            if (predicted == Label::recurrence) ++rep.counts.tp;
            else ++rep.counts.fn;
        } else {
            if (predicted == Label::recurrence) ++rep.counts.fp;
            else ++rep.counts.tn;
        }
    }
    rep.metric_set = metrics(rep.counts);
    rep.auroc_value = auroc(scores, positive);
    return rep;
}

}  // namespace nmx
