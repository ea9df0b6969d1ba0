#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nmx/csv.hpp"
#include "nmx/error.hpp"
#include "nmx/features.hpp"
#include "nmx/rng.hpp"

namespace nmx {

struct ResampleConfig {
    std::size_t k_neighbors = 5;
    enum class Target { full_balance } target = Target::full_balance;
    std::uint64_t seed = 0;
};

// Recorded per synthetic row so downstream checks can verify the
// convex-combination identity x_new = x_src + u * (x_nn - x_src).
struct SmoteProvenance {
    std::size_t synthetic_row = 0;  // row index in the output matrix
    std::size_t source_row = 0;     // row index in the input matrix
    std::size_t neighbor_row = 0;   // row index in the input matrix
    double u = 0;
};

struct SmoteResult {
    FeatureMatrix matrix;
    std::vector<SmoteProvenance> provenance;
};

namespace detail {

inline double row_distance_sq(const Matrix& m, std::size_t a, std::size_t b) {
    double s = 0;
    for (std::size_t c = 0; c < m.cols; ++c) {
        double d = m.at(a, c) - m.at(b, c);
        s += d * d;
    }
    return s;
}

}  // namespace detail

// Balances the minority class by interpolating between minority samples and
// their k Euclidean nearest minority neighbors. Original rows come first and
// are unchanged; synthetic rows are appended round-robin over minority rows
// until the classes balance. Distance ties break toward the lower row index.
inline SmoteResult smote(const FeatureMatrix& input, const ResampleConfig& cfg) {
    std::vector<std::size_t> pos_rows, neg_rows;
    for (std::size_t r = 0; r < input.n_rows(); ++r) {
        switch (input.labels[r]) {
            case Label::recurrence: pos_rows.push_back(r); break;
            case Label::no_recurrence: neg_rows.push_back(r); break;
            case Label::unlabeled:
                raise(errc::invalid_spec, "row '" + input.subject_ids[r] + "' is unlabeled");
        }
    }
    if (pos_rows.empty() || neg_rows.empty())
        raise(errc::single_class_input, "resampling needs both classes present");

    SmoteResult out;
    out.matrix = input;
    out.matrix.warnings.clear();
    if (pos_rows.size() == neg_rows.size()) return out;  // already balanced

    const auto& minority = pos_rows.size() < neg_rows.size() ? pos_rows : neg_rows;
    const auto& majority = pos_rows.size() < neg_rows.size() ? neg_rows : pos_rows;
    const Label minority_label = pos_rows.size() < neg_rows.size() ? Label::recurrence : Label::no_recurrence;
    if (minority.size() <= cfg.k_neighbors)
        raise(errc::too_few_minority_samples,
              "minority class has " + std::to_string(minority.size()) + " rows, needs more than k=" +
                  std::to_string(cfg.k_neighbors));

    // k nearest minority neighbors of each minority row, self excluded
    std::vector<std::vector<std::size_t>> neighbors(minority.size());
    for (std::size_t i = 0; i < minority.size(); ++i) {
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(minority.size() - 1);
        for (std::size_t j = 0; j < minority.size(); ++j) {
            if (j == i) continue;
            dist.emplace_back(detail::row_distance_sq(input.values, minority[i], minority[j]), minority[j]);
        }
        std::sort(dist.begin(), dist.end());
        neighbors[i].reserve(cfg.k_neighbors);
        for (std::size_t k = 0; k < cfg.k_neighbors; ++k) neighbors[i].push_back(dist[k].second);
    }

    const std::size_t deficit = majority.size() - minority.size();
    RngStream rng(cfg.seed);
    Matrix& values = out.matrix.values;
    for (std::size_t t = 0; t < deficit; ++t) {
        std::size_t mi = t % minority.size();
        std::size_t src = minority[mi];
        std::size_t nn = neighbors[mi][rng.next_below(cfg.k_neighbors)];
        double u = rng.next_double();

        std::size_t new_row = values.rows;
        values.data.resize(values.data.size() + values.cols);
        ++values.rows;
        for (std::size_t c = 0; c < values.cols; ++c)
            values.at(new_row, c) = input.values.at(src, c) + u * (input.values.at(nn, c) - input.values.at(src, c));

        std::string id = "smote_" + std::to_string(t);
        out.matrix.subject_ids.push_back(id);
        out.matrix.labels.push_back(minority_label);
        out.provenance.push_back({new_row, src, nn, u});
    }
    return out;
}

inline void write_provenance_csv(const std::vector<SmoteProvenance>& prov, const std::filesystem::path& path) {
    CsvWriter csv({"synthetic_row", "source_row", "neighbor_row", "u"});
    for (const auto& p : prov)
        csv.add_row({std::to_string(p.synthetic_row), std::to_string(p.source_row),
                     std::to_string(p.neighbor_row), format_double(p.u)});
    csv.save(path);
}

}  // namespace nmx
