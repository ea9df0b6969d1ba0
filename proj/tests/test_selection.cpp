#include <doctest.h>

#include <algorithm>
#include <optional>

#include "nmx/rng.hpp"
#include "nmx/selection.hpp"
#include "test_helpers.hpp"

using namespace nmx;

namespace {

template <typename F>
std::optional<errc> thrown(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

// Small labelled set where feature 2 separates classes perfectly, feature 0
// correlates weakly, the rest are noise.
FeatureMatrix planted_fixture(std::size_t n, std::size_t dims, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
        int y = i % 2 == 0 ? 1 : 0;
        auto v = testutil::random_vector(rng, dims, 0.0, 1.0);
        v[2] = y ? v[2] + 3.0 : v[2];
        v[0] = v[0] + 0.4 * y;
        labels.push_back(y);
        rows.push_back(std::move(v));
    }
    return testutil::make_matrix(rows, labels);
}

double cv_of_subset(const FeatureMatrix& m, std::vector<std::size_t> subset, const ModelSpec& wrapper,
                    const std::vector<std::size_t>& folds_assign, std::size_t folds) {
    auto sub = m.select_columns(subset);
    return cross_validate_with_assignment(sub, wrapper, folds_assign, folds).mean_accuracy;
}

}  // namespace

TEST_CASE("sfs picks the perfect separator first with accuracy ~1") {
    auto m = planted_fixture(30, 5, 4);
    auto trace = sfs(m, ModelSpec::knn(3), 3, 5, 8);
    REQUIRE(trace.steps.size() == 3);
    CHECK(trace.steps[0].feature == 2);
    CHECK(trace.steps[0].cv_accuracy == doctest::Approx(1.0).epsilon(0.05));
    CHECK(trace.final_subset.size() == 3);
    CHECK(trace.final_subset[0] == 2);
}

TEST_CASE("sfs with k_max = feature count permutes all features") {
    auto m = planted_fixture(24, 4, 5);
    auto trace = sfs(m, ModelSpec::knn(3), 4, 4, 2);
    REQUIRE(trace.final_subset.size() == 4);
    auto sorted = trace.final_subset;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("sfs greedy steps match exhaustive candidate evaluation") {
    auto m = planted_fixture(26, 4, 6);
    const std::size_t folds = 5;
    const std::uint64_t seed = 12;
    auto wrapper = ModelSpec::knn(3);
    auto trace = sfs(m, wrapper, 4, folds, seed);

    auto assign = stratified_fold_assignment(m.labels, folds, seed);
    std::vector<std::size_t> selected;
    for (const auto& step : trace.steps) {
        double best = -1;
        std::size_t best_c = 0;
        REQUIRE(step.candidate_scores.size() == m.n_features() - selected.size());
        for (std::size_t c = 0; c < m.n_features(); ++c) {
            if (std::find(selected.begin(), selected.end(), c) != selected.end()) continue;
            auto candidate = selected;
            candidate.push_back(c);
            double acc = cv_of_subset(m, candidate, wrapper, assign, folds);
            // recorded candidate score matches the brute-force recomputation
            auto it = std::find_if(step.candidate_scores.begin(), step.candidate_scores.end(),
                                   [&](const auto& p) { return p.first == c; });
            REQUIRE(it != step.candidate_scores.end());
            CHECK(it->second == acc);
            if (acc > best) {
                best = acc;
                best_c = c;
            }
        }
        CHECK(step.feature == best_c);
        CHECK(step.cv_accuracy == best);
        selected.push_back(step.feature);
    }
}

TEST_CASE("sbe removal choices match exhaustive leave-one-out evaluation") {
    auto m = planted_fixture(26, 3, 7);
    const std::size_t folds = 5;
    const std::uint64_t seed = 3;
    auto wrapper = ModelSpec::knn(3);
    auto trace = sbe(m, wrapper, 1, folds, seed);
    REQUIRE(trace.steps.size() == 2);  // 3 -> 2 -> 1

    auto assign = stratified_fold_assignment(m.labels, folds, seed);
    std::vector<std::size_t> remaining = {0, 1, 2};
    for (const auto& step : trace.steps) {
        double best = -1;
        std::size_t best_c = 0;
        for (std::size_t c : remaining) {
            std::vector<std::size_t> without;
            for (std::size_t o : remaining)
                if (o != c) without.push_back(o);
            double acc = cv_of_subset(m, without, wrapper, assign, folds);
            if (acc > best) {
                best = acc;
                best_c = c;
            }
        }
        CHECK(step.feature == best_c);
        CHECK(step.cv_accuracy == best);
        remaining.erase(std::find(remaining.begin(), remaining.end(), step.feature));
    }
    CHECK(trace.final_subset == remaining);
}

TEST_CASE("sbe with k_min = feature count has zero steps") {
    auto m = planted_fixture(20, 3, 8);
    auto trace = sbe(m, ModelSpec::knn(3), 3, 4, 1);
    CHECK(trace.steps.empty());
    CHECK(trace.final_subset == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("full elimination emits a monotone-length trace") {
    auto m = planted_fixture(20, 4, 9);
    auto trace = sbe(m, ModelSpec::knn(3), 1, 4, 1);
    CHECK(trace.steps.size() == 3);  // P - 1
    CHECK(trace.final_subset.size() == 1);
}

TEST_CASE("selection is reproducible for identical inputs and seed") {
    auto m = planted_fixture(24, 5, 10);
    auto a = sfs(m, ModelSpec::knn(3), 4, 4, 77);
    auto b = sfs(m, ModelSpec::knn(3), 4, 4, 77);
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        CHECK(a.steps[i].feature == b.steps[i].feature);
        CHECK(a.steps[i].cv_accuracy == b.steps[i].cv_accuracy);
    }
    CHECK(a.final_subset == b.final_subset);
}

TEST_CASE("subset size follows the step count") {
    auto m = planted_fixture(24, 5, 11);
    auto trace = sfs(m, ModelSpec::knn(3), 5, 4, 2);
    std::size_t size = 0;
    for (const auto& step : trace.steps) {
        ++size;
        (void)step;
    }
    CHECK(size == trace.final_subset.size());
}

TEST_CASE("rank_features: entry order then canonical remainder") {
    auto m = planted_fixture(24, 5, 13);
    auto trace = sfs(m, ModelSpec::knn(3), 2, 4, 5);
    auto ranking = rank_features(trace, m.n_features());
    REQUIRE(ranking.size() == 5);
    CHECK(ranking[0].feature == trace.steps[0].feature);
    CHECK(ranking[0].rank == 1);
    CHECK(ranking[1].feature == trace.steps[1].feature);
    // ranks are 1..P, each used once
    std::vector<bool> seen(6, false);
    for (const auto& rf : ranking) {
        CHECK(rf.rank >= 1);
        CHECK(rf.rank <= 5);
        CHECK_FALSE(seen[rf.rank]);
        seen[rf.rank] = true;
    }
    // unselected features appear in ascending column order after the selected
    for (std::size_t i = 3; i < ranking.size(); ++i) CHECK(ranking[i].feature > ranking[i - 1].feature);

    auto btrace = sbe(m, ModelSpec::knn(3), 2, 4, 5);
    CHECK(thrown([&] { rank_features(btrace, m.n_features()); }) == errc::wrong_trace_kind);
}

TEST_CASE("trace csv export") {
    auto m = planted_fixture(24, 4, 14);
    auto trace = sfs(m, ModelSpec::knn(3), 3, 4, 6);
    auto dir = testutil::tmp_dir("trace_csv");
    write_trace_csv(trace, m.feature_ids, dir / "trace.csv");
    auto rows = read_csv_file(dir / "trace.csv");
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"step", "feature_id", "cv_accuracy"});
    CHECK(rows[1][0] == "1");
    CHECK(rows[1][1] == m.feature_ids[trace.steps[0].feature]);
}

TEST_CASE("selection input validation") {
    auto m = planted_fixture(20, 3, 15);
    CHECK(thrown([&] { sfs(m, ModelSpec::knn(3), 0, 4, 0); }) == errc::invalid_spec);
    CHECK(thrown([&] { sfs(m, ModelSpec::knn(3), 4, 4, 0); }) == errc::invalid_spec);
    CHECK(thrown([&] { sbe(m, ModelSpec::knn(3), 0, 4, 0); }) == errc::invalid_spec);
}
