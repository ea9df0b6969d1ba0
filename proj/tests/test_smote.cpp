#include <doctest.h>

#include <cmath>
#include <optional>

#include "nmx/rng.hpp"
#include "nmx/smote.hpp"
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

FeatureMatrix random_imbalanced(std::size_t n_major, std::size_t n_minor, std::size_t dims,
                                std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n_major; ++i) {
        rows.push_back(testutil::random_vector(rng, dims, 0.0, 1.0));
        labels.push_back(1);
    }
    for (std::size_t i = 0; i < n_minor; ++i) {
        rows.push_back(testutil::random_vector(rng, dims, 2.0, 3.0));
        labels.push_back(0);
    }
    return testutil::make_matrix(rows, labels);
}

}  // namespace

TEST_CASE("smote balances 145 vs 24 to 290 rows") {
    auto m = random_imbalanced(145, 24, 6, 11);
    auto res = smote(m, {5, ResampleConfig::Target::full_balance, 42});
    CHECK(res.matrix.n_rows() == 290);
    std::size_t pos = 0, neg = 0;
    for (Label l : res.matrix.labels) (l == Label::recurrence ? pos : neg)++;
    CHECK(pos == 145);
    CHECK(neg == 145);
    CHECK(res.provenance.size() == 121);
    // originals unchanged and first
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
        CHECK(res.matrix.subject_ids[r] == m.subject_ids[r]);
        for (std::size_t c = 0; c < m.n_features(); ++c)
            CHECK(res.matrix.values.at(r, c) == m.values.at(r, c));
    }
}

TEST_CASE("already balanced input returns unchanged") {
    auto m = random_imbalanced(10, 10, 3, 5);
    auto res = smote(m, {3, ResampleConfig::Target::full_balance, 1});
    CHECK(res.matrix.n_rows() == 10 + 10);
    CHECK(res.provenance.empty());
    CHECK(res.matrix.values == m.values);
}

TEST_CASE("10 vs 4 with k=3 appends 6 geometrically valid rows") {
    auto m = random_imbalanced(10, 4, 5, 77);
    auto res = smote(m, {3, ResampleConfig::Target::full_balance, 9});
    REQUIRE(res.matrix.n_rows() == 20);
    REQUIRE(res.provenance.size() == 6);
    for (const auto& p : res.provenance) {
        // recorded identity holds exactly, and the row is a componentwise convex mix
        CHECK(m.labels[p.source_row] == Label::no_recurrence);
        CHECK(m.labels[p.neighbor_row] == Label::no_recurrence);
        CHECK(p.u >= 0.0);
        CHECK(p.u < 1.0);
        for (std::size_t c = 0; c < m.n_features(); ++c) {
            double a = m.values.at(p.source_row, c);
            double b = m.values.at(p.neighbor_row, c);
            double expected = a + p.u * (b - a);
            CHECK(res.matrix.values.at(p.synthetic_row, c) == expected);
            CHECK(res.matrix.values.at(p.synthetic_row, c) >= std::min(a, b) - 1e-12);
            CHECK(res.matrix.values.at(p.synthetic_row, c) <= std::max(a, b) + 1e-12);
        }
        // neighbor really is one of the 3 nearest minority rows of source
        std::vector<std::pair<double, std::size_t>> dist;
        for (std::size_t r = 10; r < 14; ++r) {
            if (r == p.source_row) continue;
            double s = 0;
            for (std::size_t c = 0; c < m.n_features(); ++c) {
                double d = m.values.at(p.source_row, c) - m.values.at(r, c);
                s += d * d;
            }
            dist.emplace_back(s, r);
        }
        std::sort(dist.begin(), dist.end());
        bool found = false;
        for (std::size_t k = 0; k < 3; ++k) found = found || dist[k].second == p.neighbor_row;
        CHECK(found);
    }
}

TEST_CASE("smote determinism and seeds") {
    auto m = random_imbalanced(20, 8, 4, 5);
    auto a = smote(m, {5, ResampleConfig::Target::full_balance, 123});
    auto b = smote(m, {5, ResampleConfig::Target::full_balance, 123});
    CHECK(a.matrix.values == b.matrix.values);
    auto c = smote(m, {5, ResampleConfig::Target::full_balance, 124});
    CHECK(a.matrix.values != c.matrix.values);
}

TEST_CASE("smote error paths") {
    auto single = testutil::make_matrix({{1, 2}, {2, 3}}, {1, 1});
    CHECK(thrown([&] { smote(single, {1, ResampleConfig::Target::full_balance, 0}); }) ==
          errc::single_class_input);

    auto tiny = random_imbalanced(10, 4, 3, 2);
    CHECK(thrown([&] { smote(tiny, {5, ResampleConfig::Target::full_balance, 0}); }) ==
          errc::too_few_minority_samples);
    CHECK(thrown([&] { smote(tiny, {4, ResampleConfig::Target::full_balance, 0}); }) ==
          errc::too_few_minority_samples);
}

TEST_CASE("provenance csv shape") {
    auto m = random_imbalanced(8, 3, 2, 4);
    auto res = smote(m, {2, ResampleConfig::Target::full_balance, 6});
    auto dir = testutil::tmp_dir("smote_prov");
    write_provenance_csv(res.provenance, dir / "prov.csv");
    auto rows = read_csv_file(dir / "prov.csv");
    REQUIRE(rows.size() == res.provenance.size() + 1);
    CHECK(rows[0] == std::vector<std::string>{"synthetic_row", "source_row", "neighbor_row", "u"});
}
