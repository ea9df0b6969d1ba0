#include <doctest.h>

#include <cmath>
#include <optional>

#include "nmx/learners.hpp"
#include "nmx/rng.hpp"
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

// consistent random binary dataset: distinct feature rows, deterministic labels
FeatureMatrix consistent_data(std::size_t n, std::size_t dims, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
        auto v = testutil::random_vector(rng, dims, 0.0, 1.0);
        labels.push_back(v[0] + 0.3 * v[dims - 1] > 0.6 ? 1 : 0);
        rows.push_back(std::move(v));
    }
    // ensure both classes exist
    labels[0] = 0;
    labels[1] = 1;
    return testutil::make_matrix(rows, labels);
}

double resubstitution_accuracy(const TrainedModel& model, const FeatureMatrix& m) {
    std::size_t correct = 0;
    for (std::size_t r = 0; r < m.n_rows(); ++r)
        if (model.predict_label(m.values.row(r)) == m.labels[r]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(m.n_rows());
}

// linearly separable 2-feature set of 40 points
FeatureMatrix separable_40() {
    RngStream rng(31);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 20; ++i) {
        rows.push_back({rng.next_double(), rng.next_double() + 2.0});
        labels.push_back(1);
        rows.push_back({rng.next_double() + 1.5, rng.next_double()});
        labels.push_back(0);
    }
    return testutil::make_matrix(rows, labels);
}

}  // namespace

TEST_CASE("decision tree shatters consistent data") {
    auto m = consistent_data(60, 4, 1);
    auto model = fit(ModelSpec::decision_tree(), m);
    CHECK(resubstitution_accuracy(model, m) == 1.0);
}

TEST_CASE("1-nn reaches perfect resubstitution on duplicate-free data") {
    auto m = consistent_data(50, 3, 2);
    auto model = fit(ModelSpec::knn(1), m);
    CHECK(resubstitution_accuracy(model, m) == 1.0);
}

TEST_CASE("gradient boosting separates a linearly separable set within 100 stages") {
    auto m = separable_40();
    auto model = fit(ModelSpec::gradient_boosting(100, 1.0, 3), m);
    CHECK(resubstitution_accuracy(model, m) == 1.0);
    const auto& st = std::get<BoostState>(model.state);
    REQUIRE(st.train_loss.size() == 101);
    for (std::size_t i = 1; i < st.train_loss.size(); ++i)
        CHECK(st.train_loss[i] <= st.train_loss[i - 1] + 1e-12);
}

TEST_CASE("boosting training loss is non-increasing on varied fixtures") {
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        auto m = consistent_data(40, 5, seed);
        auto model = fit(ModelSpec::gradient_boosting(60, 1.0, 3), m);
        const auto& st = std::get<BoostState>(model.state);
        for (std::size_t i = 1; i < st.train_loss.size(); ++i)
            CHECK(st.train_loss[i] <= st.train_loss[i - 1] + 1e-12);
    }
}

TEST_CASE("knn score is the positive neighbor fraction") {
    auto m = testutil::make_matrix({{0, 0}, {0.1, 0}, {0, 0.1}, {5, 5}}, {1, 1, 1, 0});
    auto model = fit(ModelSpec::knn(3), m);
    std::vector<double> q = {0.02, 0.02};
    CHECK(model.predict_score(q) == 1.0);  // 3 nearest are all positive
    CHECK(model.predict_label(q) == Label::recurrence);
    std::vector<double> far = {6, 6};
    CHECK(model.predict_score(far) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("knn even-k tie at 0.5 resolves to training majority") {
    auto m = testutil::make_matrix({{0, 0}, {1, 0}, {10, 10}, {11, 10}, {20, 20}}, {1, 1, 0, 0, 0});
    auto model = fit(ModelSpec::knn(4), m);
    // query equidistant-ish: 2 positive + 2 negative among the 4 nearest
    std::vector<double> q = {5.5, 5.0};
    CHECK(model.predict_score(q) == 0.5);
    CHECK(model.predict_label(q) == Label::no_recurrence);  // majority is negative (3 of 5)
}

TEST_CASE("forest score averages leaf fractions") {
    // hand-built forest: 6 of 10 stump-free trees vote 1.0
    TrainedModel model;
    model.spec = ModelSpec::random_forest(10, 4, 0);
    model.n_features = 1;
    ForestState st;
    for (int i = 0; i < 10; ++i) {
        Tree t;
        TreeNode leaf;
        leaf.value = i < 6 ? 1.0 : 0.0;
        leaf.n_samples = 1;
        t.nodes.push_back(leaf);
        st.trees.push_back(t);
    }
    model.state = st;
    std::vector<double> x = {0.0};
    CHECK(model.predict_score(x) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(model.predict_label(x) == Label::recurrence);
}

TEST_CASE("boosting zero stages with balanced prior scores 0.5") {
    auto m = testutil::make_matrix({{0.0}, {1.0}, {2.0}, {3.0}}, {1, 0, 1, 0});
    auto model = fit(ModelSpec::gradient_boosting(0, 1.0, 3), m);
    std::vector<double> x = {9.9};
    CHECK(model.predict_score(x) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("random forest beats a stump on structured data and is deterministic") {
    auto m = consistent_data(80, 5, 12);
    auto a = fit(ModelSpec::random_forest(50, 4, 99), m);
    auto b = fit(ModelSpec::random_forest(50, 4, 99), m);
    CHECK(a.to_json() == b.to_json());
    CHECK(resubstitution_accuracy(a, m) > 0.8);
    auto other_seed = fit(ModelSpec::random_forest(50, 4, 100), m);
    CHECK(resubstitution_accuracy(other_seed, m) > 0.8);
}

TEST_CASE("knn prediction is invariant under training row permutation") {
    auto m = consistent_data(30, 4, 21);
    auto model = fit(ModelSpec::knn(3), m);
    std::vector<std::size_t> perm(m.n_rows());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    RngStream rng(8);
    rng.shuffle(perm);
    auto permuted = m.select_rows(perm);
    auto model_p = fit(ModelSpec::knn(3), permuted);
    RngStream qrng(9);
    for (int i = 0; i < 50; ++i) {
        auto q = testutil::random_vector(qrng, 4, -0.2, 1.2);
        CHECK(model.predict_score(q) == model_p.predict_score(q));
    }
}

TEST_CASE("cart labels are invariant under monotone feature transforms") {
    auto m = consistent_data(60, 3, 33);
    auto model = fit(ModelSpec::decision_tree(4), m);
    auto transformed = m;
    for (std::size_t r = 0; r < m.n_rows(); ++r)
        for (std::size_t c = 0; c < m.n_features(); ++c)
            transformed.values.at(r, c) = std::exp(2.0 * m.values.at(r, c)) + 1.0;
    auto model_t = fit(ModelSpec::decision_tree(4), transformed);
    for (std::size_t r = 0; r < m.n_rows(); ++r)
        CHECK(model.predict_label(m.values.row(r)) == model_t.predict_label(transformed.values.row(r)));
}

TEST_CASE("fit validation errors") {
    auto single = testutil::make_matrix({{1, 2}, {2, 3}}, {1, 1});
    CHECK(thrown([&] { fit(ModelSpec::knn(1), single); }) == errc::single_class_input);

    auto nonfinite = testutil::make_matrix({{1, 2}, {2, std::nan("")}}, {1, 0});
    CHECK(thrown([&] { fit(ModelSpec::decision_tree(), nonfinite); }) == errc::non_finite_feature);

    auto ok = testutil::make_matrix({{1, 2}, {2, 3}}, {1, 0});
    CHECK(thrown([&] { fit(ModelSpec::knn(5), ok); }) == errc::invalid_spec);
    auto model = fit(ModelSpec::knn(1), ok);
    std::vector<double> wrong_arity = {1, 2, 3};
    CHECK(thrown([&] { (void)model.predict_score(wrong_arity); }) == errc::arity_mismatch);
}

TEST_CASE("knn standardization rescales distances") {
    // feature 1 dominates raw euclidean distance; z-scoring restores feature 0
    auto m = testutil::make_matrix({{0.0, 1000.0}, {0.1, 3000.0}, {1.0, 2000.0}, {1.1, 4000.0}},
                                   {1, 1, 0, 0});
    auto raw = fit(ModelSpec::knn(1), m);
    auto scaled = fit(ModelSpec::knn(1, 0, true), m);
    std::vector<double> q = {0.05, 2400.0};
    CHECK(raw.predict_label(q) == Label::no_recurrence);     // nearest by raw distance is row 2
    CHECK(scaled.predict_label(q) == Label::recurrence);     // nearest by z-scored distance is row 0/1
}

TEST_CASE("label threshold at 0.5 for tree scores") {
    auto stump = [](double leaf_value) {
        TrainedModel model;
        model.spec = ModelSpec::decision_tree();
        model.n_features = 1;
        Tree t;
        TreeNode leaf;
        leaf.value = leaf_value;
        leaf.n_samples = 10;
        t.nodes.push_back(leaf);
        model.state = TreeState{t};
        return model;
    };
    std::vector<double> x = {0.0};
    CHECK(stump(0.49).predict_label(x) == Label::no_recurrence);
    CHECK(stump(0.5).predict_label(x) == Label::recurrence);  // >= 0.5 is positive
    CHECK(stump(0.51).predict_label(x) == Label::recurrence);
}

TEST_CASE("boosting loss stays monotone with a fractional learning rate") {
    auto m = consistent_data(40, 4, 9);
    auto model = fit(ModelSpec::gradient_boosting(50, 0.5, 3), m);
    const auto& st = std::get<BoostState>(model.state);
    for (std::size_t i = 1; i < st.train_loss.size(); ++i)
        CHECK(st.train_loss[i] <= st.train_loss[i - 1] + 1e-12);
}

TEST_CASE("model json round-trip preserves predictions") {
    auto m = consistent_data(40, 4, 55);
    RngStream qrng(66);
    for (auto spec : {ModelSpec::knn(3, 1), ModelSpec::decision_tree(5, 2, 1),
                      ModelSpec::random_forest(20, 4, 1), ModelSpec::gradient_boosting(30, 1.0, 3, 1)}) {
        auto model = fit(spec, m);
        auto j = model.to_json();
        auto back = TrainedModel::from_json(nlohmann::json::parse(j.dump()));
        for (int i = 0; i < 25; ++i) {
            auto q = testutil::random_vector(qrng, 4, -0.5, 1.5);
            CHECK(model.predict_score(q) == back.predict_score(q));
        }
    }
}
