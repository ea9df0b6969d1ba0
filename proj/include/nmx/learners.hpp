#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nmx/error.hpp"
#include "nmx/features.hpp"
#include "nmx/matrix.hpp"
#include "nmx/rng.hpp"
#include "nmx/stats_types.hpp"

namespace nmx {

// ---------------------------------------------------------------------------
// Model specifications
// ---------------------------------------------------------------------------

struct KnnSpec {
    std::size_t k = 3;
    bool standardize = false;  // optional z-scoring of features; off by default
};

struct TreeSpec {
    std::size_t max_depth = 0;  // 0 = unlimited
    std::size_t min_split = 2;
};

struct ForestSpec {
    std::size_t n_trees = 100;
    std::size_t max_depth = 4;
    // features per split: floor(sqrt(P)), at least 1
};

struct BoostSpec {
    std::size_t n_stages = 100;
    double learning_rate = 1.0;
    std::size_t tree_depth = 3;
};

struct ModelSpec {
    std::variant<KnnSpec, TreeSpec, ForestSpec, BoostSpec> algo = KnnSpec{};
    std::uint64_t seed = 0;

    static ModelSpec knn(std::size_t k = 3, std::uint64_t seed = 0, bool standardize = false) {
        return {KnnSpec{k, standardize}, seed};
    }
    static ModelSpec decision_tree(std::size_t max_depth = 0, std::size_t min_split = 2,
                                   std::uint64_t seed = 0) {
        return {TreeSpec{max_depth, min_split}, seed};
    }
    static ModelSpec random_forest(std::size_t n_trees = 100, std::size_t max_depth = 4,
                                   std::uint64_t seed = 0) {
        return {ForestSpec{n_trees, max_depth}, seed};
    }
    static ModelSpec gradient_boosting(std::size_t n_stages = 100, double learning_rate = 1.0,
                                       std::size_t tree_depth = 3, std::uint64_t seed = 0) {
        return {BoostSpec{n_stages, learning_rate, tree_depth}, seed};
    }

    const char* name() const {
        switch (algo.index()) {
            case 0: return "knn";
            case 1: return "dt";
            case 2: return "rf";
            default: return "gb";
        }
    }

    ModelSpec with_seed(std::uint64_t s) const {
        ModelSpec out = *this;
        out.seed = s;
        return out;
    }
};

// ---------------------------------------------------------------------------
// Trees. One node type serves classification (value = positive-class leaf
// fraction) and boosting regression (value = leaf gamma).
// ---------------------------------------------------------------------------

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0;
    int left = -1;
    int right = -1;
    double value = 0;
    std::uint32_t n_samples = 0;
};

struct Tree {
    std::vector<TreeNode> nodes;  // node 0 is the root

    double predict(std::span<const double> x) const {
        int i = 0;
        while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
            const auto& n = nodes[static_cast<std::size_t>(i)];
            i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }
};

namespace detail {

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0;
    double score = std::numeric_limits<double>::infinity();  // lower is better
};

// Candidate thresholds sit at midpoints between adjacent distinct sorted
// values; equal score keeps the first candidate in (feature, threshold)
// order, which makes tie-breaking deterministic. `prepare` runs once per
// sorted feature ordering (for prefix-sum setup); `score(cut)` rates the
// split placing order[0..cut) on the left.
template <typename PrepFn, typename ScoreFn>
SplitChoice best_split(const Matrix& x, const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& features, PrepFn&& prepare, ScoreFn&& score) {
    SplitChoice best;
    std::vector<std::pair<double, std::size_t>> order(rows.size());  // (value, row)

    for (std::size_t f : features) {
        for (std::size_t i = 0; i < rows.size(); ++i) order[i] = {x.at(rows[i], f), rows[i]};
        std::sort(order.begin(), order.end());
        prepare(order);
        for (std::size_t i = 1; i < order.size(); ++i) {
            if (order[i].first == order[i - 1].first) continue;
            double s = score(i);
            if (s < best.score) {
                double thr = order[i - 1].first + (order[i].first - order[i - 1].first) / 2.0;
                if (!(thr < order[i].first)) thr = order[i - 1].first;  // rounding guard
                best = {true, f, thr, s};
            }
        }
    }
    return best;
}

struct ClassTreeParams {
    std::size_t max_depth = 0;  // 0 = unlimited
    std::size_t min_split = 2;
    std::size_t features_per_split = 0;  // 0 = all features
};

inline double gini_weighted(std::size_t pos_l, std::size_t n_l, std::size_t pos_total, std::size_t n_total) {
    auto gini = [](std::size_t pos, std::size_t n) {
        if (n == 0) return 0.0;
        double p = static_cast<double>(pos) / static_cast<double>(n);
        return 2.0 * p * (1.0 - p);
    };
    std::size_t n_r = n_total - n_l;
    std::size_t pos_r = pos_total - pos_l;
    return (static_cast<double>(n_l) * gini(pos_l, n_l) + static_cast<double>(n_r) * gini(pos_r, n_r)) /
           static_cast<double>(n_total);
}

// CART with Gini impurity. `y` holds 0/1 class indicators (1 = positive).
inline void grow_class_node(Tree& tree, const Matrix& x, const std::vector<int>& y,
                            std::vector<std::size_t> rows, std::size_t depth, const ClassTreeParams& params,
                            RngStream* feature_rng) {
    std::size_t pos = 0;
    for (std::size_t r : rows) pos += static_cast<std::size_t>(y[r]);
    const std::size_t n = rows.size();

    auto make_leaf = [&] {
        TreeNode leaf;
        leaf.value = static_cast<double>(pos) / static_cast<double>(n);
        leaf.n_samples = static_cast<std::uint32_t>(n);
        tree.nodes.push_back(leaf);
    };

    bool depth_capped = params.max_depth > 0 && depth >= params.max_depth;
    if (n < params.min_split || pos == 0 || pos == n || depth_capped) {
        make_leaf();
        return;
    }

    std::vector<std::size_t> features;
    if (params.features_per_split > 0 && feature_rng) {
        features = feature_rng->sample_without_replacement(x.cols, params.features_per_split);
        std::sort(features.begin(), features.end());
    } else {
        features.resize(x.cols);
        for (std::size_t f = 0; f < x.cols; ++f) features[f] = f;
    }

    const double parent = gini_weighted(pos, n, pos, n);  // gini of the unsplit node
    std::vector<std::size_t> prefix_pos(n + 1, 0);
    auto split = best_split(
        x, rows, features,
        [&](const std::vector<std::pair<double, std::size_t>>& order) {
            for (std::size_t i = 0; i < order.size(); ++i)
                prefix_pos[i + 1] = prefix_pos[i] + static_cast<std::size_t>(y[order[i].second]);
        },
        [&](std::size_t cut) { return gini_weighted(prefix_pos[cut], cut, pos, n); });

    if (!split.found || !(parent - split.score > 1e-12)) {
        make_leaf();
        return;
    }

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows)
        (x.at(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
    if (left_rows.empty() || right_rows.empty()) {
        make_leaf();
        return;
    }

    std::size_t self = tree.nodes.size();
    TreeNode node;
    node.feature = static_cast<int>(split.feature);
    node.threshold = split.threshold;
    node.n_samples = static_cast<std::uint32_t>(n);
    tree.nodes.push_back(node);
    tree.nodes[self].left = static_cast<int>(tree.nodes.size());
    grow_class_node(tree, x, y, std::move(left_rows), depth + 1, params, feature_rng);
    tree.nodes[self].right = static_cast<int>(tree.nodes.size());
    grow_class_node(tree, x, y, std::move(right_rows), depth + 1, params, feature_rng);
}

inline Tree grow_class_tree(const Matrix& x, const std::vector<int>& y, std::vector<std::size_t> rows,
                            const ClassTreeParams& params, RngStream* feature_rng = nullptr) {
    Tree t;
    grow_class_node(t, x, y, std::move(rows), 0, params, feature_rng);
    return t;
}

// Least-squares regression tree for boosting stages. Leaf values are set by
// the caller through `leaf_value` over the rows routed to each leaf.
template <typename LeafFn>
void grow_reg_node(Tree& tree, const Matrix& x, const std::vector<double>& target,
                   std::vector<std::size_t> rows, std::size_t depth, std::size_t max_depth,
                   LeafFn&& leaf_value) {
    const std::size_t n = rows.size();
    double sum = 0;
    for (std::size_t r : rows) sum += target[r];

    auto make_leaf = [&] {
        TreeNode leaf;
        leaf.value = leaf_value(rows);
        leaf.n_samples = static_cast<std::uint32_t>(n);
        tree.nodes.push_back(leaf);
    };
    if (n < 2 || depth >= max_depth) {
        make_leaf();
        return;
    }

    std::vector<std::size_t> all_features(x.cols);
    for (std::size_t f = 0; f < x.cols; ++f) all_features[f] = f;

    // minimize SSE == maximize sum_l^2/n_l + sum_r^2/n_r; score is its negation
    std::vector<double> prefix_sum(n + 1, 0.0);
    const double base = sum * sum / static_cast<double>(n);
    auto split = best_split(
        x, rows, all_features,
        [&](const std::vector<std::pair<double, std::size_t>>& order) {
            for (std::size_t i = 0; i < order.size(); ++i)
                prefix_sum[i + 1] = prefix_sum[i] + target[order[i].second];
        },
        [&](std::size_t cut) {
            double sl = prefix_sum[cut];
            double sr = sum - sl;
            return -(sl * sl / static_cast<double>(cut) + sr * sr / static_cast<double>(n - cut));
        });
    if (!split.found || !(-split.score - base > 1e-12)) {
        make_leaf();
        return;
    }

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows)
        (x.at(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
    if (left_rows.empty() || right_rows.empty()) {
        make_leaf();
        return;
    }

    std::size_t self = tree.nodes.size();
    TreeNode node;
    node.feature = static_cast<int>(split.feature);
    node.threshold = split.threshold;
    node.n_samples = static_cast<std::uint32_t>(n);
    tree.nodes.push_back(node);
    tree.nodes[self].left = static_cast<int>(tree.nodes.size());
    grow_reg_node(tree, x, target, std::move(left_rows), depth + 1, max_depth, leaf_value);
    tree.nodes[self].right = static_cast<int>(tree.nodes.size());
    grow_reg_node(tree, x, target, std::move(right_rows), depth + 1, max_depth, leaf_value);
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double softplus(double z) { return z > 35.0 ? z : std::log1p(std::exp(z)); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Trained model
// ---------------------------------------------------------------------------

struct KnnState {
    Matrix train_x;  // z-scored when KnnSpec.standardize is set
    std::vector<int> train_y;
    std::vector<double> mean, scale;  // empty unless standardizing
    Label majority = Label::recurrence;
};
struct TreeState {
    Tree tree;
};
struct ForestState {
    std::vector<Tree> trees;
};
struct BoostState {
    double f0 = 0;
    std::vector<Tree> trees;
    std::vector<double> train_loss;  // mean logistic loss: index 0 = prior, then after each stage
};

class TrainedModel {
public:
    ModelSpec spec;
    std::size_t n_features = 0;
    std::variant<KnnState, TreeState, ForestState, BoostState> state;

    double predict_score(std::span<const double> x) const {
        if (x.size() != n_features)
            raise(errc::arity_mismatch, "predict expects " + std::to_string(n_features) + " features, got " +
                                            std::to_string(x.size()));
        switch (state.index()) {
            case 0: return knn_score(std::get<KnnState>(state), x);
            case 1: return std::get<TreeState>(state).tree.predict(x);
            case 2: {
                const auto& forest = std::get<ForestState>(state).trees;
                double s = 0;
                for (const auto& t : forest) s += t.predict(x);
                return s / static_cast<double>(forest.size());
            }
            default: {
                const auto& b = std::get<BoostState>(state);
                double f = b.f0;
                double lr = std::get<BoostSpec>(spec.algo).learning_rate;
                for (const auto& t : b.trees) f += lr * t.predict(x);
                return detail::sigmoid(f);
            }
        }
    }

    // positive iff score >= 0.5; a KNN score of exactly 0.5 (even k only)
    // resolves toward the training-set majority class instead.
    Label predict_label(std::span<const double> x) const {
        double s = predict_score(x);
        if (state.index() == 0 && s == 0.5) return std::get<KnnState>(state).majority;
        return s >= 0.5 ? Label::recurrence : Label::no_recurrence;
    }

    nlohmann::ordered_json to_json() const;
    static TrainedModel from_json(const nlohmann::json& j);

private:
    double knn_score(const KnnState& st, std::span<const double> x) const {
        const auto& spec_knn = std::get<KnnSpec>(spec.algo);
        std::vector<double> q(x.begin(), x.end());
        if (!st.mean.empty())
            for (std::size_t c = 0; c < q.size(); ++c) q[c] = (q[c] - st.mean[c]) / st.scale[c];
        std::vector<std::pair<double, std::size_t>> dist(st.train_x.rows);
        for (std::size_t r = 0; r < st.train_x.rows; ++r) {
            double s = 0;
            for (std::size_t c = 0; c < st.train_x.cols; ++c) {
                double d = q[c] - st.train_x.at(r, c);
                s += d * d;
            }
            dist[r] = {s, r};  // ties break toward the lower row index
        }
        std::size_t k = spec_knn.k;
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        std::size_t pos = 0;
        for (std::size_t i = 0; i < k; ++i) pos += static_cast<std::size_t>(st.train_y[dist[i].second]);
        return static_cast<double>(pos) / static_cast<double>(k);
    }
};

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<int> class_indicators(const FeatureMatrix& m) {
    std::vector<int> y(m.n_rows());
    std::size_t pos = 0, neg = 0;
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
        switch (m.labels[r]) {
            case Label::recurrence: y[r] = 1; ++pos; break;
            case Label::no_recurrence: y[r] = 0; ++neg; break;
            case Label::unlabeled: raise(errc::invalid_spec, "row '" + m.subject_ids[r] + "' is unlabeled");
        }
    }
    if (pos == 0 || neg == 0) raise(errc::single_class_input, "training data holds a single class");
    return y;
}

inline void check_finite(const FeatureMatrix& m) {
    for (std::size_t r = 0; r < m.values.rows; ++r)
        for (std::size_t c = 0; c < m.values.cols; ++c)
            if (!std::isfinite(m.values.at(r, c)))
                raise(errc::non_finite_feature, "non-finite value at row " + std::to_string(r) + ", column " +
                                                    m.feature_ids[c]);
}

inline TrainedModel fit_knn(const ModelSpec& spec, const FeatureMatrix& m, const std::vector<int>& y) {
    const auto& ks = std::get<KnnSpec>(spec.algo);
    if (ks.k == 0 || ks.k > m.n_rows())
        raise(errc::invalid_spec, "knn k=" + std::to_string(ks.k) + " outside [1, n_train]");
    TrainedModel model;
    model.spec = spec;
    model.n_features = m.n_features();
    KnnState st;
    st.train_x = m.values;
    st.train_y = y;
    if (ks.standardize) {
        st.mean.resize(m.n_features());
        st.scale.resize(m.n_features());
        for (std::size_t c = 0; c < m.n_features(); ++c) {
            auto col = m.values.column(c);
            st.mean[c] = vec_mean(col);
            double sd = vec_pop_std(col);
            st.scale[c] = sd > 0 ? sd : 1.0;
            for (std::size_t r = 0; r < st.train_x.rows; ++r)
                st.train_x.at(r, c) = (st.train_x.at(r, c) - st.mean[c]) / st.scale[c];
        }
    }
    std::size_t pos = 0;
    for (int v : y) pos += static_cast<std::size_t>(v);
    // majority ties resolve toward the positive class
    st.majority = 2 * pos >= y.size() ? Label::recurrence : Label::no_recurrence;
    model.state = std::move(st);
    return model;
}

inline TrainedModel fit_tree(const ModelSpec& spec, const FeatureMatrix& m, const std::vector<int>& y) {
    const auto& ts = std::get<TreeSpec>(spec.algo);
    TrainedModel model;
    model.spec = spec;
    model.n_features = m.n_features();
    std::vector<std::size_t> rows(m.n_rows());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
    ClassTreeParams params{ts.max_depth, ts.min_split, 0};
    model.state = TreeState{grow_class_tree(m.values, y, std::move(rows), params)};
    return model;
}

inline TrainedModel fit_forest(const ModelSpec& spec, const FeatureMatrix& m, const std::vector<int>& y) {
    const auto& fs = std::get<ForestSpec>(spec.algo);
    if (fs.n_trees == 0) raise(errc::invalid_spec, "random forest needs at least one tree");
    TrainedModel model;
    model.spec = spec;
    model.n_features = m.n_features();
    ForestState st;
    st.trees.reserve(fs.n_trees);
    std::size_t mtry = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(
                                                    static_cast<double>(m.n_features())))));
    ClassTreeParams params{fs.max_depth, 2, mtry};
    for (std::size_t t = 0; t < fs.n_trees; ++t) {
        // per-tree stream keyed by (seed, tree index): scheduling-independent
        RngStream rng(spec.seed, t);
        std::vector<std::size_t> bootstrap(m.n_rows());
        for (auto& r : bootstrap) r = rng.next_below(m.n_rows());
        st.trees.push_back(grow_class_tree(m.values, y, std::move(bootstrap), params, &rng));
    }
    model.state = std::move(st);
    return model;
}

inline TrainedModel fit_boost(const ModelSpec& spec, const FeatureMatrix& m, const std::vector<int>& y) {
    const auto& bs = std::get<BoostSpec>(spec.algo);
    TrainedModel model;
    model.spec = spec;
    model.n_features = m.n_features();
    BoostState st;

    const std::size_t n = m.n_rows();
    std::size_t pos = 0;
    for (int v : y) pos += static_cast<std::size_t>(v);
    double prior = static_cast<double>(pos) / static_cast<double>(n);
    st.f0 = std::log(prior / (1.0 - prior));

    std::vector<double> f(n, st.f0);
    std::vector<double> prob(n), residual(n);
    auto mean_loss = [&] {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += detail::softplus(y[i] == 1 ? -f[i] : f[i]);
        return s / static_cast<double>(n);
    };
    st.train_loss.push_back(mean_loss());

    std::vector<std::size_t> all_rows(n);
    for (std::size_t r = 0; r < n; ++r) all_rows[r] = r;

    for (std::size_t stage = 0; stage < bs.n_stages; ++stage) {
        for (std::size_t i = 0; i < n; ++i) {
            prob[i] = detail::sigmoid(f[i]);
            residual[i] = static_cast<double>(y[i]) - prob[i];
        }
        Tree tree;
        // leaf gamma: one Newton step on the logistic loss over the leaf rows
        grow_reg_node(tree, m.values, residual, all_rows, 0, bs.tree_depth, [&](const std::vector<std::size_t>& rows) {
            double g = 0, h = 0;
            for (std::size_t r : rows) {
                g += residual[r];
                h += prob[r] * (1.0 - prob[r]);
            }
            return h > 1e-12 ? g / h : 0.0;
        });
        for (std::size_t i = 0; i < n; ++i) f[i] += bs.learning_rate * tree.predict(m.values.row(i));
        st.trees.push_back(std::move(tree));
        st.train_loss.push_back(mean_loss());
    }
    model.state = std::move(st);
    return model;
}

}  // namespace detail

inline TrainedModel fit(const ModelSpec& spec, const FeatureMatrix& m) {
    if (m.n_rows() < 2) raise(errc::invalid_spec, "training needs at least two rows");
    detail::check_finite(m);
    auto y = detail::class_indicators(m);
    switch (spec.algo.index()) {
        case 0: return detail::fit_knn(spec, m, y);
        case 1: return detail::fit_tree(spec, m, y);
        case 2: return detail::fit_forest(spec, m, y);
        default: return detail::fit_boost(spec, m, y);
    }
}

// ---------------------------------------------------------------------------
// JSON serialization (versioned)
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json tree_to_json(const Tree& t) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& n : t.nodes) {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value},
                         {"n", n.n_samples}});
    }
    return nodes;
}

inline Tree tree_from_json(const nlohmann::json& j) {
    Tree t;
    for (const auto& nj : j) {
        TreeNode n;
        n.feature = nj.at("feature").get<int>();
        n.threshold = nj.at("threshold").get<double>();
        n.left = nj.at("left").get<int>();
        n.right = nj.at("right").get<int>();
        n.value = nj.at("value").get<double>();
        n.n_samples = nj.at("n").get<std::uint32_t>();
        t.nodes.push_back(n);
    }
    return t;
}

}  // namespace detail

inline nlohmann::ordered_json TrainedModel::to_json() const {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["algorithm"] = spec.name();
    j["seed"] = spec.seed;
    j["n_features"] = n_features;
    switch (spec.algo.index()) {
        case 0: {
            const auto& ks = std::get<KnnSpec>(spec.algo);
            j["params"] = {{"k", ks.k}, {"standardize", ks.standardize}};
            const auto& st = std::get<KnnState>(state);
            j["state"] = {{"rows", st.train_x.rows},
                          {"cols", st.train_x.cols},
                          {"x", st.train_x.data},
                          {"y", st.train_y},
                          {"mean", st.mean},
                          {"scale", st.scale},
                          {"majority", label_to_string(st.majority)}};
            break;
        }
        case 1: {
            const auto& ts = std::get<TreeSpec>(spec.algo);
            j["params"] = {{"max_depth", ts.max_depth}, {"min_split", ts.min_split}};
            j["state"] = {{"tree", detail::tree_to_json(std::get<TreeState>(state).tree)}};
            break;
        }
        case 2: {
            const auto& fs = std::get<ForestSpec>(spec.algo);
            j["params"] = {{"n_trees", fs.n_trees}, {"max_depth", fs.max_depth}};
            nlohmann::ordered_json trees = nlohmann::ordered_json::array();
            for (const auto& t : std::get<ForestState>(state).trees) trees.push_back(detail::tree_to_json(t));
            j["state"] = {{"trees", std::move(trees)}};
            break;
        }
        default: {
            const auto& bs = std::get<BoostSpec>(spec.algo);
            j["params"] = {{"n_stages", bs.n_stages},
                           {"learning_rate", bs.learning_rate},
                           {"tree_depth", bs.tree_depth}};
            const auto& st = std::get<BoostState>(state);
            nlohmann::ordered_json trees = nlohmann::ordered_json::array();
            for (const auto& t : st.trees) trees.push_back(detail::tree_to_json(t));
            j["state"] = {{"f0", st.f0}, {"trees", std::move(trees)}, {"train_loss", st.train_loss}};
            break;
        }
    }
    return j;
}

inline TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
    if (j.at("format_version").get<int>() != 1)
        raise(errc::invalid_config, "unsupported model format_version");
    TrainedModel model;
    model.n_features = j.at("n_features").get<std::size_t>();
    std::string algo = j.at("algorithm").get<std::string>();
    std::uint64_t seed = j.at("seed").get<std::uint64_t>();
    const auto& p = j.at("params");
    const auto& s = j.at("state");
    if (algo == "knn") {
        model.spec = ModelSpec::knn(p.at("k").get<std::size_t>(), seed, p.at("standardize").get<bool>());
        KnnState st;
        st.train_x.rows = s.at("rows").get<std::size_t>();
        st.train_x.cols = s.at("cols").get<std::size_t>();
        st.train_x.data = s.at("x").get<std::vector<double>>();
        st.train_y = s.at("y").get<std::vector<int>>();
        st.mean = s.at("mean").get<std::vector<double>>();
        st.scale = s.at("scale").get<std::vector<double>>();
        st.majority = label_from_string(s.at("majority").get<std::string>());
        model.state = std::move(st);
    } else if (algo == "dt") {
        model.spec = ModelSpec::decision_tree(p.at("max_depth").get<std::size_t>(),
                                              p.at("min_split").get<std::size_t>(), seed);
        model.state = TreeState{detail::tree_from_json(s.at("tree"))};
    } else if (algo == "rf") {
        model.spec = ModelSpec::random_forest(p.at("n_trees").get<std::size_t>(),
                                              p.at("max_depth").get<std::size_t>(), seed);
        ForestState st;
        for (const auto& tj : s.at("trees")) st.trees.push_back(detail::tree_from_json(tj));
        model.state = std::move(st);
    } else if (algo == "gb") {
        model.spec = ModelSpec::gradient_boosting(p.at("n_stages").get<std::size_t>(),
                                                  p.at("learning_rate").get<double>(),
                                                  p.at("tree_depth").get<std::size_t>(), seed);
        BoostState st;
        st.f0 = s.at("f0").get<double>();
        for (const auto& tj : s.at("trees")) st.trees.push_back(detail::tree_from_json(tj));
        st.train_loss = s.at("train_loss").get<std::vector<double>>();
        model.state = std::move(st);
    } else {
        raise(errc::invalid_config, "unknown algorithm '" + algo + "'");
    }
    return model;
}

}  // namespace nmx
