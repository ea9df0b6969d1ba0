#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nmx/csv.hpp"
#include "nmx/error.hpp"
#include "nmx/eval.hpp"
#include "nmx/features.hpp"
#include "nmx/freesurfer.hpp"
#include "nmx/learners.hpp"
#include "nmx/selection.hpp"
#include "nmx/smote.hpp"
#include "nmx/util.hpp"

namespace nmx {

enum class SmoteStage { pre_split, train_only };

inline const char* smote_stage_name(SmoteStage s) {
    return s == SmoteStage::pre_split ? "pre-split" : "train-only";
}

inline SmoteStage smote_stage_from_string(std::string_view s) {
    std::string v = to_lower(trim(s));
    if (v == "pre-split" || v == "pre_split") return SmoteStage::pre_split;
    if (v == "train-only" || v == "train_only") return SmoteStage::train_only;
    raise(errc::invalid_config, "smote_stage must be pre-split or train-only");
}

// Full run configuration. A run is reproducible from this plus the input
// files alone; the config hash covers every analysis-relevant setting (not
// the output directory, so identical runs into different directories compare
// byte-for-byte).
struct PipelineConfig {
    std::filesystem::path manifest;
    std::filesystem::path out_dir;
    std::uint64_t seed = 0;
    bool lenient = false;
    SmoteStage smote_stage = SmoteStage::pre_split;

    AsymmetryConfig asymmetry;
    std::size_t smote_k = 5;

    SelectionMethod selection_method = SelectionMethod::sfs;
    std::string selection_wrapper = "knn";
    std::size_t selection_k = 5;  // k_max for SFS, k_min for SBE
    std::size_t cv_folds = 5;
    std::size_t report_subset_size = 5;
    std::vector<std::size_t> cv_sizes = {5, 7, 15, 30};

    std::vector<std::string> classifiers = {"knn", "dt", "rf", "gb"};
    std::size_t knn_k = 3;
    bool knn_standardize = false;
    std::size_t dt_max_depth = 0;  // 0 = unlimited
    std::size_t dt_min_split = 2;
    std::size_t rf_trees = 100;
    std::size_t rf_depth = 4;
    std::size_t gb_stages = 100;
    double gb_learning_rate = 1.0;
    std::size_t gb_depth = 3;

    bool write_models = true;
    bool train_metrics_cv = false;  // Train columns: resubstitution by default

    static PipelineConfig parse(std::string_view text, const std::filesystem::path& base_dir);
    static PipelineConfig parse_file(const std::filesystem::path& path) {
        return parse(read_text_file(path), path.has_parent_path() ? path.parent_path() : ".");
    }

    std::string canonical_text() const;
    std::string config_hash() const { return hex64(fnv1a64(canonical_text())); }

    ModelSpec classifier_spec(const std::string& name, std::uint64_t fit_seed) const {
        if (name == "knn") return ModelSpec::knn(knn_k, fit_seed, knn_standardize);
        if (name == "dt") return ModelSpec::decision_tree(dt_max_depth, dt_min_split, fit_seed);
        if (name == "rf") return ModelSpec::random_forest(rf_trees, rf_depth, fit_seed);
        if (name == "gb") return ModelSpec::gradient_boosting(gb_stages, gb_learning_rate, gb_depth, fit_seed);
        raise(errc::invalid_config, "unknown classifier '" + name + "'");
    }

    void validate() const {
        if (manifest.empty()) raise(errc::invalid_config, "manifest path is required");
        if (out_dir.empty()) raise(errc::invalid_config, "out_dir is required");
        if (classifiers.empty()) raise(errc::invalid_config, "at least one classifier is required");
        for (const auto& c : classifiers) (void)classifier_spec(c, 0);
        (void)classifier_spec(selection_wrapper, 0);
        if (selection_k == 0) raise(errc::invalid_config, "selection_k must be >= 1");
        if (cv_folds < 2) raise(errc::invalid_config, "cv_folds must be >= 2");
        if (report_subset_size == 0) raise(errc::invalid_config, "report_subset_size must be >= 1");
        if (asymmetry.epsilon_multiplier <= 0) raise(errc::invalid_config, "epsilon_multiplier must be > 0");
        if (asymmetry.mean_guard < 0) raise(errc::invalid_config, "mean_guard must be >= 0");
    }
};

inline PipelineConfig PipelineConfig::parse(std::string_view text, const std::filesystem::path& base_dir) {
    PipelineConfig cfg;
    std::size_t line_no = 0;
    for (const auto& raw_line : split_char(text, '\n')) {
        ++line_no;
        std::string line = raw_line;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            raise(errc::invalid_config, "config line " + std::to_string(line_no) + ": expected key = value");
        std::string key(trim(sv.substr(0, eq)));
        std::string value(trim(sv.substr(eq + 1)));
        auto bad = [&](const std::string& what) {
            raise(errc::invalid_config, "config line " + std::to_string(line_no) + ": " + what);
        };
        auto as_u64 = [&](std::size_t& out) {
            std::uint64_t v = 0;
            if (!try_parse_u64(value, v)) bad("'" + value + "' is not a non-negative integer");
            out = static_cast<std::size_t>(v);
        };
        auto as_bool = [&](bool& out) {
            std::string v = to_lower(value);
            if (v == "true" || v == "1" || v == "yes") out = true;
            else if (v == "false" || v == "0" || v == "no") out = false;
            else bad("'" + value + "' is not a boolean");
        };
        auto as_path = [&](std::filesystem::path& out) {
            std::filesystem::path p(value);
            out = p.is_absolute() ? p : base_dir / p;
        };

        if (key == "manifest") as_path(cfg.manifest);
        else if (key == "out_dir") as_path(cfg.out_dir);
        else if (key == "seed") {
            std::uint64_t v = 0;
            if (!try_parse_u64(value, v)) bad("seed unparseable");
            cfg.seed = v;
        } else if (key == "lenient") as_bool(cfg.lenient);
        else if (key == "smote_stage") cfg.smote_stage = smote_stage_from_string(value);
        else if (key == "epsilon_multiplier") {
            if (!try_parse_double(value, cfg.asymmetry.epsilon_multiplier)) bad("number expected");
        } else if (key == "mean_guard") {
            if (!try_parse_double(value, cfg.asymmetry.mean_guard)) bad("number expected");
        } else if (key == "smote_k") as_u64(cfg.smote_k);
        else if (key == "selection_method") {
            std::string v = to_lower(value);
            if (v == "sfs") cfg.selection_method = SelectionMethod::sfs;
            else if (v == "sbe") cfg.selection_method = SelectionMethod::sbe;
            else bad("selection_method must be sfs or sbe");
        } else if (key == "selection_wrapper") cfg.selection_wrapper = to_lower(value);
        else if (key == "selection_k") as_u64(cfg.selection_k);
        else if (key == "cv_folds") as_u64(cfg.cv_folds);
        else if (key == "report_subset_size") as_u64(cfg.report_subset_size);
        else if (key == "cv_sizes") {
            cfg.cv_sizes.clear();
            for (auto& tok : split_char(value, ',')) {
                std::uint64_t v = 0;
                if (!try_parse_u64(trim(tok), v)) bad("cv_sizes entry '" + tok + "' unparseable");
                cfg.cv_sizes.push_back(static_cast<std::size_t>(v));
            }
        } else if (key == "classifiers") {
            cfg.classifiers.clear();
            for (auto& tok : split_char(value, ','))
                if (!trim(tok).empty()) cfg.classifiers.push_back(to_lower(trim(tok)));
        } else if (key == "knn_k") as_u64(cfg.knn_k);
        else if (key == "knn_standardize") as_bool(cfg.knn_standardize);
        else if (key == "dt_max_depth") as_u64(cfg.dt_max_depth);
        else if (key == "dt_min_split") as_u64(cfg.dt_min_split);
        else if (key == "rf_trees") as_u64(cfg.rf_trees);
        else if (key == "rf_depth") as_u64(cfg.rf_depth);
        else if (key == "gb_stages") as_u64(cfg.gb_stages);
        else if (key == "gb_learning_rate") {
            if (!try_parse_double(value, cfg.gb_learning_rate)) bad("number expected");
        } else if (key == "gb_depth") as_u64(cfg.gb_depth);
        else if (key == "write_models") as_bool(cfg.write_models);
        else if (key == "train_metrics") {
            std::string v = to_lower(value);
            if (v == "resubstitution") cfg.train_metrics_cv = false;
            else if (v == "cv") cfg.train_metrics_cv = true;
            else bad("train_metrics must be resubstitution or cv");
        } else bad("unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

inline std::string PipelineConfig::canonical_text() const {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("classifiers", [&] {
        std::string s;
        for (const auto& c : classifiers) s += (s.empty() ? "" : ",") + c;
        return s;
    }());
    kv.emplace_back("cv_folds", std::to_string(cv_folds));
    kv.emplace_back("cv_sizes", [&] {
        std::string s;
        for (auto v : cv_sizes) s += (s.empty() ? "" : ",") + std::to_string(v);
        return s;
    }());
    kv.emplace_back("dt_max_depth", std::to_string(dt_max_depth));
    kv.emplace_back("dt_min_split", std::to_string(dt_min_split));
    kv.emplace_back("epsilon_multiplier", format_double(asymmetry.epsilon_multiplier));
    kv.emplace_back("gb_depth", std::to_string(gb_depth));
    kv.emplace_back("gb_learning_rate", format_double(gb_learning_rate));
    kv.emplace_back("gb_stages", std::to_string(gb_stages));
    kv.emplace_back("knn_k", std::to_string(knn_k));
    kv.emplace_back("knn_standardize", knn_standardize ? "true" : "false");
    kv.emplace_back("lenient", lenient ? "true" : "false");
    kv.emplace_back("manifest", manifest.generic_string());
    kv.emplace_back("mean_guard", format_double(asymmetry.mean_guard));
    kv.emplace_back("report_subset_size", std::to_string(report_subset_size));
    kv.emplace_back("rf_depth", std::to_string(rf_depth));
    kv.emplace_back("rf_trees", std::to_string(rf_trees));
    kv.emplace_back("seed", std::to_string(seed));
    kv.emplace_back("selection_k", std::to_string(selection_k));
    kv.emplace_back("selection_method", selection_method_name(selection_method));
    kv.emplace_back("selection_wrapper", selection_wrapper);
    kv.emplace_back("smote_k", std::to_string(smote_k));
    kv.emplace_back("smote_stage", smote_stage_name(smote_stage));
    kv.emplace_back("train_metrics", train_metrics_cv ? "cv" : "resubstitution");
    kv.emplace_back("write_models", write_models ? "true" : "false");
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

struct RunSummary {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::size_t n_subjects = 0;
    std::size_t n_features = 0;
    std::size_t pre_smote_positive = 0, pre_smote_negative = 0;
    std::size_t post_smote_rows = 0;
    std::size_t train_rows = 0, test_rows = 0;
    std::vector<std::string> selected_features;
    std::vector<std::string> warnings;
    std::vector<std::string> outputs;  // bundle-relative file names
};

namespace detail {

inline std::string opt_metric(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

inline nlohmann::ordered_json metric_json(const EvalReport& rep) {
    nlohmann::ordered_json j;
    j["auroc"] = rep.auroc_value;
    auto put = [&](const char* name, const std::optional<double>& v) {
        if (v) j[name] = *v;
        else j[name] = nullptr;
    };
    put("accuracy", rep.metric_set.accuracy);
    put("sensitivity", rep.metric_set.sensitivity);
    put("specificity", rep.metric_set.specificity);
    put("f1", rep.metric_set.f1);
    j["tp"] = rep.counts.tp;
    j["tn"] = rep.counts.tn;
    j["fp"] = rep.counts.fp;
    j["fn"] = rep.counts.fn;
    return j;
}

}  // namespace detail

// Runs the full workflow: ingest -> features -> SMOTE -> selection ->
// per-classifier train/test evaluation + cross-validation -> ranking, and
// materializes every stage product under cfg.out_dir. Byte-identical output
// for identical config and inputs.
inline RunSummary run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);

    RunSummary summary;
    summary.config_hash = cfg.config_hash();
    summary.seed = cfg.seed;
    const std::string hash = summary.config_hash;
    const std::string seed_str = std::to_string(cfg.seed);
    auto note_output = [&](const std::string& name) { summary.outputs.push_back(name); };

    // ingest + features
    ParseOptions popts;
    popts.lenient = cfg.lenient;
    auto cohort = load_cohort(cfg.manifest, popts);
    summary.n_subjects = cohort.size();
    auto features = build_matrix(cohort, cfg.asymmetry);
    summary.n_features = features.n_features();
    for (const auto& w : features.warnings) summary.warnings.push_back("features: " + w);
    write_feature_csv(features, cfg.out_dir / "features.csv");
    note_output("features.csv");

    // class balancing and split
    ResampleConfig rcfg{cfg.smote_k, ResampleConfig::Target::full_balance, derive_seed(cfg.seed, "smote")};
    for (Label l : features.labels) {
        if (l == Label::recurrence) ++summary.pre_smote_positive;
        else ++summary.pre_smote_negative;
    }

    FeatureMatrix selection_matrix, train, test;
    if (cfg.smote_stage == SmoteStage::pre_split) {
        auto sm = smote(features, rcfg);
        write_feature_csv(sm.matrix, cfg.out_dir / "resampled.csv");
        write_provenance_csv(sm.provenance, cfg.out_dir / "smote_provenance.csv");
        note_output("resampled.csv");
        note_output("smote_provenance.csv");
        selection_matrix = std::move(sm.matrix);
        auto [tr, te] = split_70_30(selection_matrix, derive_seed(cfg.seed, "split"));
        train = std::move(tr);
        test = std::move(te);
    } else {
        auto [tr0, te] = split_70_30(features, derive_seed(cfg.seed, "split"));
        auto sm = smote(tr0, rcfg);
        write_feature_csv(sm.matrix, cfg.out_dir / "resampled.csv");
        write_provenance_csv(sm.provenance, cfg.out_dir / "smote_provenance.csv");
        note_output("resampled.csv");
        note_output("smote_provenance.csv");
        selection_matrix = sm.matrix;
        train = std::move(sm.matrix);
        test = std::move(te);
    }
    summary.post_smote_rows = selection_matrix.n_rows();
    summary.train_rows = train.n_rows();
    summary.test_rows = test.n_rows();

    // wrapper selection
    const std::size_t p = selection_matrix.n_features();
    const std::size_t sel_k = std::min(cfg.selection_k, p);
    if (sel_k != cfg.selection_k)
        summary.warnings.push_back("selection_k clamped to feature count " + std::to_string(p));
    ModelSpec wrapper = cfg.classifier_spec(cfg.selection_wrapper, derive_seed(cfg.seed, "wrapper"));
    const std::uint64_t select_seed = derive_seed(cfg.seed, "select");
    SelectionTrace trace = cfg.selection_method == SelectionMethod::sfs
                               ? sfs(selection_matrix, wrapper, sel_k, cfg.cv_folds, select_seed)
                               : sbe(selection_matrix, wrapper, sel_k, cfg.cv_folds, select_seed);
    write_trace_csv(trace, selection_matrix.feature_ids, cfg.out_dir / "selection_trace.csv",
                    {"config_hash", "seed"}, {hash, seed_str});
    note_output("selection_trace.csv");

    // subsets by size, derived from the trace
    std::map<std::size_t, std::vector<std::size_t>> subsets;
    if (cfg.selection_method == SelectionMethod::sfs) {
        std::vector<std::size_t> prefix;
        for (const auto& step : trace.steps) {
            prefix.push_back(step.feature);
            subsets[prefix.size()] = prefix;
        }
    } else {
        std::vector<std::size_t> surviving(p);
        for (std::size_t c = 0; c < p; ++c) surviving[c] = c;
        subsets[p] = surviving;
        for (const auto& step : trace.steps) {
            surviving.erase(std::find(surviving.begin(), surviving.end(), step.feature));
            subsets[surviving.size()] = surviving;
        }
    }
    auto subset_of_size = [&](std::size_t size) -> std::vector<std::size_t> {
        size = std::max<std::size_t>(1, std::min(size, p));
        if (auto it = subsets.find(size); it != subsets.end()) return it->second;
        // grow the largest known smaller subset with deterministically shuffled leftovers
        std::vector<std::size_t> best;
        for (const auto& [s, v] : subsets)
            if (s <= size && v.size() > best.size()) best = v;
        std::vector<bool> used(p, false);
        for (std::size_t c : best) used[c] = true;
        std::vector<std::size_t> pool;
        for (std::size_t c = 0; c < p; ++c)
            if (!used[c]) pool.push_back(c);
        RngStream rng(derive_seed(cfg.seed, "subset_pad"), size);
        rng.shuffle(pool);
        for (std::size_t i = 0; best.size() < size && i < pool.size(); ++i) best.push_back(pool[i]);
        return best;
    };

    // ranking (forward traces only)
    if (cfg.selection_method == SelectionMethod::sfs) {
        auto ranking = rank_features(trace, p);
        CsvWriter csv({"rank", "feature_id", "config_hash", "seed"});
        for (const auto& rf : ranking)
            csv.add_row({std::to_string(rf.rank), selection_matrix.feature_ids[rf.feature], hash, seed_str});
        csv.save(cfg.out_dir / "feature_ranking.csv");
        note_output("feature_ranking.csv");
        for (const auto& step : trace.steps)
            summary.selected_features.push_back(selection_matrix.feature_ids[step.feature]);
    } else {
        for (std::size_t c : trace.final_subset)
            summary.selected_features.push_back(selection_matrix.feature_ids[c]);
    }

    // accuracy-vs-size curves per classifier (CV on the selection matrix)
    std::vector<std::size_t> curve_sizes;
    if (cfg.selection_method == SelectionMethod::sfs) {
        for (std::size_t s = 1; s <= trace.steps.size(); ++s) curve_sizes.push_back(s);
    } else {
        for (std::size_t s : cfg.cv_sizes)
            if (subsets.count(std::min(std::max<std::size_t>(1, s), p))) curve_sizes.push_back(std::min(s, p));
        curve_sizes.push_back(sel_k);
        curve_sizes.push_back(std::min(cfg.report_subset_size, p));
        std::sort(curve_sizes.begin(), curve_sizes.end());
        curve_sizes.erase(std::unique(curve_sizes.begin(), curve_sizes.end()), curve_sizes.end());
    }
    const std::uint64_t curve_seed = derive_seed(cfg.seed, "curve_cv");
    auto curve_assignment = stratified_fold_assignment(selection_matrix.labels, cfg.cv_folds, curve_seed);

    // ordered_json keeps keys in a vector, so element references do not
    // survive later insertions; every table is built locally and moved in.
    nlohmann::ordered_json reports_json;
    reports_json["config_hash"] = hash;
    reports_json["seed"] = cfg.seed;

    CsvWriter curve_csv({"classifier", "n_features", "cv_accuracy", "config_hash", "seed"});
    std::map<std::string, std::pair<std::size_t, double>> optimum;  // classifier -> (size, accuracy)
    for (const auto& name : cfg.classifiers) {
        ModelSpec spec = cfg.classifier_spec(name, derive_seed(cfg.seed, "fit:" + name));
        for (std::size_t size : curve_sizes) {
            auto sub = selection_matrix.select_columns(subset_of_size(size));
            double acc =
                cross_validate_with_assignment(sub, spec, curve_assignment, cfg.cv_folds).mean_accuracy;
            curve_csv.add_row({name, std::to_string(size), format_double(acc), hash, seed_str});
            auto it = optimum.find(name);
            if (it == optimum.end() || acc > it->second.second) optimum[name] = {size, acc};
        }
    }
    curve_csv.save(cfg.out_dir / "accuracy_vs_size.csv");
    note_output("accuracy_vs_size.csv");

    const std::vector<std::string> metric_cols = {"auroc", "accuracy", "sensitivity", "specificity", "f1"};
    auto metric_fields = [&](const EvalReport& rep) {
        return std::vector<std::string>{format_double(rep.auroc_value), detail::opt_metric(rep.metric_set.accuracy),
                                        detail::opt_metric(rep.metric_set.sensitivity),
                                        detail::opt_metric(rep.metric_set.specificity),
                                        detail::opt_metric(rep.metric_set.f1)};
    };

    // per-classifier optimum: test metrics at each classifier's best subset size
    {
        std::vector<std::string> header = {"algorithm", "n_features"};
        header.insert(header.end(), metric_cols.begin(), metric_cols.end());
        header.push_back("config_hash");
        header.push_back("seed");
        CsvWriter csv(header);
        nlohmann::ordered_json jarr = nlohmann::ordered_json::array();
        for (const auto& name : cfg.classifiers) {
            auto [size, cv_acc] = optimum.at(name);
            auto cols = subset_of_size(size);
            ModelSpec spec = cfg.classifier_spec(name, derive_seed(cfg.seed, "fit:" + name));
            auto model = fit(spec, train.select_columns(cols));
            auto rep = evaluate(model, test.select_columns(cols), "test", cfg.seed);
            std::vector<std::string> row = {name, std::to_string(size)};
            auto mf = metric_fields(rep);
            row.insert(row.end(), mf.begin(), mf.end());
            row.push_back(hash);
            row.push_back(seed_str);
            csv.add_row(row);
            auto j = detail::metric_json(rep);
            j["algorithm"] = name;
            j["n_features"] = size;
            j["cv_accuracy"] = cv_acc;
            jarr.push_back(std::move(j));
        }
        csv.save(cfg.out_dir / "per_classifier_optimum.csv");
        note_output("per_classifier_optimum.csv");
        reports_json["per_classifier_optimum"] = std::move(jarr);
    }

    // fixed-subset comparison, train/test metrics, ROC points, model dumps
    const std::size_t fixed_size = std::min(cfg.report_subset_size, p);
    auto fixed_cols = subset_of_size(fixed_size);
    auto train_fixed = train.select_columns(fixed_cols);
    auto test_fixed = test.select_columns(fixed_cols);
    {
        std::vector<std::string> header = {"algorithm", "n_features"};
        header.insert(header.end(), metric_cols.begin(), metric_cols.end());
        header.push_back("config_hash");
        header.push_back("seed");
        CsvWriter fixed_csv(header);

        std::vector<std::string> tt_header = {"algorithm", "split"};
        tt_header.insert(tt_header.end(), metric_cols.begin(), metric_cols.end());
        tt_header.push_back("config_hash");
        tt_header.push_back("seed");
        CsvWriter tt_csv(tt_header);

        nlohmann::ordered_json jfixed = nlohmann::ordered_json::array();
        nlohmann::ordered_json jtt = nlohmann::ordered_json::array();

        for (const auto& name : cfg.classifiers) {
            ModelSpec spec = cfg.classifier_spec(name, derive_seed(cfg.seed, "fit:" + name));
            auto model = fit(spec, train_fixed);
            auto test_rep = evaluate(model, test_fixed, "test", cfg.seed);

            std::vector<std::string> row = {name, std::to_string(fixed_size)};
            auto mf = metric_fields(test_rep);
            row.insert(row.end(), mf.begin(), mf.end());
            row.push_back(hash);
            row.push_back(seed_str);
            fixed_csv.add_row(row);
            {
                auto j = detail::metric_json(test_rep);
                j["algorithm"] = name;
                j["n_features"] = fixed_size;
                jfixed.push_back(std::move(j));
            }

            EvalReport train_rep;
            if (cfg.train_metrics_cv) {
                // CV-on-train instead of resubstitution, when asked for
                auto cv = cross_validate(train_fixed, spec, cfg.cv_folds, derive_seed(cfg.seed, "train_cv"));
                train_rep.split_desc = "train-cv";
                train_rep.seed = cfg.seed;
                train_rep.auroc_value = 0;
                train_rep.metric_set.accuracy = cv.mean_accuracy;
            } else {
                train_rep = evaluate(model, train_fixed, "train", cfg.seed);
            }
            for (const auto& split_name : {std::string("train"), std::string("test")}) {
                const EvalReport& rep = split_name == "train" ? train_rep : test_rep;
                std::vector<std::string> trow = {name, split_name};
                auto tmf = metric_fields(rep);
                trow.insert(trow.end(), tmf.begin(), tmf.end());
                trow.push_back(hash);
                trow.push_back(seed_str);
                tt_csv.add_row(trow);
                auto j = detail::metric_json(rep);
                j["algorithm"] = name;
                j["split"] = split_name;
                jtt.push_back(std::move(j));
            }

            // ROC points over the held-out split
            std::vector<double> scores(test_fixed.n_rows());
            std::vector<int> positive(test_fixed.n_rows());
            for (std::size_t r = 0; r < test_fixed.n_rows(); ++r) {
                scores[r] = model.predict_score(test_fixed.values.row(r));
                positive[r] = test_fixed.labels[r] == Label::recurrence ? 1 : 0;
            }
            CsvWriter roc_csv({"fpr", "tpr", "threshold", "config_hash", "seed"});
            for (const auto& pt : roc_points(scores, positive))
                roc_csv.add_row({format_double(pt.fpr), format_double(pt.tpr), format_double(pt.threshold),
                                 hash, seed_str});
            roc_csv.save(cfg.out_dir / ("roc_" + name + ".csv"));
            note_output("roc_" + name + ".csv");

            if (cfg.write_models) {
                write_text_file(cfg.out_dir / "models" / (name + ".json"), model.to_json().dump(2) + "\n");
                note_output("models/" + name + ".json");
            }
        }
        fixed_csv.save(cfg.out_dir / "fixed_subset_comparison.csv");
        note_output("fixed_subset_comparison.csv");
        tt_csv.save(cfg.out_dir / "train_test_metrics.csv");
        note_output("train_test_metrics.csv");
        reports_json["fixed_subset_comparison"] = std::move(jfixed);
        reports_json["train_test_metrics"] = std::move(jtt);
    }

    // cross-validation table over configured subset sizes
    {
        CsvWriter csv({"n_features", "classifier", "mean_accuracy", "std_accuracy", "config_hash", "seed"});
        nlohmann::ordered_json jcv = nlohmann::ordered_json::array();
        const std::uint64_t cv_seed = derive_seed(cfg.seed, "cv_table");
        auto assignment = stratified_fold_assignment(selection_matrix.labels, cfg.cv_folds, cv_seed);
        for (std::size_t size : cfg.cv_sizes) {
            std::size_t effective = std::min(std::max<std::size_t>(1, size), p);
            if (effective != size)
                summary.warnings.push_back("cv size " + std::to_string(size) + " clamped to " +
                                           std::to_string(effective));
            auto sub = selection_matrix.select_columns(subset_of_size(effective));
            for (const auto& name : cfg.classifiers) {
                ModelSpec spec = cfg.classifier_spec(name, derive_seed(cfg.seed, "fit:" + name));
                auto cv = cross_validate_with_assignment(sub, spec, assignment, cfg.cv_folds);
                csv.add_row({std::to_string(effective), name, format_double(cv.mean_accuracy),
                             format_double(cv.std_accuracy), hash, seed_str});
                jcv.push_back({{"n_features", effective},
                               {"classifier", name},
                               {"mean_accuracy", cv.mean_accuracy},
                               {"std_accuracy", cv.std_accuracy}});
            }
        }
        csv.save(cfg.out_dir / "cv_accuracy.csv");
        note_output("cv_accuracy.csv");
        reports_json["cv_accuracy"] = std::move(jcv);
    }

    // consolidated JSON report and run summary
    write_text_file(cfg.out_dir / "reports.json", reports_json.dump(2) + "\n");
    note_output("reports.json");
    {
        nlohmann::ordered_json j;
        j["config_hash"] = summary.config_hash;
        j["seed"] = summary.seed;
        j["config"] = cfg.canonical_text();
        j["n_subjects"] = summary.n_subjects;
        j["n_features"] = summary.n_features;
        j["class_counts"] = {{"positive", summary.pre_smote_positive},
                             {"negative", summary.pre_smote_negative}};
        j["post_smote_rows"] = summary.post_smote_rows;
        j["train_rows"] = summary.train_rows;
        j["test_rows"] = summary.test_rows;
        j["smote_stage"] = smote_stage_name(cfg.smote_stage);
        j["selected_features"] = summary.selected_features;
        j["warnings"] = summary.warnings;
        j["outputs"] = summary.outputs;
        write_text_file(cfg.out_dir / "run_summary.json", j.dump(2) + "\n");
    }
    summary.outputs.push_back("run_summary.json");
    return summary;
}

}  // namespace nmx
