// neuromorphix command-line tool: ingest FreeSurfer stats, build asymmetry
// features, synthesize cohorts, run feature selection, and execute the full
// classification pipeline with machine-readable reports.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nmx/nmx.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool lenient = false;
};

int cmd_synth(const fs::path& spec_path, const fs::path& out_dir, const CommonOpts& common) {
    auto spec = nmx::SynthSpec::parse_file(spec_path);
    if (common.seed_set) spec.seed = common.seed;
    auto cohort = nmx::generate_cohort(spec);
    auto manifest = nmx::write_stats_tree(cohort, out_dir);
    std::cout << manifest.string() << "\n";
    return 0;
}

int cmd_ingest(const fs::path& manifest, const fs::path& out_dir, const CommonOpts& common) {
    nmx::ParseOptions opts;
    opts.lenient = common.lenient;
    auto cohort = nmx::load_cohort(manifest, opts);
    auto files = nmx::export_parameter_tables(cohort, out_dir);
    for (const auto& f : files) std::cout << f.string() << "\n";
    return 0;
}

int cmd_features(const fs::path& manifest, const fs::path& out_file, const CommonOpts& common,
                 double epsilon_multiplier, double mean_guard, bool allow_unlabeled) {
    nmx::ParseOptions opts;
    opts.lenient = common.lenient;
    auto cohort = nmx::load_cohort(manifest, opts);
    nmx::AsymmetryConfig cfg;
    cfg.epsilon_multiplier = epsilon_multiplier;
    cfg.mean_guard = mean_guard;
    auto m = nmx::build_matrix(cohort, cfg, !allow_unlabeled);
    nmx::write_feature_csv(m, out_file);
    for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << out_file.string() << "\n";
    return 0;
}

int cmd_select(const fs::path& features_path, const std::string& method, const std::string& wrapper,
               std::size_t k, std::size_t folds, const CommonOpts& common, std::size_t knn_k,
               const fs::path& out_file) {
    auto m = nmx::read_feature_csv(features_path);
    nmx::ModelSpec spec;
    if (wrapper == "knn") spec = nmx::ModelSpec::knn(knn_k, common.seed);
    else if (wrapper == "dt") spec = nmx::ModelSpec::decision_tree(0, 2, common.seed);
    else if (wrapper == "rf") spec = nmx::ModelSpec::random_forest(100, 4, common.seed);
    else if (wrapper == "gb") spec = nmx::ModelSpec::gradient_boosting(100, 1.0, 3, common.seed);
    else nmx::raise(nmx::errc::invalid_config, "wrapper must be one of knn, dt, rf, gb");

    nmx::SelectionTrace trace;
    if (method == "sfs") trace = nmx::sfs(m, spec, k, folds, common.seed);
    else if (method == "sbe") trace = nmx::sbe(m, spec, k, folds, common.seed);
    else nmx::raise(nmx::errc::invalid_config, "method must be sfs or sbe");

    nmx::write_trace_csv(trace, m.feature_ids, out_file);
    std::cout << out_file.string() << "\n";
    return 0;
}

int cmd_run(const fs::path& config_path, const fs::path& out_override, const CommonOpts& common,
            const std::string& smote_stage_override) {
    auto cfg = nmx::PipelineConfig::parse_file(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (common.seed_set) cfg.seed = common.seed;
    if (common.lenient) cfg.lenient = true;
    if (!smote_stage_override.empty()) cfg.smote_stage = nmx::smote_stage_from_string(smote_stage_override);
    auto summary = nmx::run_pipeline(cfg);
    for (const auto& w : summary.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "config_hash " << summary.config_hash << "\n";
    std::cout << "subjects " << summary.n_subjects << "  features " << summary.n_features << "\n";
    std::cout << "post_smote_rows " << summary.post_smote_rows << "  train " << summary.train_rows
              << "  test " << summary.test_rows << "\n";
    std::cout << "reports in " << cfg.out_dir.string() << "\n";
    return 0;
}

void print_csv_table(const fs::path& path) {
    auto rows = nmx::read_csv_file(path);
    if (rows.empty()) return;
    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        if (widths.size() < row.size()) widths.resize(row.size(), 0);
        for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
    }
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::string cell = row[i];
            cell.resize(widths[i], ' ');
            line += cell;
            if (i + 1 < row.size()) line += "  ";
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        std::cout << line << "\n";
    }
}

int cmd_report(const fs::path& bundle_dir) {
    auto summary_path = bundle_dir / "run_summary.json";
    auto j = nlohmann::json::parse(nmx::read_text_file(summary_path));
    std::cout << "run " << j.at("config_hash").get<std::string>() << " (seed "
              << j.at("seed").get<std::uint64_t>() << ")\n";
    std::cout << "subjects " << j.at("n_subjects").get<std::size_t>() << ", features "
              << j.at("n_features").get<std::size_t>() << ", post-SMOTE rows "
              << j.at("post_smote_rows").get<std::size_t>() << ", split " << j.at("train_rows").get<std::size_t>()
              << "/" << j.at("test_rows").get<std::size_t>() << "\n";
    for (const auto& name :
         {"per_classifier_optimum.csv", "fixed_subset_comparison.csv", "cv_accuracy.csv",
          "train_test_metrics.csv", "selection_trace.csv"}) {
        auto path = bundle_dir / name;
        if (!fs::exists(path)) continue;
        std::cout << "\n== " << name << " ==\n";
        print_csv_table(path);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NeuroMorphix hemispheric-asymmetry feature pipeline"};
    app.require_subcommand(1);

    CommonOpts common;
    app.add_flag("--lenient", common.lenient, "accept nonstandard region counts when parsing");
    auto* seed_opt = app.add_option("--seed", common.seed, "override the run seed");

    fs::path synth_spec, synth_out;
    auto* synth = app.add_subcommand("synth", "generate a synthetic stats tree + manifest");
    synth->add_option("--spec", synth_spec, "synth spec file")->required();
    synth->add_option("--out", synth_out, "output directory")->required();

    fs::path ingest_manifest, ingest_out;
    auto* ingest = app.add_subcommand("ingest", "parse a cohort and export per-parameter CSV tables");
    ingest->add_option("--manifest", ingest_manifest, "cohort manifest CSV")->required();
    ingest->add_option("--out", ingest_out, "output directory")->required();

    fs::path feat_manifest, feat_out;
    double feat_eps = 1.0, feat_guard = 1e-12;
    bool feat_allow_unlabeled = false;
    auto* features = app.add_subcommand("features", "build the per-subject asymmetry feature matrix");
    features->add_option("--manifest", feat_manifest, "cohort manifest CSV")->required();
    features->add_option("--out", feat_out, "output feature CSV")->required();
    features->add_option("--epsilon-multiplier", feat_eps, "outlier cutoff in per-side std units");
    features->add_option("--mean-guard", feat_guard, "degenerate-mean guard");
    features->add_flag("--allow-unlabeled", feat_allow_unlabeled, "permit unlabeled subjects");

    fs::path sel_features, sel_out;
    std::string sel_method = "sfs", sel_wrapper = "knn";
    std::size_t sel_k = 5, sel_folds = 5, sel_knn_k = 3;
    auto* select = app.add_subcommand("select", "run wrapper feature selection over a feature CSV");
    select->add_option("--features", sel_features, "input feature CSV")->required();
    select->add_option("--method", sel_method, "sfs or sbe");
    select->add_option("--wrapper", sel_wrapper, "wrapper classifier: knn, dt, rf, gb");
    select->add_option("--k", sel_k, "subset size target (k_max for sfs, k_min for sbe)");
    select->add_option("--folds", sel_folds, "cross-validation folds");
    select->add_option("--knn-k", sel_knn_k, "k for the knn wrapper");
    select->add_option("--out", sel_out, "output trace CSV")->required();

    fs::path run_config, run_out;
    std::string run_smote_stage;
    auto* run = app.add_subcommand("run", "execute the full pipeline from a config file");
    run->add_option("--config", run_config, "pipeline config file")->required();
    run->add_option("--out", run_out, "override the configured output directory");
    run->add_option("--smote-stage", run_smote_stage, "pre-split or train-only");

    fs::path report_bundle;
    auto* report = app.add_subcommand("report", "print a report bundle as text tables");
    report->add_option("--bundle", report_bundle, "report bundle directory")->required();

    CLI11_PARSE(app, argc, argv);
    common.seed_set = seed_opt->count() > 0;

    try {
        if (synth->parsed()) return cmd_synth(synth_spec, synth_out, common);
        if (ingest->parsed()) return cmd_ingest(ingest_manifest, ingest_out, common);
        if (features->parsed())
            return cmd_features(feat_manifest, feat_out, common, feat_eps, feat_guard, feat_allow_unlabeled);
        if (select->parsed())
            return cmd_select(sel_features, sel_method, sel_wrapper, sel_k, sel_folds, common, sel_knn_k,
                              sel_out);
        if (run->parsed()) return cmd_run(run_config, run_out, common, run_smote_stage);
        if (report->parsed()) return cmd_report(report_bundle);
    } catch (const nmx::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return nmx::exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
