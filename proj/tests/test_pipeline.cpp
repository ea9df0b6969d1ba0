#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#ifdef NMX_CLI_PATH
#include <sys/wait.h>
#endif

#include "nmx/pipeline.hpp"
#include "nmx/synth.hpp"
#include "test_helpers.hpp"

using namespace nmx;
namespace fs = std::filesystem;

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

fs::path paper_shaped_tree(const std::string& name, std::uint64_t seed) {
    SynthSpec spec;
    spec.n_positive = 145;
    spec.n_negative = 24;
    spec.noise_scale = 0.06;
    spec.seed = seed;
    spec.plants.push_back({"FoldInd", TableKind::cortical, Hemisphere::left, 0.8, Label::recurrence,
                           {0, 3, 7, 11, 19}});
    auto cohort = generate_cohort(spec);
    return write_stats_tree(cohort, testutil::tmp_dir(name));
}

PipelineConfig fast_config(const fs::path& manifest, const fs::path& out_dir, std::uint64_t seed) {
    PipelineConfig cfg;
    cfg.manifest = manifest;
    cfg.out_dir = out_dir;
    cfg.seed = seed;
    cfg.selection_k = 3;
    cfg.report_subset_size = 3;
    cfg.cv_sizes = {3};
    cfg.classifiers = {"knn", "dt"};
    return cfg;
}

}  // namespace

TEST_CASE("paper-shaped run: 169 subjects -> 91 features, 290 rows, 203/87 split") {
    auto manifest = paper_shaped_tree("pipeline_paper", 2024);
    auto out = testutil::tmp_dir("pipeline_paper_out");
    auto cfg = fast_config(manifest, out, 7);
    auto summary = run_pipeline(cfg);

    CHECK(summary.n_subjects == 169);
    CHECK(summary.n_features == 91);
    CHECK(summary.pre_smote_positive == 145);
    CHECK(summary.pre_smote_negative == 24);
    CHECK(summary.post_smote_rows == 290);
    CHECK(summary.train_rows == 203);
    CHECK(summary.test_rows == 87);

    for (const char* name :
         {"features.csv", "resampled.csv", "smote_provenance.csv", "selection_trace.csv",
          "feature_ranking.csv", "accuracy_vs_size.csv", "per_classifier_optimum.csv",
          "fixed_subset_comparison.csv", "train_test_metrics.csv", "cv_accuracy.csv", "roc_knn.csv",
          "roc_dt.csv", "reports.json", "run_summary.json"})
        CHECK(fs::exists(out / name));

    // every report row carries the config hash and seed
    auto rows = read_csv_file(out / "per_classifier_optimum.csv");
    REQUIRE(rows.size() == 3);  // header + knn + dt
    auto hash_col = rows[0].size() - 2;
    CHECK(rows[0][hash_col] == "config_hash");
    CHECK(rows[1][hash_col] == summary.config_hash);
    CHECK(rows[1].back() == "7");

    auto trace_rows = read_csv_file(out / "selection_trace.csv");
    CHECK(trace_rows.size() == 1 + 3);  // header + selection_k steps

    auto ranking = read_csv_file(out / "feature_ranking.csv");
    CHECK(ranking.size() == 1 + 91);
}

TEST_CASE("two identical runs produce byte-identical bundles") {
    auto manifest = paper_shaped_tree("pipeline_det", 5);
    auto out_a = testutil::tmp_dir("pipeline_det_a");
    auto out_b = testutil::tmp_dir("pipeline_det_b");
    auto sum_a = run_pipeline(fast_config(manifest, out_a, 3));
    auto sum_b = run_pipeline(fast_config(manifest, out_b, 3));
    CHECK(sum_a.config_hash == sum_b.config_hash);
    REQUIRE(sum_a.outputs == sum_b.outputs);
    for (const auto& name : sum_a.outputs) {
        auto a = read_text_file(out_a / name);
        auto b = read_text_file(out_b / name);
        CHECK_MESSAGE(a == b, name);
    }
}

TEST_CASE("train-only smote keeps the test set untouched and unbalanced") {
    auto manifest = paper_shaped_tree("pipeline_trainonly", 6);
    auto out = testutil::tmp_dir("pipeline_trainonly_out");
    auto cfg = fast_config(manifest, out, 11);
    cfg.smote_stage = SmoteStage::train_only;
    auto summary = run_pipeline(cfg);
    CHECK(summary.train_rows == summary.post_smote_rows);  // balanced train
    // 169 -> ceil(0.7*169)=119 train, 50 test; train balances to 2*102=204
    CHECK(summary.test_rows == 50);
    CHECK(summary.train_rows == 204);
}

TEST_CASE("sbe selection runs through the pipeline") {
    SynthSpec spec;
    spec.n_positive = 24;
    spec.n_negative = 16;
    spec.noise_scale = 0.05;
    spec.seed = 77;
    spec.plants.push_back({"FoldInd", TableKind::cortical, Hemisphere::left, 0.7, Label::recurrence,
                           {1, 5, 9}});
    auto manifest = write_stats_tree(generate_cohort(spec), testutil::tmp_dir("pipeline_sbe"));
    auto out = testutil::tmp_dir("pipeline_sbe_out");

    PipelineConfig cfg;
    cfg.manifest = manifest;
    cfg.out_dir = out;
    cfg.seed = 5;
    cfg.selection_method = SelectionMethod::sbe;
    cfg.selection_k = 89;  // two elimination steps from the 91 features
    cfg.report_subset_size = 89;
    cfg.cv_sizes = {89};
    cfg.smote_k = 3;
    cfg.classifiers = {"knn", "dt"};
    auto summary = run_pipeline(cfg);

    CHECK(summary.selected_features.size() == 89);
    auto trace_rows = read_csv_file(out / "selection_trace.csv");
    CHECK(trace_rows.size() == 1 + 2);  // two removals recorded
    CHECK_FALSE(fs::exists(out / "feature_ranking.csv"));  // ranking is forward-only
    CHECK(fs::exists(out / "fixed_subset_comparison.csv"));

    // deterministic rerun
    cfg.out_dir = testutil::tmp_dir("pipeline_sbe_out2");
    auto again = run_pipeline(cfg);
    CHECK(again.selected_features == summary.selected_features);
}

TEST_CASE("config validation and parsing") {
    CHECK(thrown([] {
        PipelineConfig::parse("manifest = m.csv\nout_dir = o\nclassifiers =\n", ".");
    }) == errc::invalid_config);
    CHECK(thrown([] { PipelineConfig::parse("manifest = m.csv\n", "."); }) == errc::invalid_config);
    CHECK(thrown([] { PipelineConfig::parse("manifest = m.csv\nout_dir = o\nbogus = 1\n", "."); }) ==
          errc::invalid_config);

    auto cfg = PipelineConfig::parse(
        "manifest = m.csv\n"
        "out_dir = reports\n"
        "seed = 9\n"
        "smote_stage = train-only\n"
        "classifiers = gb, rf\n"
        "cv_sizes = 2,4\n"
        "gb_learning_rate = 0.5\n"
        "selection_method = sbe\n"
        "selection_k = 10\n",
        "/base");
    CHECK(cfg.manifest == fs::path("/base/m.csv"));
    CHECK(cfg.smote_stage == SmoteStage::train_only);
    CHECK(cfg.classifiers == std::vector<std::string>{"gb", "rf"});
    CHECK(cfg.gb_learning_rate == 0.5);
    CHECK(cfg.selection_method == SelectionMethod::sbe);
    CHECK(cfg.cv_sizes == std::vector<std::size_t>{2, 4});
}

TEST_CASE("config hash covers settings but not the output directory") {
    PipelineConfig a;
    a.manifest = "m.csv";
    a.out_dir = "x";
    PipelineConfig b = a;
    b.out_dir = "y";
    CHECK(a.config_hash() == b.config_hash());
    b.seed = 1;
    CHECK(a.config_hash() != b.config_hash());
    b = a;
    b.knn_k = 5;
    CHECK(a.config_hash() != b.config_hash());
}

#ifdef NMX_CLI_PATH
TEST_CASE("cli end-to-end: synth -> run -> report, with exit codes") {
    auto dir = testutil::tmp_dir("cli_e2e");
    auto run_cmd = [&](const std::string& args) {
        std::string cmd = std::string(NMX_CLI_PATH) + " " + args + " > " + (dir / "out.txt").string() +
                          " 2> " + (dir / "err.txt").string();
        int rc = std::system(cmd.c_str());
        return WEXITSTATUS(rc);
    };

    write_text_file(dir / "synth.cfg",
                    "n_positive = 30\nn_negative = 12\nnoise_scale = 0.05\nseed = 4\n"
                    "plant = FoldInd left 0.7 positive 0 5 9\n");
    CHECK(run_cmd("synth --spec " + (dir / "synth.cfg").string() + " --out " + (dir / "tree").string()) == 0);
    CHECK(fs::exists(dir / "tree" / "manifest.csv"));

    write_text_file(dir / "run.cfg",
                    "manifest = tree/manifest.csv\nout_dir = bundle\nseed = 2\nselection_k = 2\n"
                    "report_subset_size = 2\ncv_sizes = 2\nclassifiers = knn,dt\nsmote_k = 3\n");
    CHECK(run_cmd("run --config " + (dir / "run.cfg").string()) == 0);
    CHECK(fs::exists(dir / "bundle" / "run_summary.json"));

    CHECK(run_cmd("report --bundle " + (dir / "bundle").string()) == 0);
    CHECK(run_cmd("ingest --manifest " + (dir / "tree" / "manifest.csv").string() + " --out " +
                  (dir / "tables").string()) == 0);
    CHECK(fs::exists(dir / "tables" / "cortical_FoldInd.csv"));
    CHECK(run_cmd("features --manifest " + (dir / "tree" / "manifest.csv").string() + " --out " +
                  (dir / "f.csv").string()) == 0);
    CHECK(run_cmd("select --features " + (dir / "f.csv").string() + " --method sfs --k 2 --out " +
                  (dir / "trace.csv").string()) == 0);

    // validation failures exit 2
    CHECK(run_cmd("run --config " + (dir / "missing.cfg").string()) == 2);
    write_text_file(dir / "bad.cfg", "manifest = nope.csv\nout_dir = b2\nclassifiers =\n");
    CHECK(run_cmd("run --config " + (dir / "bad.cfg").string()) == 2);
}
#endif
