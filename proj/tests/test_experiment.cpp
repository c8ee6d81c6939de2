#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "scalenet/experiment.hpp"
#include "test_util.hpp"
#include <json.hpp>

using namespace scalenet;

namespace {

Dataset small_synth(std::uint64_t seed = 0) {
    SynthSpec s;
    s.p = 10;
    s.n = 80;
    s.informative_components = 2;
    s.seed = seed;
    return synth_generate(s);
}

ExperimentConfig small_config(ModelKind kind = ModelKind::ours) {
    Config cfg;
    cfg.set("epochs", "15");
    cfg.set("num_scales", "2");
    cfg.set("model", to_string(kind));
    cfg.set("seed", "3");
    return to_experiment_config(cfg);
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

void expect_same_model(const TrainedModel& a, const TrainedModel& b) {
    ASSERT_EQ(a.index(), b.index());
    if (const auto* m = std::get_if<ScaleNetModel>(&a)) {
        const auto& n = std::get<ScaleNetModel>(b);
        EXPECT_TRUE(testutil::bitwise_equal(m->basis.eigenvectors, n.basis.eigenvectors));
        EXPECT_TRUE(testutil::bitwise_equal(m->basis.eigenvalues, n.basis.eigenvalues));
        EXPECT_TRUE(testutil::bitwise_equal(m->params.weights, n.params.weights));
        EXPECT_TRUE(testutil::bitwise_equal(m->params.bias, n.params.bias));
        EXPECT_TRUE(testutil::bitwise_equal(m->params.scales.log_scales, n.params.scales.log_scales));
    } else {
        const auto& m1 = std::get<MlpModel>(a);
        const auto& m2 = std::get<MlpModel>(b);
        ASSERT_EQ(m1.params.weights.size(), m2.params.weights.size());
        for (std::size_t l = 0; l < m1.params.weights.size(); ++l) {
            EXPECT_TRUE(testutil::bitwise_equal(m1.params.weights[l], m2.params.weights[l]));
            EXPECT_TRUE(testutil::bitwise_equal(m1.params.biases[l], m2.params.biases[l]));
        }
    }
}

}  // namespace

TEST(Experiment, ModelKindNames) {
    for (ModelKind k : {ModelKind::ours, ModelKind::mlp1, ModelKind::mlp2_r, ModelKind::mlp2_i})
        EXPECT_EQ(parse_model_kind(to_string(k)), k);
    EXPECT_THROW(parse_model_kind("cnn"), std::invalid_argument);
}

TEST(Experiment, BaselineSpecsFollowDataShape) {
    const ExperimentConfig cfg = small_config();
    EXPECT_EQ(baseline_spec(ModelKind::mlp1, 160, 2, cfg).num_parameters(), 322);
    EXPECT_EQ(baseline_spec(ModelKind::mlp2_i, 160, 4, cfg).num_parameters(), 26404);
    // reduced baseline matches ours at the configured number of scales
    const MlpSpec r = baseline_spec(ModelKind::mlp2_r, 160, 2, cfg);
    EXPECT_LE(r.num_parameters(), scalenet_parameter_count(160, 2, 2));
    ExperimentConfig fixed = cfg;
    fixed.mlp2_r_budget = 5138;
    EXPECT_EQ(baseline_spec(ModelKind::mlp2_r, 160, 2, fixed).layer_widths[1], 31);
}

// Test-fold values must never reach training: corrupting them leaves every
// fitted quantity bitwise unchanged.
TEST(Experiment, TestFoldCannotLeakIntoTraining) {
    const Dataset clean = small_synth();
    const FoldPlan plan = make_folds(clean.labels, 5, 9);
    for (ModelKind kind : {ModelKind::ours, ModelKind::mlp2_r}) {
        const ExperimentConfig cfg = small_config(kind);
        for (int k = 0; k < 2; ++k) {
            const auto train = plan.train_indices(k);
            const auto test = plan.test_indices(k);
            Dataset tainted = clean;
            Rng rng(static_cast<std::uint64_t>(k));
            for (Index i : test) tainted.features.col(i) = testutil::gaussian(rng, clean.num_features(), 1) * 1e3;
            const FoldResult a = run_fold(clean, train, test, cfg, k, 77);
            const FoldResult b = run_fold(tainted, train, test, cfg, k, 77);
            EXPECT_TRUE(testutil::bitwise_equal(a.standardizer.means, b.standardizer.means));
            EXPECT_TRUE(testutil::bitwise_equal(a.standardizer.stds, b.standardizer.stds));
            expect_same_model(a.model, b.model);
            ASSERT_EQ(a.log.size(), b.log.size());
            for (std::size_t e = 0; e < a.log.size(); ++e) EXPECT_EQ(a.log[e].train_loss, b.log[e].train_loss);
        }
    }
}

TEST(Experiment, FoldsPartitionTheSamples) {
    const Dataset d = small_synth();
    const RunArtifact run = run_cv(d, small_config());
    ASSERT_EQ(run.folds.size(), 5u);
    std::vector<int> seen(static_cast<std::size_t>(d.num_samples()), 0);
    for (const auto& f : run.folds) {
        for (Index i : f.test_indices) ++seen[static_cast<std::size_t>(i)];
        EXPECT_EQ(f.train_indices.size() + f.test_indices.size(), static_cast<std::size_t>(d.num_samples()));
        EXPECT_EQ(f.log.size(), 15u);
    }
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

TEST(Experiment, ReloadedArtifactReproducesMetrics) {
    const Dataset d = small_synth();
    for (ModelKind kind : {ModelKind::ours, ModelKind::mlp1, ModelKind::mlp2_i}) {
        const RunArtifact run = run_cv(d, small_config(kind), "data.csv");
        const auto dir = testutil::temp_dir("reload_" + to_string(kind));
        write_run(run, dir);
        const RunArtifact back = load_artifact(dir / "artifact.json");
        EXPECT_EQ(back.kind, kind);
        EXPECT_EQ(back.data_path, "data.csv");
        EXPECT_EQ(back.config_snapshot, run.config_snapshot);
        EXPECT_EQ(back.class_names, d.class_names);
        ASSERT_EQ(back.folds.size(), run.folds.size());
        for (std::size_t k = 0; k < run.folds.size(); ++k) {
            expect_same_model(run.folds[k].model, back.folds[k].model);
            const auto m = evaluate_fold(back.folds[k], d, d.num_classes());
            EXPECT_EQ(m.accuracy, run.folds[k].metrics.accuracy);
            EXPECT_EQ(m.macro_precision, run.folds[k].metrics.macro_precision);
            EXPECT_EQ(m.macro_recall, run.folds[k].metrics.macro_recall);
        }
        EXPECT_EQ(metrics_json(back), metrics_json(run));
    }
}

TEST(Experiment, RerunsAreByteIdentical) {
    const Dataset d = small_synth();
    ExperimentConfig cfg = small_config();
    const auto a = testutil::temp_dir("rerun_a");
    const auto b = testutil::temp_dir("rerun_b");
    const auto c = testutil::temp_dir("rerun_c");
    write_run(run_cv(d, cfg), a);
    write_run(run_cv(d, cfg), b);
    cfg.threads = 2;
    write_run(run_cv(d, cfg), c);
    int files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(a)) {
        const auto name = entry.path().filename();
        if (name == "timings.json") continue;
        ++files;
        EXPECT_EQ(testutil::read_file(a / name), testutil::read_file(b / name)) << name;
        EXPECT_EQ(testutil::read_file(a / name), testutil::read_file(c / name)) << name;
    }
    EXPECT_EQ(files, 3 + 5);
    EXPECT_TRUE(std::filesystem::exists(a / "timings.json"));
}

TEST(Experiment, DifferentSeedsGiveDifferentFolds) {
    const Dataset d = small_synth();
    ExperimentConfig cfg = small_config();
    const RunArtifact a = run_cv(d, cfg);
    cfg.train.seed = 4;
    const RunArtifact b = run_cv(d, cfg);
    EXPECT_NE(a.folds[0].test_indices, b.folds[0].test_indices);
}

TEST(Experiment, MetricsJsonLayout) {
    const Dataset d = small_synth();
    const RunArtifact run = run_cv(d, small_config());
    const auto j = nlohmann::json::parse(metrics_json(run));
    EXPECT_EQ(j.at("model"), "ours");
    ASSERT_EQ(j.at("folds").size(), 5u);
    EXPECT_EQ(j.at("folds")[2].at("fold"), 2);
    EXPECT_EQ(j.at("folds")[2].at("accuracy").get<double>(), run.folds[2].metrics.accuracy);
    const AggregateMetrics agg = run.aggregate();
    for (const char* key : {"accuracy", "precision", "recall"}) {
        const auto& m = j.at("aggregate").at(key);
        EXPECT_TRUE(m.contains("mean"));
        EXPECT_TRUE(m.contains("std"));
        EXPECT_TRUE(m.contains("text"));
    }
    EXPECT_EQ(j.at("aggregate").at("accuracy").at("mean").get<double>(), agg.accuracy.mean);
    EXPECT_EQ(j.at("aggregate").at("accuracy").at("text").get<std::string>(), format_mean_std(agg.accuracy));
}

TEST(Experiment, EpochLogCsv) {
    const std::vector<EpochRecord> log{{0, 0.69, 0.5}, {1, 0.5, 0.75}};
    const auto l = lines(epoch_log_csv(log));
    ASSERT_EQ(l.size(), 3u);
    EXPECT_EQ(l[0], "epoch,train_loss,test_accuracy");
    EXPECT_EQ(l[1].substr(0, 2), "0,");
    EXPECT_EQ(l[2].substr(0, 2), "1,");
}

TEST(Experiment, SweepCoversTrainedAndFrozen) {
    const Dataset d = small_synth();
    const std::vector<int> js{1, 3};
    const auto rows = sweep_scales(d, js, small_config());
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].num_scales, 1);
    EXPECT_NE(rows[0].frozen, rows[1].frozen);
    EXPECT_EQ(rows[3].num_scales, 3);
    for (const auto& r : rows) {
        EXPECT_GE(r.metrics.accuracy.mean, 0.0);
        EXPECT_LE(r.metrics.accuracy.mean, 1.0);
    }
    const auto l = lines(sweep_csv(rows));
    ASSERT_EQ(l.size(), 5u);
    EXPECT_EQ(l[0], "num_scales,scales,accuracy_mean,accuracy_std,precision_mean,recall_mean");
    EXPECT_EQ(l[1].substr(0, 2), "1,");
}

TEST(Experiment, ConvergenceCurvesAndThresholds) {
    const Dataset d = small_synth();
    const std::vector<double> lrs{0.01, 0.1};
    const ExperimentConfig cfg = small_config();
    const auto curves = compare_convergence(d, cfg, lrs);
    ASSERT_EQ(curves.size(), 2u * 2u * 5u);
    for (const auto& c : curves) EXPECT_EQ(c.test_accuracy.size(), 15u);
    const auto again = compare_convergence(d, cfg, lrs);
    EXPECT_EQ(convergence_curves_csv(curves), convergence_curves_csv(again));

    ConvergenceCurve hand{"ours", 0.1, 0, {0.5, 0.8, 0.95, 0.9, 1.0}};
    EXPECT_EQ(epochs_to_threshold(hand, 0.9), 2);
    EXPECT_EQ(epochs_to_threshold(hand, 0.5), 0);
    EXPECT_FALSE(epochs_to_threshold(hand, 1.1).has_value());

    const std::vector<ConvergenceCurve> one{hand};
    const auto l = lines(convergence_thresholds_csv(one, 1.1));
    ASSERT_EQ(l.size(), 2u);
    EXPECT_EQ(l[0], "model,lr,fold,threshold,epochs_to_threshold");
    EXPECT_EQ(l[1].substr(l[1].rfind(',') + 1), "none");
    EXPECT_EQ(lines(convergence_curves_csv(one)).front(), "epoch,model,lr,fold,test_accuracy");
}

TEST(Experiment, InterpretHeldOutSample) {
    const Dataset d = small_synth();
    const RunArtifact run = run_cv(d, small_config());
    const auto a = interpret_sample(run, d, 17, SaliencyTarget::probability);
    const auto b = interpret_sample(run, d, 17, SaliencyTarget::probability);
    const auto& test = run.folds[static_cast<std::size_t>(a.fold)].test_indices;
    EXPECT_NE(std::find(test.begin(), test.end(), 17), test.end());
    EXPECT_EQ(a.map.sample_id, 17);
    const std::string csv = saliency_csv(a, d.class_names);
    EXPECT_EQ(csv, saliency_csv(b, d.class_names));

    const auto l = lines(csv);
    EXPECT_EQ(l[0], "region_name,class,saliency,rank");
    ASSERT_EQ(l.size(), static_cast<std::size_t>(d.num_features()) + 1);
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t r = 1; r < l.size(); ++r) {
        std::vector<std::string> cells;
        std::istringstream row(l[r]);
        for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
        ASSERT_EQ(cells.size(), 4u);
        EXPECT_EQ(cells[1], d.class_names[static_cast<std::size_t>(a.map.predicted_class)]);
        EXPECT_EQ(cells[3], std::to_string(r));
        const double s = std::stod(cells[2]);
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, previous);
        previous = s;
    }

    EXPECT_THROW(interpret_sample(run, d, d.num_samples(), SaliencyTarget::probability), std::invalid_argument);
    EXPECT_THROW(interpret_sample(run, d, -1, SaliencyTarget::probability), std::invalid_argument);
    const RunArtifact mlp = run_cv(d, small_config(ModelKind::mlp1));
    EXPECT_THROW(interpret_sample(mlp, d, 0, SaliencyTarget::probability), std::invalid_argument);
}

TEST(Experiment, LinearBaselineCrossValidatesOnDefaultSynth) {
    const Dataset d = synth_generate(SynthSpec{});
    ExperimentConfig cfg = small_config(ModelKind::mlp1);
    cfg.train.epochs = 200;
    const RunArtifact run = run_cv(d, cfg);
    EXPECT_GE(run.aggregate().accuracy.mean, 0.9);
}

TEST(Experiment, CohortSaliencyAveragesNormalisedMaps) {
    const Dataset d = small_synth();
    const RunArtifact run = run_cv(d, small_config());
    const CohortSaliency c = cohort_saliency(run, d, SaliencyTarget::probability);
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(d.num_features());
    Index used = 0;
    for (Index i = 0; i < d.num_samples(); ++i) {
        const auto interp = interpret_sample(run, d, i, SaliencyTarget::probability);
        const Eigen::VectorXd v = interp.map.values.col(interp.map.predicted_class);
        if (v.sum() <= 0.0) continue;
        expected += v / v.sum();
        ++used;
    }
    expected /= static_cast<double>(used);
    EXPECT_EQ(c.samples, used);
    EXPECT_LE((c.values - expected).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(c.values.sum(), 1.0, 1e-12);
    const auto l = lines(cohort_saliency_csv(c));
    ASSERT_EQ(l.size(), static_cast<std::size_t>(d.num_features()) + 1);
    EXPECT_EQ(l[0], "region_name,saliency,rank");
    EXPECT_EQ(l[1].substr(0, l[1].find(',')), c.ranking.front().name);

    const RunArtifact mlp = run_cv(d, small_config(ModelKind::mlp1));
    EXPECT_THROW(cohort_saliency(mlp, d, SaliencyTarget::probability), std::invalid_argument);
}
