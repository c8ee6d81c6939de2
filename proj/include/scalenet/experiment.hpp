#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scalenet/baselines.hpp"
#include "scalenet/config.hpp"
#include "scalenet/data.hpp"
#include "scalenet/interpret.hpp"
#include "scalenet/metrics.hpp"
#include "scalenet/model.hpp"
#include "scalenet/synth.hpp"

namespace scalenet {

enum class ModelKind { ours, mlp1, mlp2_r, mlp2_i };

ModelKind parse_model_kind(std::string_view name);
std::string to_string(ModelKind kind);

struct ExperimentConfig {
    TrainConfig train;
    ModelKind kind = ModelKind::ours;
    int folds = 5;
    StandardizeMode standardize = StandardizeMode::zscore;
    Index mlp2_r_budget = 0;  // 0: match ours at train.num_scales
    SaliencyTarget saliency_target = SaliencyTarget::probability;
    int threads = 1;
    std::string snapshot;  // canonical config text recorded in artifacts
};

TrainConfig to_train_config(const Config& cfg);
SynthSpec to_synth_spec(const Config& cfg);
ExperimentConfig to_experiment_config(const Config& cfg);

using TrainedModel = std::variant<ScaleNetModel, MlpModel>;

Prediction predict(const TrainedModel& model, const Eigen::MatrixXd& standardized);

/// The MLP spec a baseline kind resolves to for data of this shape.
MlpSpec baseline_spec(ModelKind kind, Index p, Index num_classes, const ExperimentConfig& cfg);

struct FoldResult {
    int fold = 0;
    std::uint64_t seed = 0;
    std::vector<Index> train_indices;
    std::vector<Index> test_indices;
    Standardizer standardizer;
    TrainedModel model;
    ClassificationMetrics metrics;
    std::vector<EpochRecord> log;
    double seconds = 0.0;  // wall clock; not persisted in artifact.json
};

struct AggregateMetrics {
    MeanStd accuracy;
    MeanStd precision;
    MeanStd recall;
};

struct RunArtifact {
    std::string config_snapshot;
    std::uint64_t seed = 0;
    ModelKind kind = ModelKind::ours;
    std::string data_path;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;
    std::vector<FoldResult> folds;

    AggregateMetrics aggregate() const;
};

/// One fold: standardise on the training split, train (ADASYN and basis
/// inside), evaluate on the untouched test split.
FoldResult run_fold(const Dataset& data, std::vector<Index> train_indices, std::vector<Index> test_indices,
                    const ExperimentConfig& cfg, int fold, std::uint64_t fold_seed);

/// Stratified k-fold cross-validation from the root seed `cfg.train.seed`.
RunArtifact run_cv(const Dataset& data, const ExperimentConfig& cfg, std::string data_path = {});

/// Standardises the stored test split and recomputes its metrics.
ClassificationMetrics evaluate_fold(const FoldResult& fold, const Dataset& data, int num_classes);

struct SweepRow {
    int num_scales = 0;
    bool frozen = false;
    AggregateMetrics metrics;
};

/// Cross-validated ours for each J, with trained and with frozen scales.
std::vector<SweepRow> sweep_scales(const Dataset& data, std::span<const int> scale_counts,
                                   const ExperimentConfig& cfg);

struct ConvergenceCurve {
    std::string model;
    double lr = 0.0;
    int fold = 0;
    std::vector<double> test_accuracy;  // index = epoch
};

/// Ours against 2-MLP_I with identical seeds and one shared learning rate
/// per entry of `lrs`.
std::vector<ConvergenceCurve> compare_convergence(const Dataset& data, const ExperimentConfig& cfg,
                                                  std::span<const double> lrs);

/// First epoch whose test accuracy reaches `threshold`.
std::optional<int> epochs_to_threshold(const ConvergenceCurve& curve, double threshold);

// ---- persistence --------------------------------------------------------

std::string artifact_to_json(const RunArtifact& run);
RunArtifact artifact_from_json(const std::string& text);
RunArtifact load_artifact(const std::filesystem::path& path);

std::string metrics_json(const RunArtifact& run);
std::string epoch_log_csv(std::span<const EpochRecord> log);

/// Writes config.txt, metrics.json, artifact.json, epochs_fold<k>.csv and
/// timings.json into `dir` (created if needed).
void write_run(const RunArtifact& run, const std::filesystem::path& dir);

std::string sweep_csv(std::span<const SweepRow> rows);
std::string convergence_curves_csv(std::span<const ConvergenceCurve> curves);
std::string convergence_thresholds_csv(std::span<const ConvergenceCurve> curves, double threshold);

struct SampleInterpretation {
    SaliencyMap map;
    int fold = 0;
    std::vector<RankedRegion> ranking;  // predicted class
};

/// Grad-CAM for dataset sample `sample_index`, using the fold model for
/// which that sample was held out.
SampleInterpretation interpret_sample(const RunArtifact& run, const Dataset& data, Index sample_index,
                                      SaliencyTarget target);
std::string saliency_csv(const SampleInterpretation& interp, std::span<const std::string> class_names);

struct CohortSaliency {
    Eigen::VectorXd values;             // length p
    std::vector<RankedRegion> ranking;
    Index samples = 0;                  // maps that entered the mean
};

/// Mean over every held-out sample of its predicted-class saliency map, each
/// map first scaled to unit sum so that confident and borderline samples
/// weigh alike. All-zero maps are skipped.
CohortSaliency cohort_saliency(const RunArtifact& run, const Dataset& data, SaliencyTarget target);
std::string cohort_saliency_csv(const CohortSaliency& cohort);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace scalenet
