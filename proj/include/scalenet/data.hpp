#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace scalenet {

using Index = Eigen::Index;

/// Tabular dataset in variable-major layout: `features` is p x n with one
/// column per sample, so covariance is (1/n) X X^T.
struct Dataset {
    Eigen::MatrixXd features;
    std::vector<int> labels;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;

    Index num_features() const { return features.rows(); }
    Index num_samples() const { return features.cols(); }
    int num_classes() const { return static_cast<int>(class_names.size()); }

    /// Throws std::invalid_argument when shapes disagree, a label is out of
    /// range, an entry is non-finite, or (optionally) a class is absent.
    void validate(bool require_all_classes = true) const;

    /// Columns `indices` in the given order; names are shared.
    Dataset subset(std::span<const Index> indices) const;
};

Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& data, const std::filesystem::path& path);

enum class StandardizeMode { zscore, center };

struct Standardizer {
    Eigen::VectorXd means;
    Eigen::VectorXd stds;
};

/// Per-feature mean and population standard deviation. A feature with zero
/// variance is rejected by name. In `center` mode the stds are reported as 1
/// but degenerate features are still rejected.
Standardizer fit_standardizer(const Dataset& train, StandardizeMode mode = StandardizeMode::zscore);
Dataset apply_standardizer(const Standardizer& standardizer, const Dataset& data);
Eigen::MatrixXd apply_standardizer(const Standardizer& standardizer, const Eigen::MatrixXd& features);

struct FoldPlan {
    int k = 0;
    std::vector<int> assignments;
    std::uint64_t seed = 0;

    std::vector<Index> train_indices(int fold) const;
    std::vector<Index> test_indices(int fold) const;
};

/// Stratified k-fold assignment: within each class the per-fold counts
/// differ by at most one.
FoldPlan make_folds(std::span<const int> labels, int k, std::uint64_t seed);

struct OversampleConfig {
    int neighbors = 5;
    double balance = 1.0;
    std::uint64_t seed = 0;
};

struct OversampleResult {
    Eigen::MatrixXd features;
    std::vector<int> labels;
};

/// ADASYN. Each class smaller than the majority receives
/// round((n_major - n_m) * balance) synthetic samples, distributed over its
/// points in proportion to the fraction of other-class points among their
/// K nearest neighbours. The input is returned verbatim as a prefix.
OversampleResult adasyn_oversample(const Eigen::MatrixXd& features, std::span<const int> labels,
                                   const OversampleConfig& cfg);

/// Formats a double as the shortest string that parses back to the same value.
std::string format_double(double value);

}  // namespace scalenet
