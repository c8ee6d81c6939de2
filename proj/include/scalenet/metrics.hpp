#pragma once

#include <span>
#include <string>

#include <Eigen/Dense>

namespace scalenet {

struct ClassificationMetrics {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
};

/// Rows are true classes, columns predicted classes.
Eigen::MatrixXi confusion_matrix(std::span<const int> truth, std::span<const int> predicted, int num_classes);

/// Precision and recall are averaged over classes with equal weight; a
/// class with no predictions (or no members) contributes 0 for that term.
ClassificationMetrics classification_metrics(std::span<const int> truth, std::span<const int> predicted,
                                             int num_classes);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
};

MeanStd mean_std(std::span<const double> values);

/// "0.858±0.029"
std::string format_mean_std(const MeanStd& m, int digits = 3);

}  // namespace scalenet
