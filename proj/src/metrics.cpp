#include "scalenet/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace scalenet {

Eigen::MatrixXi confusion_matrix(std::span<const int> truth, std::span<const int> predicted, int num_classes) {
    if (truth.size() != predicted.size()) throw std::invalid_argument("confusion_matrix: size mismatch");
    Eigen::MatrixXi cm = Eigen::MatrixXi::Zero(num_classes, num_classes);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= num_classes || predicted[i] < 0 || predicted[i] >= num_classes) {
            throw std::invalid_argument("confusion_matrix: label out of range");
        }
        ++cm(truth[i], predicted[i]);
    }
    return cm;
}

ClassificationMetrics classification_metrics(std::span<const int> truth, std::span<const int> predicted,
                                             int num_classes) {
    const Eigen::MatrixXi cm = confusion_matrix(truth, predicted, num_classes);
    ClassificationMetrics m;
    const double n = static_cast<double>(truth.size());
    m.accuracy = n > 0 ? static_cast<double>(cm.trace()) / n : 0.0;
    double precision = 0.0;
    double recall = 0.0;
    for (int c = 0; c < num_classes; ++c) {
        const int tp = cm(c, c);
        const int predicted_c = cm.col(c).sum();
        const int actual_c = cm.row(c).sum();
        precision += predicted_c > 0 ? static_cast<double>(tp) / predicted_c : 0.0;
        recall += actual_c > 0 ? static_cast<double>(tp) / actual_c : 0.0;
    }
    m.macro_precision = precision / num_classes;
    m.macro_recall = recall / num_classes;
    return m;
}

MeanStd mean_std(std::span<const double> values) {
    MeanStd out;
    if (values.empty()) return out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size()));
    return out;
}

std::string format_mean_std(const MeanStd& m, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f±%.*f", digits, m.mean, digits, m.std);
    return buf;
}

}  // namespace scalenet
