#include "scalenet/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace scalenet {

Activation parse_activation(std::string_view name) {
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    if (name == "identity") return Activation::identity;
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::identity: return "identity";
    }
    return "?";
}

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& pre) {
    switch (a) {
        case Activation::relu: return pre.cwiseMax(0.0);
        case Activation::tanh: return pre.array().tanh().matrix();
        case Activation::identity: return pre;
    }
    return pre;
}

Eigen::MatrixXd activation_derivative(Activation a, const Eigen::MatrixXd& pre) {
    switch (a) {
        case Activation::relu: return (pre.array() > 0.0).cast<double>().matrix();
        case Activation::tanh: return (1.0 - pre.array().tanh().square()).matrix();
        case Activation::identity: return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
    }
    return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
}

std::vector<int> Prediction::predicted_labels() const {
    std::vector<int> out(static_cast<std::size_t>(probabilities.cols()));
    for (Eigen::Index j = 0; j < probabilities.cols(); ++j) {
        Eigen::Index best = 0;
        logits.col(j).maxCoeff(&best);
        out[static_cast<std::size_t>(j)] = static_cast<int>(best);
    }
    return out;
}

Prediction softmax_prediction(Eigen::MatrixXd logits) {
    Prediction pred;
    pred.probabilities.resize(logits.rows(), logits.cols());
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
        const double top = logits.col(j).maxCoeff();
        const Eigen::ArrayXd e = (logits.col(j).array() - top).exp();
        pred.probabilities.col(j) = (e / e.sum()).matrix();
    }
    pred.logits = std::move(logits);
    return pred;
}

namespace {
void check_labels(const Prediction& pred, std::span<const int> labels) {
    if (static_cast<Eigen::Index>(labels.size()) != pred.probabilities.cols()) {
        throw std::invalid_argument("loss: label count does not match prediction columns");
    }
    for (int y : labels) {
        if (y < 0 || y >= pred.probabilities.rows()) throw std::invalid_argument("loss: label out of range");
    }
}
}  // namespace

double cross_entropy(const Prediction& pred, std::span<const int> labels) {
    check_labels(pred, labels);
    if (labels.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < labels.size(); ++j) {
        const double prob = pred.probabilities(labels[j], static_cast<Eigen::Index>(j));
        total -= std::log(std::max(prob, 1e-12));
    }
    return total / static_cast<double>(labels.size());
}

Eigen::MatrixXd cross_entropy_logit_gradient(const Prediction& pred, std::span<const int> labels) {
    check_labels(pred, labels);
    Eigen::MatrixXd grad = pred.probabilities;
    for (std::size_t j = 0; j < labels.size(); ++j) grad(labels[j], static_cast<Eigen::Index>(j)) -= 1.0;
    if (!labels.empty()) grad /= static_cast<double>(labels.size());
    return grad;
}

double accuracy(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.size() != predicted.size()) throw std::invalid_argument("accuracy: size mismatch");
    if (truth.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::vector<EpochRecord> fit_full_batch(Trainable& net, int epochs, OptimState& state) {
    if (epochs < 1) throw std::invalid_argument("fit: epochs must be >= 1");
    std::vector<EpochRecord> log;
    log.reserve(static_cast<std::size_t>(epochs));
    for (int e = 0; e < epochs; ++e) {
        double loss = 0.0;
        try {
            loss = net.compute_gradients();
        } catch (const std::runtime_error& err) {
            throw std::runtime_error("training diverged at epoch " + std::to_string(e) + ": " + err.what());
        }
        if (!std::isfinite(loss)) {
            throw std::runtime_error("training diverged: non-finite loss at epoch " + std::to_string(e));
        }
        log.push_back({e, loss, net.test_accuracy()});
        const auto slots = net.slots();
        adamw_update(slots, state);
    }
    return log;
}

}  // namespace scalenet
