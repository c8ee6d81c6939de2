#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "scalenet/optim.hpp"

namespace scalenet {

enum class Activation { relu, tanh, identity };

Activation parse_activation(std::string_view name);
std::string to_string(Activation a);

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& pre);
/// Elementwise sigma'(pre); relu'(0) is taken as 0.
Eigen::MatrixXd activation_derivative(Activation a, const Eigen::MatrixXd& pre);

/// Class-wise prediction; one column per sample.
struct Prediction {
    Eigen::MatrixXd logits;
    Eigen::MatrixXd probabilities;

    std::vector<int> predicted_labels() const;
};

/// Column softmax with max subtraction.
Prediction softmax_prediction(Eigen::MatrixXd logits);

/// Mean negative log-likelihood of the true class, probabilities floored at 1e-12.
double cross_entropy(const Prediction& pred, std::span<const int> labels);

/// d(mean cross-entropy)/d(logits) = (P - onehot(y)) / n.
Eigen::MatrixXd cross_entropy_logit_gradient(const Prediction& pred, std::span<const int> labels);

double accuracy(std::span<const int> truth, std::span<const int> predicted);

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double test_accuracy = 0.0;
};

/// A network trained by the shared full-batch loop.
class Trainable {
public:
    virtual ~Trainable() = default;
    /// Mean training loss at the current parameters; fills gradient buffers.
    virtual double compute_gradients() = 0;
    /// Parameter/gradient views in a fixed order.
    virtual std::vector<ParamSlot> slots() = 0;
    /// Held-out accuracy at the current parameters (NaN without a test set).
    virtual double test_accuracy() const = 0;
};

/// Runs `epochs` AdamW updates. Row e of the log holds the training loss and
/// test accuracy of the parameters after e updates. Throws on a non-finite
/// loss, naming the epoch.
std::vector<EpochRecord> fit_full_batch(Trainable& net, int epochs, OptimState& state);

}  // namespace scalenet
