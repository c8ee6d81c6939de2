#pragma once

#include <vector>

#include <Eigen/Dense>

#include "scalenet/data.hpp"
#include "scalenet/model.hpp"
#include "scalenet/network.hpp"

namespace scalenet {

/// Fully connected network [p, hidden..., C]; hidden layers use `activation`.
struct MlpSpec {
    std::vector<Eigen::Index> layer_widths;
    Activation activation = Activation::relu;

    /// Weights plus biases over all layers.
    Eigen::Index num_parameters() const;
    void validate() const;
};

MlpSpec make_1mlp(Eigen::Index p, Eigen::Index num_classes);
MlpSpec make_2mlp_identity(Eigen::Index p, Eigen::Index num_classes);
/// Hidden width h is the largest with h*(p+C) + h + C <= target_params.
MlpSpec make_2mlp_reduced(Eigen::Index p, Eigen::Index num_classes, Eigen::Index target_params);

struct MlpParams {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

struct MlpCache {
    std::vector<Eigen::MatrixXd> pre;   // per layer, before activation
    std::vector<Eigen::MatrixXd> post;  // post[0] is the input
    Prediction prediction;
};

struct MlpGradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

/// He-normal weights per layer, zero biases. Deterministic in `seed`.
MlpParams init_mlp(const MlpSpec& spec, std::uint64_t seed);
MlpCache mlp_forward(const MlpSpec& spec, const MlpParams& params, const Eigen::MatrixXd& x);
MlpGradients mlp_backward(const MlpSpec& spec, const MlpParams& params, const MlpCache& cache,
                          std::span<const int> labels);

struct MlpModel {
    MlpSpec spec;
    MlpParams params;

    Prediction predict(const Eigen::MatrixXd& x) const { return mlp_forward(spec, params, x).prediction; }
};

struct MlpTrainResult {
    MlpModel model;
    std::vector<EpochRecord> log;
};

/// Same protocol as train(): ADASYN on the training split, He init, AdamW
/// with decay on every weight matrix, full-batch loop. Uses lr_weights.
MlpTrainResult train_mlp(const MlpSpec& spec, const Dataset& train, const Dataset& test, const TrainConfig& cfg);

}  // namespace scalenet
