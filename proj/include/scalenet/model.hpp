#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "scalenet/data.hpp"
#include "scalenet/kernel.hpp"
#include "scalenet/network.hpp"
#include "scalenet/optim.hpp"
#include "scalenet/spectral.hpp"
#include "scalenet/transform.hpp"

namespace scalenet {

/// Classifier on top of the multi-scale transform: logits = W sigma(E) + b.
struct ModelParams {
    Eigen::MatrixXd weights;  // C x (J*p)
    Eigen::VectorXd bias;     // C
    Activation activation = Activation::relu;
    ScaleSet scales;

    Eigen::Index num_classes() const { return weights.rows(); }
    Eigen::Index num_scales() const { return scales.size(); }
    /// Trainable count C*J*p + C + J.
    Eigen::Index num_parameters() const { return weights.size() + bias.size() + scales.size(); }
};

/// C*(J*p) + C + J.
Eigen::Index scalenet_parameter_count(Eigen::Index p, Eigen::Index num_classes, Eigen::Index num_scales);

struct TrainConfig {
    int epochs = 500;
    std::uint64_t seed = 0;
    double lr_weights = 0.01;
    double lr_scales = 0.01;
    double weight_decay = 0.01;
    int num_scales = 16;
    double scale_init_min = 0.1;  // initial scales are log-uniform on [min, max]
    double scale_init_max = 10.0;
    KernelSpec kernel{};
    Activation activation = Activation::relu;
    bool freeze_scales = false;
    bool normalize_eigenvalues = true;  // scales act on lambda / lambda_max
    bool oversample = true;
    int adasyn_neighbors = 5;
    double adasyn_balance = 1.0;

    /// Throws std::invalid_argument on out-of-range settings.
    void validate() const;
};

struct ForwardCache {
    MultiScaleEmbedding embedding;  // E
    Eigen::MatrixXd activated;      // sigma(E)
    Prediction prediction;
};

struct Gradients {
    Eigen::MatrixXd weights;
    Eigen::VectorXd bias;
    Eigen::VectorXd log_scales;
};

/// He-normal weights (variance 2 / (J*p)), zero bias, log10-uniform scales.
ModelParams init_params(Eigen::Index p, Eigen::Index num_classes, const TrainConfig& cfg);

ForwardCache forward(const ModelParams& params, const SpectralBasis& basis, const FilterKernel& kernel,
                     const Eigen::MatrixXd& x);
ForwardCache forward_projected(const ModelParams& params, const SpectralBasis& basis, const FilterKernel& kernel,
                               const Eigen::MatrixXd& x_hat);

/// Gradients of the mean cross-entropy. With `freeze_scales` the scale
/// gradient is exactly zero.
Gradients backward(const ForwardCache& cache, const ModelParams& params, const SpectralBasis& basis,
                   const FilterKernel& kernel, const Eigen::MatrixXd& x, std::span<const int> labels,
                   bool freeze_scales = false);
Gradients backward_projected(const ForwardCache& cache, const ModelParams& params, const SpectralBasis& basis,
                             const FilterKernel& kernel, const Eigen::MatrixXd& x_hat, std::span<const int> labels,
                             bool freeze_scales = false);

OptimState make_optim_state(const TrainConfig& cfg);

/// One AdamW step. Weight decay touches W only; W and b use lr_weights,
/// the log-scales use lr_scales.
void adamw_step(ModelParams& params, const Gradients& grads, OptimState& state);

/// A fitted network together with the basis and kernel it was trained on.
struct ScaleNetModel {
    ModelParams params;
    SpectralBasis basis;
    KernelSpec kernel;

    /// `x` must be standardised with the training statistics.
    Prediction predict(const Eigen::MatrixXd& x) const;
};

struct TrainResult {
    ScaleNetModel model;
    std::vector<EpochRecord> log;
};

/// Full protocol on pre-standardised splits: basis from the real training
/// samples, ADASYN on the training split, then full-batch AdamW. `test` may
/// be empty, in which case logged test accuracy is NaN.
TrainResult train(const Dataset& train, const Dataset& test, const TrainConfig& cfg);

}  // namespace scalenet
