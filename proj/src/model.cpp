#include "scalenet/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "scalenet/rng.hpp"

namespace scalenet {

Eigen::Index scalenet_parameter_count(Eigen::Index p, Eigen::Index num_classes, Eigen::Index num_scales) {
    return num_classes * num_scales * p + num_classes + num_scales;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (num_scales < 1) throw std::invalid_argument("config: num_scales must be >= 1");
    if (!(lr_weights > 0.0) || !(lr_scales > 0.0)) throw std::invalid_argument("config: learning rates must be > 0");
    if (!(weight_decay >= 0.0)) throw std::invalid_argument("config: weight_decay must be >= 0");
    if (!(scale_init_min > 0.0 && scale_init_max >= scale_init_min)) {
        throw std::invalid_argument("config: need 0 < scale_init_min <= scale_init_max");
    }
    if (adasyn_neighbors < 1) throw std::invalid_argument("config: adasyn_neighbors must be >= 1");
    if (!(adasyn_balance > 0.0 && adasyn_balance <= 1.0)) {
        throw std::invalid_argument("config: adasyn_balance must be in (0, 1]");
    }
    scalenet::validate(kernel);
}

ModelParams init_params(Eigen::Index p, Eigen::Index num_classes, const TrainConfig& cfg) {
    if (p < 1 || num_classes < 2 || cfg.num_scales < 1) throw std::invalid_argument("init_params: invalid dimensions");
    Rng rng(derive_seed(cfg.seed, "init"));
    const Eigen::Index J = cfg.num_scales;
    const Eigen::Index fan_in = J * p;

    ModelParams params;
    params.activation = cfg.activation;
    params.scales.log_scales.resize(J);
    const double lo = std::log10(cfg.scale_init_min);
    const double hi = std::log10(cfg.scale_init_max);
    for (Eigen::Index j = 0; j < J; ++j) params.scales.log_scales(j) = rng.uniform(lo, hi);

    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    params.weights.resize(num_classes, fan_in);
    for (Eigen::Index i = 0; i < params.weights.size(); ++i) params.weights.data()[i] = rng.normal(0.0, stddev);
    params.bias = Eigen::VectorXd::Zero(num_classes);
    return params;
}

ForwardCache forward_projected(const ModelParams& params, const SpectralBasis& basis, const FilterKernel& kernel,
                               const Eigen::MatrixXd& x_hat) {
    const Eigen::Index p = basis.dim();
    if (params.weights.cols() != params.num_scales() * p || params.bias.size() != params.weights.rows()) {
        throw std::invalid_argument("forward: parameter shapes inconsistent with basis dimension");
    }
    ForwardCache cache;
    cache.embedding = embed_all_projected(basis, kernel, x_hat, params.scales);
    cache.activated = activate(params.activation, cache.embedding.stacked);
    Eigen::MatrixXd logits = (params.weights * cache.activated).colwise() + params.bias;
    if (!logits.allFinite()) throw std::runtime_error("forward: non-finite logits");
    cache.prediction = softmax_prediction(std::move(logits));
    if (!cache.prediction.probabilities.allFinite()) throw std::runtime_error("forward: non-finite probabilities");
    return cache;
}

ForwardCache forward(const ModelParams& params, const SpectralBasis& basis, const FilterKernel& kernel,
                     const Eigen::MatrixXd& x) {
    return forward_projected(params, basis, kernel, project(basis, x));
}

Gradients backward_projected(const ForwardCache& cache, const ModelParams& params, const SpectralBasis& basis,
                             const FilterKernel& kernel, const Eigen::MatrixXd& x_hat, std::span<const int> labels,
                             bool freeze_scales) {
    const Eigen::MatrixXd& e = cache.embedding.stacked;
    if (e.cols() != x_hat.cols() || e.rows() != params.weights.cols() ||
        cache.prediction.probabilities.rows() != params.weights.rows()) {
        throw std::invalid_argument("backward: cache does not match parameters/input (stale cache?)");
    }
    const Eigen::MatrixXd d_logits = cross_entropy_logit_gradient(cache.prediction, labels);

    Gradients g;
    g.weights = d_logits * cache.activated.transpose();
    g.bias = d_logits.rowwise().sum();
    if (freeze_scales) {
        g.log_scales = Eigen::VectorXd::Zero(params.num_scales());
    } else {
        const Eigen::MatrixXd d_embedding =
            (params.weights.transpose() * d_logits).cwiseProduct(activation_derivative(params.activation, e));
        g.log_scales = scale_gradients_projected(basis, kernel, x_hat, params.scales, d_embedding);
    }
    return g;
}

Gradients backward(const ForwardCache& cache, const ModelParams& params, const SpectralBasis& basis,
                   const FilterKernel& kernel, const Eigen::MatrixXd& x, std::span<const int> labels,
                   bool freeze_scales) {
    return backward_projected(cache, params, basis, kernel, project(basis, x), labels, freeze_scales);
}

OptimState make_optim_state(const TrainConfig& cfg) {
    OptimState state;
    state.lr_weights = cfg.lr_weights;
    state.lr_scales = cfg.lr_scales;
    state.weight_decay = cfg.weight_decay;
    return state;
}

namespace {

std::vector<ParamSlot> model_slots(ModelParams& params, const Gradients& grads, const OptimState& state) {
    if (grads.weights.rows() != params.weights.rows() || grads.weights.cols() != params.weights.cols() ||
        grads.bias.size() != params.bias.size() || grads.log_scales.size() != params.scales.size()) {
        throw std::invalid_argument("adamw_step: gradient shapes do not match parameters");
    }
    return {
        {{params.weights.data(), static_cast<std::size_t>(params.weights.size())},
         {grads.weights.data(), static_cast<std::size_t>(grads.weights.size())}, state.lr_weights, true},
        {{params.bias.data(), static_cast<std::size_t>(params.bias.size())},
         {grads.bias.data(), static_cast<std::size_t>(grads.bias.size())}, state.lr_weights, false},
        {{params.scales.log_scales.data(), static_cast<std::size_t>(params.scales.size())},
         {grads.log_scales.data(), static_cast<std::size_t>(grads.log_scales.size())}, state.lr_scales, false},
    };
}

class ScaleNetTrainer final : public Trainable {
public:
    ScaleNetTrainer(ModelParams& params, const SpectralBasis& basis, const FilterKernel& kernel,
                    Eigen::MatrixXd x_hat, std::span<const int> labels, Eigen::MatrixXd x_hat_test,
                    std::span<const int> test_labels, bool freeze_scales, const OptimState& state)
        : params_(params), basis_(basis), kernel_(kernel), x_hat_(std::move(x_hat)), labels_(labels),
          x_hat_test_(std::move(x_hat_test)), test_labels_(test_labels), freeze_(freeze_scales), state_(state) {}

    double compute_gradients() override {
        const ForwardCache cache = forward_projected(params_, basis_, kernel_, x_hat_);
        grads_ = backward_projected(cache, params_, basis_, kernel_, x_hat_, labels_, freeze_);
        return cross_entropy(cache.prediction, labels_);
    }

    std::vector<ParamSlot> slots() override { return model_slots(params_, grads_, state_); }

    double test_accuracy() const override {
        if (test_labels_.empty()) return std::numeric_limits<double>::quiet_NaN();
        const auto pred = forward_projected(params_, basis_, kernel_, x_hat_test_).prediction.predicted_labels();
        return accuracy(test_labels_, pred);
    }

private:
    ModelParams& params_;
    const SpectralBasis& basis_;
    const FilterKernel& kernel_;
    Eigen::MatrixXd x_hat_;
    std::span<const int> labels_;
    Eigen::MatrixXd x_hat_test_;
    std::span<const int> test_labels_;
    bool freeze_;
    const OptimState& state_;
    Gradients grads_;
};

}  // namespace

void adamw_step(ModelParams& params, const Gradients& grads, OptimState& state) {
    const auto slots = model_slots(params, grads, state);
    adamw_update(slots, state);
}

Prediction ScaleNetModel::predict(const Eigen::MatrixXd& x) const {
    const SplineKernel k(kernel);
    return forward(params, basis, k, x).prediction;
}

TrainResult train(const Dataset& train_data, const Dataset& test_data, const TrainConfig& cfg) {
    cfg.validate();
    train_data.validate(false);
    const Eigen::Index p = train_data.num_features();
    if (test_data.num_samples() > 0 && test_data.num_features() != p) {
        throw std::invalid_argument("train: test split has a different feature count");
    }

    TrainResult result;
    result.model.kernel = cfg.kernel;
    result.model.basis = eigendecompose(covariance(train_data.features));
    if (cfg.normalize_eigenvalues) result.model.basis = normalized(result.model.basis);

    OversampleResult augmented{train_data.features, train_data.labels};
    if (cfg.oversample) {
        augmented = adasyn_oversample(train_data.features, train_data.labels,
                                      {cfg.adasyn_neighbors, cfg.adasyn_balance, derive_seed(cfg.seed, "adasyn")});
    }

    result.model.params = init_params(p, train_data.num_classes(), cfg);
    const SplineKernel kernel(cfg.kernel);
    OptimState state = make_optim_state(cfg);
    const SpectralBasis& basis = result.model.basis;
    Eigen::MatrixXd x_hat_test = test_data.num_samples() > 0 ? project(basis, test_data.features)
                                                               : Eigen::MatrixXd(p, 0);
    ScaleNetTrainer trainer(result.model.params, basis, kernel, project(basis, augmented.features),
                            augmented.labels, std::move(x_hat_test), test_data.labels, cfg.freeze_scales, state);
    result.log = fit_full_batch(trainer, cfg.epochs, state);
    return result;
}

}  // namespace scalenet
