#include "scalenet/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "scalenet/rng.hpp"

namespace scalenet {

Eigen::Index MlpSpec::num_parameters() const {
    Eigen::Index total = 0;
    for (std::size_t l = 0; l + 1 < layer_widths.size(); ++l) {
        total += layer_widths[l] * layer_widths[l + 1] + layer_widths[l + 1];
    }
    return total;
}

void MlpSpec::validate() const {
    if (layer_widths.size() < 2) throw std::invalid_argument("mlp: need at least input and output widths");
    for (auto w : layer_widths) {
        if (w < 1) throw std::invalid_argument("mlp: layer widths must be positive");
    }
}

MlpSpec make_1mlp(Eigen::Index p, Eigen::Index num_classes) { return {{p, num_classes}, Activation::relu}; }

MlpSpec make_2mlp_identity(Eigen::Index p, Eigen::Index num_classes) {
    return {{p, p, num_classes}, Activation::relu};
}

MlpSpec make_2mlp_reduced(Eigen::Index p, Eigen::Index num_classes, Eigen::Index target_params) {
    const Eigen::Index per_unit = p + num_classes + 1;
    const Eigen::Index hidden = (target_params - num_classes) / per_unit;
    if (target_params < num_classes || hidden < 1) {
        throw std::invalid_argument("make_2mlp_reduced: budget " + std::to_string(target_params) +
                                    " cannot fit a hidden layer of width 1");
    }
    return {{p, hidden, num_classes}, Activation::relu};
}

MlpParams init_mlp(const MlpSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    MlpParams params;
    for (std::size_t l = 0; l + 1 < spec.layer_widths.size(); ++l) {
        const Eigen::Index fan_in = spec.layer_widths[l];
        const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
        Eigen::MatrixXd w(spec.layer_widths[l + 1], fan_in);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal(0.0, stddev);
        params.weights.push_back(std::move(w));
        params.biases.push_back(Eigen::VectorXd::Zero(spec.layer_widths[l + 1]));
    }
    return params;
}

MlpCache mlp_forward(const MlpSpec& spec, const MlpParams& params, const Eigen::MatrixXd& x) {
    const std::size_t layers = params.weights.size();
    if (layers + 1 != spec.layer_widths.size() || x.rows() != spec.layer_widths.front()) {
        throw std::invalid_argument("mlp_forward: input or parameters do not match spec");
    }
    MlpCache cache;
    cache.post.push_back(x);
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd z = (params.weights[l] * cache.post.back()).colwise() + params.biases[l];
        if (!z.allFinite()) throw std::runtime_error("mlp_forward: non-finite values in layer " + std::to_string(l));
        if (l + 1 < layers) {
            cache.post.push_back(activate(spec.activation, z));
            cache.pre.push_back(std::move(z));
        } else {
            cache.pre.push_back(z);
            cache.prediction = softmax_prediction(std::move(z));
        }
    }
    return cache;
}

MlpGradients mlp_backward(const MlpSpec& spec, const MlpParams& params, const MlpCache& cache,
                          std::span<const int> labels) {
    const std::size_t layers = params.weights.size();
    MlpGradients g;
    g.weights.resize(layers);
    g.biases.resize(layers);
    Eigen::MatrixXd delta = cross_entropy_logit_gradient(cache.prediction, labels);
    for (std::size_t l = layers; l-- > 0;) {
        g.weights[l] = delta * cache.post[l].transpose();
        g.biases[l] = delta.rowwise().sum();
        if (l > 0) {
            delta = (params.weights[l].transpose() * delta)
                        .cwiseProduct(activation_derivative(spec.activation, cache.pre[l - 1]));
        }
    }
    return g;
}

namespace {

class MlpTrainer final : public Trainable {
public:
    MlpTrainer(const MlpSpec& spec, MlpParams& params, Eigen::MatrixXd x, std::span<const int> labels,
               const Eigen::MatrixXd& x_test, std::span<const int> test_labels, double lr)
        : spec_(spec), params_(params), x_(std::move(x)), labels_(labels), x_test_(x_test),
          test_labels_(test_labels), lr_(lr) {}

    double compute_gradients() override {
        const MlpCache cache = mlp_forward(spec_, params_, x_);
        grads_ = mlp_backward(spec_, params_, cache, labels_);
        return cross_entropy(cache.prediction, labels_);
    }

    std::vector<ParamSlot> slots() override {
        std::vector<ParamSlot> out;
        for (std::size_t l = 0; l < params_.weights.size(); ++l) {
            auto& w = params_.weights[l];
            auto& b = params_.biases[l];
            out.push_back({{w.data(), static_cast<std::size_t>(w.size())},
                           {grads_.weights[l].data(), static_cast<std::size_t>(grads_.weights[l].size())}, lr_, true});
            out.push_back({{b.data(), static_cast<std::size_t>(b.size())},
                           {grads_.biases[l].data(), static_cast<std::size_t>(grads_.biases[l].size())}, lr_, false});
        }
        return out;
    }

    double test_accuracy() const override {
        if (test_labels_.empty()) return std::numeric_limits<double>::quiet_NaN();
        return accuracy(test_labels_, mlp_forward(spec_, params_, x_test_).prediction.predicted_labels());
    }

private:
    const MlpSpec& spec_;
    MlpParams& params_;
    Eigen::MatrixXd x_;
    std::span<const int> labels_;
    const Eigen::MatrixXd& x_test_;
    std::span<const int> test_labels_;
    double lr_;
    MlpGradients grads_;
};

}  // namespace

MlpTrainResult train_mlp(const MlpSpec& spec, const Dataset& train_data, const Dataset& test_data,
                         const TrainConfig& cfg) {
    cfg.validate();
    spec.validate();
    train_data.validate(false);
    if (spec.layer_widths.front() != train_data.num_features() ||
        spec.layer_widths.back() != train_data.num_classes()) {
        throw std::invalid_argument("train_mlp: spec does not match data dimensions");
    }

    OversampleResult augmented{train_data.features, train_data.labels};
    if (cfg.oversample) {
        augmented = adasyn_oversample(train_data.features, train_data.labels,
                                      {cfg.adasyn_neighbors, cfg.adasyn_balance, derive_seed(cfg.seed, "adasyn")});
    }

    MlpTrainResult result;
    result.model.spec = spec;
    result.model.params = init_mlp(spec, derive_seed(cfg.seed, "init"));
    OptimState state = make_optim_state(cfg);
    MlpTrainer trainer(result.model.spec, result.model.params, std::move(augmented.features), augmented.labels,
                       test_data.features, test_data.labels, cfg.lr_weights);
    result.log = fit_full_batch(trainer, cfg.epochs, state);
    return result;
}

}  // namespace scalenet
