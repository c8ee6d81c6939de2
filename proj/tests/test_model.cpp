#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "scalenet/model.hpp"
#include "scalenet/synth.hpp"
#include "test_util.hpp"

using namespace scalenet;

namespace {

Dataset standardized_synth(int C, std::uint64_t seed, Index n = 200) {
    SynthSpec spec;
    spec.num_classes = C;
    spec.seed = seed;
    spec.n = n;
    Dataset d = synth_generate(spec);
    return apply_standardizer(fit_standardizer(d), d);
}

}  // namespace

TEST(Init, HeVarianceAndScaleRange) {
    TrainConfig cfg;
    cfg.num_scales = 16;
    cfg.seed = 3;
    const ModelParams m = init_params(160, 4, cfg);
    ASSERT_EQ(m.weights.rows(), 4);
    ASSERT_EQ(m.weights.cols(), 16 * 160);
    const double mean = m.weights.mean();
    const double var = (m.weights.array() - mean).square().mean();
    EXPECT_NEAR(var, 2.0 / 2560.0, 0.2 * 2.0 / 2560.0);
    EXPECT_NEAR(mean, 0.0, 4.0 * std::sqrt(2.0 / 2560.0 / 10240.0));
    EXPECT_TRUE((m.bias.array() == 0.0).all());
    EXPECT_GE(m.scales.log_scales.minCoeff(), -1.0);
    EXPECT_LE(m.scales.log_scales.maxCoeff(), 1.0);
    EXPECT_EQ(m.num_parameters(), scalenet_parameter_count(160, 4, 16));

    const ModelParams again = init_params(160, 4, cfg);
    EXPECT_TRUE(testutil::bitwise_equal(again.weights, m.weights));
    EXPECT_TRUE(testutil::bitwise_equal(again.scales.log_scales, m.scales.log_scales));
    cfg.seed = 4;
    EXPECT_FALSE(testutil::bitwise_equal(init_params(160, 4, cfg).weights, m.weights));
}

TEST(Init, ScaleDrawsCoverTheLogRange) {
    TrainConfig cfg;
    cfg.num_scales = 4000;
    const ModelParams m = init_params(2, 2, cfg);
    EXPECT_NEAR(m.scales.log_scales.mean(), 0.0, 0.05);
    EXPECT_LT(m.scales.log_scales.minCoeff(), -0.99);
    EXPECT_GT(m.scales.log_scales.maxCoeff(), 0.99);
}

TEST(ParameterCount, Formula) {
    EXPECT_EQ(scalenet_parameter_count(160, 2, 16), 5138);
    EXPECT_EQ(scalenet_parameter_count(160, 4, 16), 10260);
    EXPECT_EQ(scalenet_parameter_count(3, 2, 1), 3 * 2 + 2 + 1);
}

TEST(Forward, ZeroWeightsGiveUniformProbabilities) {
    Rng rng(1);
    const auto basis = eigendecompose(covariance(testutil::centred(testutil::gaussian(rng, 4, 10))));
    const SplineKernel g{KernelSpec{}};
    ModelParams m;
    m.weights = Eigen::MatrixXd::Zero(3, 8);
    m.bias = Eigen::VectorXd::Zero(3);
    m.scales.log_scales = Eigen::Vector2d(0.1, -0.3);
    const auto cache = forward(m, basis, g, testutil::gaussian(rng, 4, 5));
    EXPECT_LE((cache.prediction.probabilities.array() - 1.0 / 3.0).abs().maxCoeff(), 1e-15);
    const std::vector<int> y{0, 1, 2, 0, 1};
    EXPECT_NEAR(cross_entropy(cache.prediction, y), std::log(3.0), 1e-14);
}

TEST(Forward, TinyNetMatchesDenseOracle) {
    Rng rng(2);
    const SplineKernel g{KernelSpec{}};
    const auto basis = normalized(eigendecompose(covariance(testutil::centred(testutil::gaussian(rng, 3, 6)))));
    TrainConfig cfg;
    cfg.num_scales = 2;
    cfg.seed = 17;
    for (Activation a : {Activation::relu, Activation::tanh, Activation::identity}) {
        cfg.activation = a;
        ModelParams m = init_params(3, 2, cfg);
        m.bias = Eigen::Vector2d(0.3, -0.2);
        const Eigen::MatrixXd x = testutil::gaussian(rng, 3, 2);
        const auto cache = forward(m, basis, g, x);
        EXPECT_LE((cache.prediction.logits - oracle::dense_logits(m, basis, g, x)).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE((cache.prediction.probabilities.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    }
}

TEST(Forward, ShapeMismatchThrows) {
    ModelParams m;
    m.weights = Eigen::MatrixXd::Zero(2, 5);
    m.bias = Eigen::VectorXd::Zero(2);
    m.scales.log_scales = Eigen::VectorXd::Zero(2);
    const SpectralBasis b{Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Ones(3)};
    EXPECT_THROW(forward(m, b, SplineKernel{KernelSpec{}}, Eigen::MatrixXd::Zero(3, 1)), std::invalid_argument);
}

TEST(Loss, AnalyticCases) {
    Prediction uniform = softmax_prediction(Eigen::MatrixXd::Zero(4, 3));
    EXPECT_NEAR(cross_entropy(uniform, std::vector<int>{0, 1, 3}), std::log(4.0), 1e-15);

    Eigen::MatrixXd sharp = Eigen::MatrixXd::Constant(3, 2, -1000.0);
    sharp(1, 0) = 1000.0;
    sharp(2, 1) = 1000.0;
    const Prediction onehot = softmax_prediction(sharp);
    EXPECT_LE(cross_entropy(onehot, std::vector<int>{1, 2}), 1e-9);
    // the floor keeps a confidently wrong prediction finite
    EXPECT_NEAR(cross_entropy(onehot, std::vector<int>{0, 0}), -std::log(1e-12), 1e-9);
    EXPECT_THROW(cross_entropy(uniform, std::vector<int>{0, 4, 1}), std::invalid_argument);

    Rng rng(3);
    const Eigen::MatrixXd logits = testutil::gaussian(rng, 3, 7) * 2.0;
    const Prediction pred = softmax_prediction(logits);
    const std::vector<int> y{0, 2, 1, 1, 0, 2, 2};
    double direct = 0.0;
    for (int i = 0; i < 7; ++i) {
        double denom = 0.0;
        for (int c = 0; c < 3; ++c) denom += std::exp(logits(c, i));
        direct -= std::log(std::exp(logits(y[static_cast<std::size_t>(i)], i)) / denom);
    }
    EXPECT_NEAR(cross_entropy(pred, y), direct / 7.0, 1e-12);
}

TEST(Backward, MatchesFiniteDifferences) {
    const KernelSpec spec;
    const SplineKernel g{spec};
    Rng rng(4);
    for (Activation a : {Activation::relu, Activation::tanh, Activation::identity}) {
        for (int trial = 0; trial < 15; ++trial) {
            const auto inst = oracle::random_instance(rng, a, g, spec);
            const auto res = oracle::check_gradients(inst, g);
            EXPECT_EQ(res.failed, 0) << to_string(a) << " trial " << trial << ": " << res.first_failure;
        }
    }
}

TEST(Backward, FrozenScalesZeroOnlyTheScaleGradient) {
    const KernelSpec spec;
    const SplineKernel g{spec};
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto inst = oracle::random_instance(rng, trial % 2 ? Activation::tanh : Activation::relu, g, spec);
        const auto cache = forward(inst.params, inst.basis, g, inst.x);
        const auto live = backward(cache, inst.params, inst.basis, g, inst.x, inst.labels, false);
        const auto frozen = backward(cache, inst.params, inst.basis, g, inst.x, inst.labels, true);
        EXPECT_TRUE((frozen.log_scales.array() == 0.0).all());
        EXPECT_TRUE(testutil::bitwise_equal(frozen.weights, live.weights));
        EXPECT_TRUE(testutil::bitwise_equal(frozen.bias, live.bias));
    }
}

TEST(Backward, ZeroResidualGivesZeroGradients) {
    // logits so large that probabilities are one-hot on the true labels
    Rng rng(6);
    const SplineKernel g{KernelSpec{}};
    const auto basis = eigendecompose(covariance(testutil::centred(testutil::gaussian(rng, 3, 8))));
    ModelParams m;
    m.activation = Activation::relu;
    m.scales.log_scales = Eigen::VectorXd::Zero(1);
    m.weights = Eigen::MatrixXd::Zero(2, 3);
    m.bias = Eigen::Vector2d(1000.0, -1000.0);
    const Eigen::MatrixXd x = testutil::gaussian(rng, 3, 4);
    const std::vector<int> y{0, 0, 0, 0};
    const auto cache = forward(m, basis, g, x);
    const auto grads = backward(cache, m, basis, g, x, y);
    // vectorised exp leaves denormals rather than exact zeros
    EXPECT_LE(grads.weights.cwiseAbs().maxCoeff(), 1e-300);
    EXPECT_LE(grads.bias.cwiseAbs().maxCoeff(), 1e-300);
    EXPECT_LE(grads.log_scales.cwiseAbs().maxCoeff(), 1e-300);
}

TEST(Backward, DuplicatedSamplesLeaveGradientsUnchanged) {
    const KernelSpec spec;
    const SplineKernel g{spec};
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const auto inst = oracle::random_instance(rng, Activation::tanh, g, spec);
        Eigen::MatrixXd x2(inst.x.rows(), 2 * inst.x.cols());
        x2 << inst.x, inst.x;
        std::vector<int> y2 = inst.labels;
        y2.insert(y2.end(), inst.labels.begin(), inst.labels.end());
        const auto a = backward(forward(inst.params, inst.basis, g, inst.x), inst.params, inst.basis, g, inst.x,
                                inst.labels);
        const auto b = backward(forward(inst.params, inst.basis, g, x2), inst.params, inst.basis, g, x2, y2);
        EXPECT_LE((a.weights - b.weights).cwiseAbs().maxCoeff(), 1e-13);
        EXPECT_LE((a.bias - b.bias).cwiseAbs().maxCoeff(), 1e-13);
        EXPECT_LE((a.log_scales - b.log_scales).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(AdamW, ZeroGradientZeroDecayIsIdentity) {
    Rng rng(8);
    ModelParams m;
    m.weights = testutil::gaussian(rng, 2, 6);
    m.bias = testutil::gaussian(rng, 2, 1);
    m.scales.log_scales = testutil::gaussian(rng, 3, 1);
    const ModelParams before = m;
    Gradients zero{Eigen::MatrixXd::Zero(2, 6), Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)};
    TrainConfig cfg;
    cfg.weight_decay = 0.0;
    OptimState state = make_optim_state(cfg);
    for (int i = 0; i < 3; ++i) adamw_step(m, zero, state);
    EXPECT_TRUE(testutil::bitwise_equal(m.weights, before.weights));
    EXPECT_TRUE(testutil::bitwise_equal(m.bias, before.bias));
    EXPECT_TRUE(testutil::bitwise_equal(m.scales.log_scales, before.scales.log_scales));
    EXPECT_EQ(state.step_count, 3);
}

TEST(AdamW, DecoupledDecayTouchesWeightsOnly) {
    Rng rng(9);
    ModelParams m;
    m.weights = testutil::gaussian(rng, 2, 6);
    m.bias = testutil::gaussian(rng, 2, 1);
    m.scales.log_scales = testutil::gaussian(rng, 3, 1);
    const ModelParams before = m;
    Gradients zero{Eigen::MatrixXd::Zero(2, 6), Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)};
    TrainConfig cfg;
    cfg.lr_weights = 0.02;
    cfg.weight_decay = 0.01;
    OptimState state = make_optim_state(cfg);
    adamw_step(m, zero, state);
    EXPECT_TRUE(testutil::bitwise_equal(m.weights, before.weights * (1.0 - 0.02 * 0.01)));
    EXPECT_TRUE(testutil::bitwise_equal(m.bias, before.bias));
    EXPECT_TRUE(testutil::bitwise_equal(m.scales.log_scales, before.scales.log_scales));
}

TEST(AdamW, FirstStepClosedForm) {
    Rng rng(10);
    ModelParams m;
    m.weights = testutil::gaussian(rng, 2, 3);
    m.bias = testutil::gaussian(rng, 2, 1);
    m.scales.log_scales = testutil::gaussian(rng, 2, 1);
    const ModelParams before = m;
    Gradients g{testutil::gaussian(rng, 2, 3), testutil::gaussian(rng, 2, 1), testutil::gaussian(rng, 2, 1)};
    g.weights(0, 0) = 0.0;
    TrainConfig cfg;
    cfg.lr_weights = 0.01;
    cfg.lr_scales = 0.03;
    cfg.weight_decay = 0.0;
    OptimState state = make_optim_state(cfg);
    adamw_step(m, g, state);
    auto step = [](double lr, double grad) { return -lr * grad / (std::abs(grad) + 1e-8); };
    for (Index i = 0; i < g.weights.size(); ++i)
        EXPECT_NEAR(m.weights.data()[i] - before.weights.data()[i], step(0.01, g.weights.data()[i]), 1e-15);
    for (Index i = 0; i < g.bias.size(); ++i)
        EXPECT_NEAR(m.bias(i) - before.bias(i), step(0.01, g.bias(i)), 1e-15);
    for (Index i = 0; i < g.log_scales.size(); ++i)
        EXPECT_NEAR(m.scales.log_scales(i) - before.scales.log_scales(i), step(0.03, g.log_scales(i)), 1e-15);
    EXPECT_EQ(m.weights(0, 0), before.weights(0, 0));
}

TEST(AdamW, SecondStepMatchesReferenceRecurrence) {
    ModelParams m;
    m.weights = Eigen::MatrixXd::Constant(1, 1, 0.5);
    m.bias = Eigen::VectorXd::Zero(1);
    m.scales.log_scales = Eigen::VectorXd::Zero(1);
    TrainConfig cfg;
    cfg.lr_weights = 0.1;
    cfg.weight_decay = 0.01;
    OptimState state = make_optim_state(cfg);
    const double g1 = 0.3, g2 = -0.7;
    adamw_step(m, {Eigen::MatrixXd::Constant(1, 1, g1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)}, state);
    adamw_step(m, {Eigen::MatrixXd::Constant(1, 1, g2), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)}, state);
    double w = 0.5, mo = 0.0, v = 0.0;
    int t = 0;
    for (double gr : {g1, g2}) {
        ++t;
        mo = 0.9 * mo + 0.1 * gr;
        v = 0.999 * v + 0.001 * gr * gr;
        const double mh = mo / (1 - std::pow(0.9, t));
        const double vh = v / (1 - std::pow(0.999, t));
        w = w * (1 - 0.1 * 0.01) - 0.1 * mh / (std::sqrt(vh) + 1e-8);
    }
    EXPECT_NEAR(m.weights(0, 0), w, 1e-15);
}

TEST(Descent, PlainGradientStepsDoNotIncreaseLoss) {
    const KernelSpec spec;
    const SplineKernel g{spec};
    Rng rng(11);
    auto inst = oracle::random_instance(rng, Activation::tanh, g, spec);
    double lr = 1e-3;
    double loss = cross_entropy(forward(inst.params, inst.basis, g, inst.x).prediction, inst.labels);
    const double start = loss;
    for (int step = 0; step < 100; ++step) {
        const auto cache = forward(inst.params, inst.basis, g, inst.x);
        const auto grads = backward(cache, inst.params, inst.basis, g, inst.x, inst.labels);
        for (;;) {
            ModelParams trial = inst.params;
            trial.weights -= lr * grads.weights;
            trial.bias -= lr * grads.bias;
            trial.scales.log_scales -= lr * grads.log_scales;
            const double next = cross_entropy(forward(trial, inst.basis, g, inst.x).prediction, inst.labels);
            if (next <= loss + 1e-9) {
                inst.params = trial;
                loss = next;
                break;
            }
            lr *= 0.5;
            ASSERT_GT(lr, 1e-12) << "no descent at step " << step;
        }
    }
    EXPECT_LT(loss, start);
}

TEST(Train, FrozenScalesStayBitwiseFixed) {
    const Dataset d = standardized_synth(2, 1);
    TrainConfig cfg;
    cfg.num_scales = 4;
    cfg.epochs = 30;
    cfg.freeze_scales = true;
    const auto r = train(d, Dataset{}, cfg);
    const ModelParams init = init_params(d.num_features(), 2, cfg);
    EXPECT_TRUE(testutil::bitwise_equal(r.model.params.scales.log_scales, init.scales.log_scales));
    EXPECT_FALSE(testutil::bitwise_equal(r.model.params.weights, init.weights));

    cfg.freeze_scales = false;
    const auto live = train(d, Dataset{}, cfg);
    EXPECT_FALSE(testutil::bitwise_equal(live.model.params.scales.log_scales, init.scales.log_scales));
}

TEST(Train, DeterministicLogsAndParameters) {
    const Dataset d = standardized_synth(3, 2, 150);
    TrainConfig cfg;
    cfg.num_scales = 3;
    cfg.epochs = 25;
    cfg.seed = 99;
    const auto a = train(d, d, cfg);
    const auto b = train(d, d, cfg);
    ASSERT_EQ(a.log.size(), b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        EXPECT_EQ(a.log[i].epoch, b.log[i].epoch);
        EXPECT_EQ(a.log[i].train_loss, b.log[i].train_loss);
        EXPECT_EQ(a.log[i].test_accuracy, b.log[i].test_accuracy);
    }
    EXPECT_TRUE(testutil::bitwise_equal(a.model.params.weights, b.model.params.weights));
    EXPECT_TRUE(testutil::bitwise_equal(a.model.params.scales.log_scales, b.model.params.scales.log_scales));
}

TEST(Train, LogHasOneRowPerEpoch) {
    const Dataset d = standardized_synth(2, 3);
    TrainConfig cfg;
    cfg.num_scales = 2;
    cfg.epochs = 12;
    const auto r = train(d, Dataset{}, cfg);
    ASSERT_EQ(r.log.size(), 12u);
    for (std::size_t i = 0; i < r.log.size(); ++i) {
        EXPECT_EQ(r.log[i].epoch, static_cast<int>(i));
        EXPECT_TRUE(std::isnan(r.log[i].test_accuracy));
    }
    EXPECT_LT(r.log.back().train_loss, r.log.front().train_loss);
}

TEST(Train, StartingLossAveragesToLogC) {
    // averaged over seeds a fresh He-initialised network sits near ln C
    for (int J : {4, 16}) {
        for (int C : {2, 4}) {
            double total = 0.0;
            const int seeds = 20;
            for (int s = 0; s < seeds; ++s) {
                TrainConfig cfg;
                cfg.num_scales = J;
                cfg.epochs = 1;
                cfg.seed = static_cast<std::uint64_t>(s);
                total += train(standardized_synth(C, static_cast<std::uint64_t>(s)), Dataset{}, cfg).log[0].train_loss;
            }
            EXPECT_NEAR(total / seeds, std::log(static_cast<double>(C)), 0.1) << "J=" << J << " C=" << C;
        }
    }
}

namespace {

class NanAfter final : public Trainable {
public:
    explicit NanAfter(int epoch) : epoch_(epoch) {}
    double compute_gradients() override { return calls_++ >= epoch_ ? std::numeric_limits<double>::quiet_NaN() : 1.0; }
    std::vector<ParamSlot> slots() override { return {{value_, grad_, 0.1, false}}; }
    double test_accuracy() const override { return 0.5; }

private:
    int epoch_;
    int calls_ = 0;
    std::vector<double> value_ = std::vector<double>(1, 0.0);
    std::vector<double> grad_ = std::vector<double>(1, 1.0);
};

}  // namespace

TEST(Train, DivergenceIsReportedWithEpoch) {
    NanAfter net(3);
    OptimState state;
    try {
        fit_full_batch(net, 10, state);
        FAIL() << "expected divergence";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("epoch 3"), std::string::npos) << e.what();
    }
    EXPECT_EQ(state.step_count, 3);
}

TEST(TrainConfig, ValidationRejectsBadSettings) {
    TrainConfig cfg;
    cfg.epochs = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = TrainConfig{};
    cfg.num_scales = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = TrainConfig{};
    cfg.scale_init_min = 10.0;
    cfg.scale_init_max = 1.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    EXPECT_NO_THROW(TrainConfig{}.validate());
}
