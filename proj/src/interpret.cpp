#include "scalenet/interpret.hpp"

#include <algorithm>
#include <stdexcept>

namespace scalenet {

SaliencyTarget parse_saliency_target(std::string_view name) {
    if (name == "probability") return SaliencyTarget::probability;
    if (name == "logit") return SaliencyTarget::logit;
    throw std::invalid_argument("unknown saliency target '" + std::string(name) + "'");
}

std::string to_string(SaliencyTarget t) { return t == SaliencyTarget::probability ? "probability" : "logit"; }

namespace {

struct SampleForward {
    ForwardCache cache;
    Eigen::VectorXd embedding;
};

SampleForward run_sample(const ScaleNetModel& model, const Eigen::VectorXd& x) {
    if (model.params.weights.size() == 0 || model.params.scales.size() == 0) {
        throw std::invalid_argument("grad_cam: model has no trained parameters");
    }
    if (x.size() != model.basis.dim()) throw std::invalid_argument("grad_cam: sample length does not match model");
    const SplineKernel kernel(model.kernel);
    SampleForward out{forward(model.params, model.basis, kernel, Eigen::MatrixXd(x)), {}};
    out.embedding = out.cache.embedding.stacked.col(0);
    return out;
}

Eigen::VectorXd embedding_gradient_from(const ScaleNetModel& model, const SampleForward& f, Eigen::Index c,
                                        SaliencyTarget target) {
    const Eigen::Index C = model.params.num_classes();
    if (c < 0 || c >= C) throw std::invalid_argument("grad_cam: class index out of range");
    Eigen::VectorXd d_logits = Eigen::VectorXd::Zero(C);
    if (target == SaliencyTarget::logit) {
        d_logits(c) = 1.0;
    } else {
        // d softmax_c / d z_j = p_c (delta_cj - p_j)
        const Eigen::VectorXd prob = f.cache.prediction.probabilities.col(0);
        d_logits = -prob(c) * prob;
        d_logits(c) += prob(c);
    }
    const Eigen::VectorXd d_activated = model.params.weights.transpose() * d_logits;
    const Eigen::VectorXd slope = activation_derivative(model.params.activation, Eigen::MatrixXd(f.embedding)).col(0);
    return d_activated.cwiseProduct(slope);
}

Eigen::VectorXd grad_cam_from(const ScaleNetModel& model, const SampleForward& f, Eigen::Index c,
                              SaliencyTarget target) {
    const Eigen::Index p = model.basis.dim();
    const Eigen::Index J = model.params.num_scales();
    const Eigen::VectorXd grad = embedding_gradient_from(model, f, c, target);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(p);
    for (Eigen::Index j = 0; j < J; ++j) {
        m += grad.segment(j * p, p).cwiseProduct(f.embedding.segment(j * p, p)).cwiseMax(0.0);
    }
    return m;
}

}  // namespace

Eigen::VectorXd embedding_gradient(const ScaleNetModel& model, const Eigen::VectorXd& x, Eigen::Index c,
                                   SaliencyTarget target) {
    return embedding_gradient_from(model, run_sample(model, x), c, target);
}

Eigen::VectorXd grad_cam(const ScaleNetModel& model, const Eigen::VectorXd& x, Eigen::Index c,
                         SaliencyTarget target) {
    return grad_cam_from(model, run_sample(model, x), c, target);
}

SaliencyMap saliency_map(const ScaleNetModel& model, const Eigen::VectorXd& x, Eigen::Index sample_id,
                         SaliencyTarget target) {
    const SampleForward f = run_sample(model, x);
    const Eigen::Index C = model.params.num_classes();
    SaliencyMap map;
    map.sample_id = sample_id;
    map.predicted_class = f.cache.prediction.predicted_labels().front();
    map.values.resize(model.basis.dim(), C);
    for (Eigen::Index c = 0; c < C; ++c) map.values.col(c) = grad_cam_from(model, f, c, target);
    return map;
}

std::vector<RankedRegion> rank_regions(const Eigen::VectorXd& scores, std::span<const std::string> names) {
    if (static_cast<Eigen::Index>(names.size()) != scores.size()) {
        throw std::invalid_argument("rank_regions: " + std::to_string(names.size()) + " names for " +
                                    std::to_string(scores.size()) + " scores");
    }
    std::vector<RankedRegion> out;
    out.reserve(names.size());
    for (Eigen::Index k = 0; k < scores.size(); ++k) out.push_back({names[static_cast<std::size_t>(k)], scores(k), k});
    std::stable_sort(out.begin(), out.end(), [](const RankedRegion& a, const RankedRegion& b) {
        return a.score > b.score;
    });
    return out;
}

}  // namespace scalenet
