#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "scalenet/model.hpp"

namespace scalenet {

/// What is differentiated for Grad-CAM: the softmax probability of the
/// class (default) or its pre-softmax logit.
enum class SaliencyTarget { probability, logit };

SaliencyTarget parse_saliency_target(std::string_view name);
std::string to_string(SaliencyTarget t);

/// Per-variable saliency M^c(k) for every class c (p x C), for one sample.
struct SaliencyMap {
    Eigen::MatrixXd values;
    Eigen::Index sample_id = 0;
    Eigen::Index predicted_class = 0;
};

/// d y_c / dE for a single standardised sample, length J*p, where E is the
/// stacked multi-scale embedding (before the activation).
Eigen::VectorXd embedding_gradient(const ScaleNetModel& model, const Eigen::VectorXd& x, Eigen::Index c,
                                   SaliencyTarget target = SaliencyTarget::probability);

/// M^c(k) = sum_j ReLU( dy_c/dC_k(s_j) * C_k(s_j) ), length p.
Eigen::VectorXd grad_cam(const ScaleNetModel& model, const Eigen::VectorXd& x, Eigen::Index c,
                         SaliencyTarget target = SaliencyTarget::probability);

/// Grad-CAM for all classes plus the model's predicted class.
SaliencyMap saliency_map(const ScaleNetModel& model, const Eigen::VectorXd& x, Eigen::Index sample_id,
                         SaliencyTarget target = SaliencyTarget::probability);

struct RankedRegion {
    std::string name;
    double score = 0.0;
    Eigen::Index index = 0;
};

/// Descending by score, ties by ascending index.
std::vector<RankedRegion> rank_regions(const Eigen::VectorXd& scores, std::span<const std::string> names);

}  // namespace scalenet
