#pragma once

#include <vector>

#include <Eigen/Dense>

#include "scalenet/kernel.hpp"
#include "scalenet/spectral.hpp"

namespace scalenet {

/// Trainable scales stored as base-10 logarithms, s_j = 10^theta_j.
struct ScaleSet {
    Eigen::VectorXd log_scales;

    Eigen::Index size() const { return log_scales.size(); }
    double scale(Eigen::Index j) const;
};

/// Coefficients C_X(s) = U g(s Lambda) U^T X for one scale.
struct ScaleEmbedding {
    Eigen::MatrixXd coefficients;
    Eigen::Index scale_index = 0;
    Eigen::VectorXd filter;  // g(s * lambda_k)
};

/// All scales, in scale order, plus their vertical concatenation E.
struct MultiScaleEmbedding {
    std::vector<ScaleEmbedding> blocks;
    Eigen::MatrixXd stacked;
};

/// g(s * lambda_k) for every eigenvalue.
Eigen::VectorXd filter_response(const SpectralBasis& basis, const FilterKernel& kernel, double scale);

ScaleEmbedding embed_one(const SpectralBasis& basis, const FilterKernel& kernel, const Eigen::MatrixXd& x,
                         double scale);

/// Same as embed_one but takes dual-space coordinates U^T X, which stay
/// fixed while the scales train.
ScaleEmbedding embed_projected(const SpectralBasis& basis, const FilterKernel& kernel,
                               const Eigen::MatrixXd& x_hat, double scale, Eigen::Index scale_index = 0);

MultiScaleEmbedding embed_all(const SpectralBasis& basis, const FilterKernel& kernel, const Eigen::MatrixXd& x,
                              const ScaleSet& scales);
MultiScaleEmbedding embed_all_projected(const SpectralBasis& basis, const FilterKernel& kernel,
                                        const Eigen::MatrixXd& x_hat, const ScaleSet& scales);

/// dL/dtheta_j given upstream = dL/dE, (J*p) x n. Uses
///   dC/ds = U diag(lambda_k g'(s lambda_k)) U^T X
/// and dC/dtheta = ln(10) * s * dC/ds.
Eigen::VectorXd scale_gradients(const SpectralBasis& basis, const FilterKernel& kernel, const Eigen::MatrixXd& x,
                                const ScaleSet& scales, const Eigen::MatrixXd& upstream);
Eigen::VectorXd scale_gradients_projected(const SpectralBasis& basis, const FilterKernel& kernel,
                                          const Eigen::MatrixXd& x_hat, const ScaleSet& scales,
                                          const Eigen::MatrixXd& upstream);

}  // namespace scalenet
