#include "scalenet/transform.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace scalenet {

double ScaleSet::scale(Eigen::Index j) const { return std::pow(10.0, log_scales(j)); }

Eigen::VectorXd filter_response(const SpectralBasis& basis, const FilterKernel& kernel, double scale) {
    Eigen::VectorXd g(basis.dim());
    for (Eigen::Index k = 0; k < basis.dim(); ++k) g(k) = kernel.value(scale * basis.eigenvalues(k));
    return g;
}

ScaleEmbedding embed_projected(const SpectralBasis& basis, const FilterKernel& kernel,
                               const Eigen::MatrixXd& x_hat, double scale, Eigen::Index scale_index) {
    if (x_hat.rows() != basis.dim()) throw std::invalid_argument("embed: dimension mismatch with basis");
    if (!(scale > 0.0)) throw std::invalid_argument("embed: scale must be positive");
    ScaleEmbedding out;
    out.scale_index = scale_index;
    out.filter = filter_response(basis, kernel, scale);
    out.coefficients = basis.eigenvectors * (out.filter.asDiagonal() * x_hat);
    if (!out.coefficients.allFinite()) {
        throw std::runtime_error("embed: non-finite coefficients at scale " + std::to_string(scale));
    }
    return out;
}

ScaleEmbedding embed_one(const SpectralBasis& basis, const FilterKernel& kernel, const Eigen::MatrixXd& x,
                         double scale) {
    return embed_projected(basis, kernel, project(basis, x), scale, 0);
}

MultiScaleEmbedding embed_all_projected(const SpectralBasis& basis, const FilterKernel& kernel,
                                        const Eigen::MatrixXd& x_hat, const ScaleSet& scales) {
    const Eigen::Index J = scales.size();
    if (J < 1) throw std::invalid_argument("embed_all: need at least one scale");
    const Eigen::Index p = basis.dim();
    MultiScaleEmbedding out;
    out.blocks.reserve(static_cast<std::size_t>(J));
    out.stacked.resize(J * p, x_hat.cols());
    for (Eigen::Index j = 0; j < J; ++j) {
        out.blocks.push_back(embed_projected(basis, kernel, x_hat, scales.scale(j), j));
        out.stacked.middleRows(j * p, p) = out.blocks.back().coefficients;
    }
    return out;
}

MultiScaleEmbedding embed_all(const SpectralBasis& basis, const FilterKernel& kernel, const Eigen::MatrixXd& x,
                              const ScaleSet& scales) {
    return embed_all_projected(basis, kernel, project(basis, x), scales);
}

Eigen::VectorXd scale_gradients_projected(const SpectralBasis& basis, const FilterKernel& kernel,
                                          const Eigen::MatrixXd& x_hat, const ScaleSet& scales,
                                          const Eigen::MatrixXd& upstream) {
    const Eigen::Index J = scales.size();
    const Eigen::Index p = basis.dim();
    if (upstream.rows() != J * p || upstream.cols() != x_hat.cols() || x_hat.rows() != p) {
        throw std::invalid_argument("scale_gradients: upstream shape does not match (J*p) x n");
    }
    Eigen::VectorXd grad(J);
    for (Eigen::Index j = 0; j < J; ++j) {
        const double s = scales.scale(j);
        // <G, U D U^T X> = sum_k D_kk * <(U^T G)_k, (U^T X)_k>
        const Eigen::MatrixXd upstream_hat = basis.eigenvectors.transpose() * upstream.middleRows(j * p, p);
        const Eigen::VectorXd overlap = upstream_hat.cwiseProduct(x_hat).rowwise().sum();
        double ds = 0.0;
        for (Eigen::Index k = 0; k < p; ++k) {
            const double lambda = basis.eigenvalues(k);
            if (lambda == 0.0) continue;
            ds += lambda * kernel.derivative(s * lambda) * overlap(k);
        }
        grad(j) = std::numbers::ln10 * s * ds;
    }
    return grad;
}

Eigen::VectorXd scale_gradients(const SpectralBasis& basis, const FilterKernel& kernel, const Eigen::MatrixXd& x,
                                const ScaleSet& scales, const Eigen::MatrixXd& upstream) {
    return scale_gradients_projected(basis, kernel, project(basis, x), scales, upstream);
}

}  // namespace scalenet
