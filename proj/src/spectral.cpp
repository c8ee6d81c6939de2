#include "scalenet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace scalenet {

namespace {
constexpr double kCenterTolerance = 1e-8;
constexpr double kSymmetryTolerance = 1e-12;
constexpr double kNegativeEigenTolerance = 1e-10;
}  // namespace

CovarianceMatrix covariance(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.cols();
    if (n < 1) throw std::invalid_argument("covariance: no samples");
    const Eigen::VectorXd row_means = x.rowwise().mean();
    if (row_means.size() > 0 && row_means.cwiseAbs().maxCoeff() > kCenterTolerance) {
        throw std::invalid_argument("covariance: input rows are not centred (max |mean| = " +
                                    std::to_string(row_means.cwiseAbs().maxCoeff()) + ")");
    }
    Eigen::MatrixXd a = (x * x.transpose()) / static_cast<double>(n);
    CovarianceMatrix cov;
    cov.matrix = 0.5 * (a + a.transpose());
    cov.n_samples = n;
    return cov;
}

SpectralBasis eigendecompose(const CovarianceMatrix& cov) {
    const Eigen::MatrixXd& a = cov.matrix;
    if (a.rows() != a.cols()) throw std::invalid_argument("eigendecompose: matrix is not square");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
        throw std::invalid_argument("eigendecompose: matrix is not symmetric");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecompose: eigensolver did not converge");

    SpectralBasis basis;
    basis.eigenvalues = solver.eigenvalues();
    basis.eigenvectors = solver.eigenvectors();

    const Eigen::Index p = basis.dim();
    const double lambda_max = p > 0 ? std::max(1.0, basis.eigenvalues(p - 1)) : 1.0;
    for (Eigen::Index k = 0; k < p; ++k) {
        double& lambda = basis.eigenvalues(k);
        if (lambda < 0.0) {
            if (lambda < -kNegativeEigenTolerance * lambda_max) {
                throw std::runtime_error("eigendecompose: eigenvalue " + std::to_string(lambda) +
                                         " is negative beyond roundoff");
            }
            lambda = 0.0;
        }
        auto u = basis.eigenvectors.col(k);
        Eigen::Index pivot = 0;
        for (Eigen::Index i = 1; i < p; ++i) {
            if (std::abs(u(i)) > std::abs(u(pivot))) pivot = i;
        }
        if (u(pivot) < 0.0) u = -u;
    }
    return basis;
}

Eigen::MatrixXd project(const SpectralBasis& basis, const Eigen::MatrixXd& x) {
    if (x.rows() != basis.dim()) {
        throw std::invalid_argument("project: data has " + std::to_string(x.rows()) + " rows, basis has dimension " +
                                    std::to_string(basis.dim()));
    }
    return basis.eigenvectors.transpose() * x;
}

SpectralBasis normalized(const SpectralBasis& basis) {
    SpectralBasis out = basis;
    const double top = basis.dim() > 0 ? basis.eigenvalues(basis.dim() - 1) : 0.0;
    if (!(top > 0.0)) throw std::invalid_argument("normalized: largest eigenvalue is not positive");
    out.eigenvalues /= top;
    return out;
}

}  // namespace scalenet
