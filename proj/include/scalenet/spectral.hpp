#pragma once

#include <Eigen/Dense>

namespace scalenet {

struct CovarianceMatrix {
    Eigen::MatrixXd matrix;
    Eigen::Index n_samples = 0;
};

/// Eigenbasis of a sample covariance. Columns of `eigenvectors` are
/// orthonormal; `eigenvalues` are ascending and non-negative.
struct SpectralBasis {
    Eigen::MatrixXd eigenvectors;
    Eigen::VectorXd eigenvalues;

    Eigen::Index dim() const { return eigenvalues.size(); }
};

/// (1/n) X X^T for a row-centred p x n matrix, symmetrised.
CovarianceMatrix covariance(const Eigen::MatrixXd& x);

/// Dense symmetric eigendecomposition. Eigenvalues within roundoff below
/// zero are clamped to 0; each eigenvector is signed so that its entry of
/// largest magnitude (first one on ties) is positive.
SpectralBasis eigendecompose(const CovarianceMatrix& cov);

/// Dual-space coordinates U^T X.
Eigen::MatrixXd project(const SpectralBasis& basis, const Eigen::MatrixXd& x);

/// Copy of `basis` with eigenvalues divided by the largest one.
SpectralBasis normalized(const SpectralBasis& basis);

}  // namespace scalenet
