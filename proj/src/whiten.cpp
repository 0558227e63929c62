#include "amc/whiten.hpp"

#include <cstdio>
#include <stdexcept>

#include <Eigen/Dense>

namespace amc {

Eigen::VectorXd WhiteningFilter::apply(const Eigen::VectorXd& s) const {
    if (s.size() != mean.size())
        throw std::invalid_argument("whiten: vector dimension mismatch");
    return Z * (s - mean);
}

Eigen::MatrixXd WhiteningFilter::apply_all(const Eigen::MatrixXd& s) const {
    if (s.rows() != mean.size())
        throw std::invalid_argument("whiten: matrix dimension mismatch");
    return Z * (s.colwise() - mean);
}

WhiteningFilter fit_zca(const Eigen::MatrixXd& columns, double epsilon_rel) {
    const Eigen::Index dim = columns.rows();
    const Eigen::Index n = columns.cols();
    if (n == 0) throw std::invalid_argument("fit_zca: empty training set");
    if (epsilon_rel <= 0.0) throw std::invalid_argument("fit_zca: epsilon must be > 0");
    if (n < dim)
        std::fprintf(stderr,
                     "fit_zca: warning: %lld vectors for %lld dimensions, covariance is "
                     "rank-deficient; relying on epsilon regularization\n",
                     static_cast<long long>(n), static_cast<long long>(dim));

    WhiteningFilter f;
    f.mean = columns.rowwise().mean();
    const Eigen::MatrixXd centered = columns.colwise() - f.mean;
    const Eigen::MatrixXd cov = (centered * centered.transpose()) / static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("fit_zca: eigendecomposition failed");

    // Clamp tiny negative eigenvalues from roundoff before regularizing.
    Eigen::VectorXd evals = eig.eigenvalues().cwiseMax(0.0);
    f.epsilon = epsilon_rel * evals.mean();
    const Eigen::VectorXd inv_sqrt = (evals.array() + f.epsilon).rsqrt();
    f.Z = eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
    return f;
}

WhiteningFilter fit_zca(const Dataset& train, double epsilon_rel) {
    return fit_zca(to_matrix(train), epsilon_rel);
}

} // namespace amc
