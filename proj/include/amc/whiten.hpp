#ifndef AMC_WHITEN_HPP
#define AMC_WHITEN_HPP

#include <Eigen/Core>

#include "amc/dataset.hpp"

namespace amc {

// ZCA transform fitted on the training set and applied to every vector
// before it enters the network: x = Z * (s - mean).
struct WhiteningFilter {
    Eigen::MatrixXd Z;    // symmetric, dim x dim
    Eigen::VectorXd mean; // dim
    double epsilon = 0.0; // absolute eigenvalue regularizer actually used

    int dim() const { return static_cast<int>(mean.size()); }

    Eigen::VectorXd apply(const Eigen::VectorXd& s) const;
    // Columns are vectors.
    Eigen::MatrixXd apply_all(const Eigen::MatrixXd& s) const;
};

// Z = E * (D + eps*I)^(-1/2) * E^T from the eigendecomposition of the
// sample covariance (1/N normalization) of mean-centered columns.
// epsilon_rel is relative to the mean eigenvalue. Fewer columns than rows
// is allowed (rank deficiency is absorbed by epsilon) but warned about on
// stderr.
WhiteningFilter fit_zca(const Eigen::MatrixXd& columns, double epsilon_rel = 1e-5);
WhiteningFilter fit_zca(const Dataset& train, double epsilon_rel = 1e-5);

} // namespace amc

#endif // AMC_WHITEN_HPP
