#ifndef VARSEL_TESTS_SUPPORT_HPP
#define VARSEL_TESTS_SUPPORT_HPP

// Random instances shared by the unit tests and the acceptance runner.

#include "varsel/core.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace varsel::testing {

inline Eigen::MatrixXd normal_matrix(std::mt19937_64 &rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = z(rng);
    return M;
}

/// Columns follow an AR(1) process with coefficient rho.
inline Eigen::MatrixXd correlated_design(std::mt19937_64 &rng, Eigen::Index n, Eigen::Index p,
                                         double rho) {
    Eigen::MatrixXd X = normal_matrix(rng, n, p);
    const double b = std::sqrt(1.0 - rho * rho);
    for (Eigen::Index j = 1; j < p; ++j) X.col(j) = rho * X.col(j - 1) + b * X.col(j);
    return X;
}

inline Eigen::VectorXd sparse_effects(std::mt19937_64 &rng, Eigen::Index p, Eigen::Index k,
                                      double scale) {
    std::normal_distribution<double> z(0.0, scale);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (Eigen::Index i = 0; i < std::min(k, p); ++i) beta(i * p / std::max<Eigen::Index>(k, 1)) = z(rng);
    return beta;
}

inline Dataset gaussian_instance(std::mt19937_64 &rng, Eigen::Index n, Eigen::Index p,
                                 double rho, Eigen::Index n_user_covariates = 0) {
    const Eigen::MatrixXd X = correlated_design(rng, n, p, rho);
    const Eigen::MatrixXd Z = normal_matrix(rng, n, n_user_covariates);
    const Eigen::VectorXd beta = sparse_effects(rng, p, 3, 1.0);
    Eigen::VectorXd y = X * beta + normal_matrix(rng, n, 1).col(0);
    if (n_user_covariates > 0) y += Z * Eigen::VectorXd::Constant(n_user_covariates, 0.5);
    return validate_dataset(X, Z, y, Family::gaussian);
}

inline Dataset binomial_instance(std::mt19937_64 &rng, Eigen::Index n, Eigen::Index p,
                                 double rho, double effect_scale = 1.0,
                                 Eigen::Index n_user_covariates = 0) {
    const Eigen::MatrixXd X = correlated_design(rng, n, p, rho);
    const Eigen::MatrixXd Z = normal_matrix(rng, n, n_user_covariates);
    const Eigen::VectorXd beta = sparse_effects(rng, p, 2, effect_scale);
    Eigen::VectorXd t = X * beta;
    if (n_user_covariates > 0) t += Z * Eigen::VectorXd::Constant(n_user_covariates, 0.3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = u(rng) < sigmoid(t(i) - 0.3) ? 1.0 : 0.0;
    // Keep both classes present.
    if (y.sum() == 0) y(0) = 1;
    if (y.sum() == static_cast<double>(n)) y(0) = 0;
    return validate_dataset(X, Z, y, Family::binomial);
}

inline VariationalState random_state(std::mt19937_64 &rng, Eigen::Index p, Eigen::Index n_eta) {
    std::uniform_real_distribution<double> u(0.01, 0.99);
    std::normal_distribution<double> z(0.0, 0.5);
    VariationalState q;
    q.alpha.resize(p);
    q.mu.resize(p);
    q.s2.resize(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        q.alpha(i) = u(rng);
        q.mu(i) = z(rng);
        q.s2(i) = 0.05 + u(rng);
    }
    if (n_eta > 0) {
        q.eta.resize(n_eta);
        for (Eigen::Index i = 0; i < n_eta; ++i) q.eta(i) = 0.2 + 2 * u(rng);
    }
    return q;
}

}  // namespace varsel::testing

#endif
