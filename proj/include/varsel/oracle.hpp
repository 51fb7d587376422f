#ifndef VARSEL_ORACLE_HPP
#define VARSEL_ORACLE_HPP

// Brute-force posterior calculators. These are independent of the
// variational solvers and exist to check them.

#include "varsel/core.hpp"

#include <Eigen/Dense>

namespace varsel::oracle {

struct ExactLinear {
    Eigen::VectorXd pip;
    double log_evidence = 0;  // includes the -1/2 log|Z^T Z| covariate term
};

constexpr Eigen::Index kMaxEnumeratedVariables = 15;

/// Sums over all 2^p inclusion patterns. logodds has length p (or 1).
ExactLinear exact_posterior_linear(const Dataset &data, double sigma2, double sa2,
                                   const Eigen::VectorXd &logodds);

/// Posterior inclusion probability of the single variable of a logistic
/// model with an intercept (flat prior) and slab variance sa2, by nested
/// adaptive Gauss-Kronrod quadrature.
double exact_posterior_logistic_1d(const Dataset &data, double sa2, double logodds);

}  // namespace varsel::oracle

#endif
