#ifndef VARSEL_PREDICT_HPP
#define VARSEL_PREDICT_HPP

#include "varsel/core.hpp"

#include <Eigen/Dense>

namespace varsel {

/// Grid-averaged linear predictor sum_j w_j (Z mu_cov_j + X (alpha_j .* mu_j)).
/// Z_user excludes the intercept, which is inserted here.
Eigen::VectorXd predict_linear(const ModelFit &fit, const Eigen::MatrixXd &X,
                               const Eigen::MatrixXd &Z_user);

struct BinaryPrediction {
    Eigen::VectorXd prob;
    Eigen::VectorXi label;  // 1 iff prob > 0.5
};

/// Averages the per-grid-point probabilities (not the logits).
BinaryPrediction predict_logistic(const ModelFit &fit, const Eigen::MatrixXd &X,
                                  const Eigen::MatrixXd &Z_user);

}  // namespace varsel

#endif
