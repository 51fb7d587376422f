#include "varsel/predict.hpp"

#include "varsel/kernels.hpp"

namespace varsel {

namespace {

Eigen::MatrixXd with_intercept(const ModelFit &fit, const Eigen::MatrixXd &X,
                               const Eigen::MatrixXd &Z_user) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = fit.pip.size();
    const Eigen::Index m = fit.grid.mu_cov.rows();
    const Eigen::Index m_user = Z_user.cols();
    if (X.cols() != p)
        throw ValidationError("X has " + std::to_string(X.cols()) + " columns, model expects " +
                              std::to_string(p));
    if (m_user != m - 1)
        throw ValidationError("Z has " + std::to_string(m_user) + " columns, model expects " +
                              std::to_string(m - 1));
    if (m_user > 0 && Z_user.rows() != n)
        throw ValidationError("X and Z have different numbers of rows");
    Eigen::MatrixXd Z(n, m);
    Z.col(0).setOnes();
    if (m_user > 0) Z.rightCols(m_user) = Z_user;
    return Z;
}

Eigen::VectorXd linear_predictor(const ModelFit &fit, const Eigen::MatrixXd &X,
                                 const Eigen::MatrixXd &Z, Eigen::Index j) {
    const VariationalState &q = fit.grid.states[static_cast<std::size_t>(j)];
    return Z * fit.grid.mu_cov.col(j) + kernels::x_times(X, q.alpha.cwiseProduct(q.mu));
}

}  // namespace

Eigen::VectorXd predict_linear(const ModelFit &fit, const Eigen::MatrixXd &X,
                               const Eigen::MatrixXd &Z_user) {
    const Eigen::MatrixXd Z = with_intercept(fit, X, Z_user);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
    for (Eigen::Index j = 0; j < fit.w.size(); ++j)
        out += fit.w(j) * linear_predictor(fit, X, Z, j);
    return out;
}

BinaryPrediction predict_logistic(const ModelFit &fit, const Eigen::MatrixXd &X,
                                  const Eigen::MatrixXd &Z_user) {
    const Eigen::MatrixXd Z = with_intercept(fit, X, Z_user);
    BinaryPrediction out;
    out.prob = Eigen::VectorXd::Zero(X.rows());
    for (Eigen::Index j = 0; j < fit.w.size(); ++j)
        out.prob += fit.w(j) * linear_predictor(fit, X, Z, j).unaryExpr([](double t) { return sigmoid(t); });
    out.prob = out.prob.cwiseMax(0.0).cwiseMin(1.0);
    out.label = (out.prob.array() > 0.5).cast<int>().matrix();
    return out;
}

}  // namespace varsel
