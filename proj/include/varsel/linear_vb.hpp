#ifndef VARSEL_LINEAR_VB_HPP
#define VARSEL_LINEAR_VB_HPP

#include "varsel/core.hpp"
#include "varsel/variational.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace varsel {

/// Result of integrating out the covariate coefficients under a flat prior.
/// Xhat and yhat are orthogonal to the columns of Z; Q and R are the thin QR
/// factors of Z, kept for recovering covariate coefficients.
struct CovariateProjection {
    Eigen::MatrixXd Xhat;
    Eigen::VectorXd yhat;
    double logdet_ZtZ = 0;
    Eigen::MatrixXd Q;
    Eigen::MatrixXd R;

    /// (Z^T Z)^{-1} Z^T v.
    Eigen::VectorXd coefficients(const Eigen::VectorXd &v) const;
};

/// Throws ValidationError naming the first column of Z that is linearly
/// dependent on the preceding ones. Columns of X lying in span(Z) come out
/// exactly zero.
CovariateProjection project_out_covariates(const Dataset &data);

/// Read-only statistics shared by every grid point of a linear fit.
struct LinearStats {
    CovariateProjection proj;
    Eigen::VectorXd xtx_diag;  // (Xhat^T Xhat)_ii
    Eigen::VectorXd xty;       // Xhat^T yhat

    Eigen::Index n() const { return proj.Xhat.rows(); }
    Eigen::Index p() const { return proj.Xhat.cols(); }
};

LinearStats make_linear_stats(const Dataset &data);

/// Lower bound f(Xhat, yhat, theta, phi) for the linear model. Xr must equal
/// Xhat (alpha .* mu). Does not include the -1/2 log|Z^T Z| covariate term.
double elbo_linear(const VariationalState &q, const Eigen::VectorXd &Xr,
                   const LinearStats &stats, double sigma2, double sa2,
                   const Eigen::VectorXd &logodds);

/// Coordinate-ascent update of (alpha_i, mu_i, s2_i); keeps Xr current.
void update_coordinate_linear(Eigen::Index i, VariationalState &q, Eigen::VectorXd &Xr,
                              const LinearStats &stats, double sigma2, double sa2,
                              double logodds_i);

void sweep_linear(VariationalState &q, Eigen::VectorXd &Xr, const LinearStats &stats,
                  double sigma2, double sa2, const Eigen::VectorXd &logodds,
                  std::span<const Eigen::Index> order);

/// M-step for the residual variance.
double em_update_sigma(const VariationalState &q, const Eigen::VectorXd &Xr,
                       const LinearStats &stats, double sa2);

struct InnerResult {
    VariationalState state;
    double logw = 0;     // bound on log p(y | X, Z, theta)
    double sigma2 = 1;
    double sa2 = 1;
    int n_iter = 0;
    bool converged = false;
    std::vector<double> trace;  // bound after every iteration, when requested
};

InnerResult fit_inner_linear(const LinearStats &stats, double sigma2, double sa2,
                             const Eigen::VectorXd &logodds, VariationalState init,
                             const InnerOptions &opts);

/// Fitted covariate coefficients (Z^T Z)^{-1} Z^T (y - X r) for the raw X.
Eigen::VectorXd linear_covariate_coefficients(const Dataset &data, const LinearStats &stats,
                                              const VariationalState &q);

}  // namespace varsel

#endif
