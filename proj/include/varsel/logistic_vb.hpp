#ifndef VARSEL_LOGISTIC_VB_HPP
#define VARSEL_LOGISTIC_VB_HPP

// Logistic regression through a quadratic lower bound on log sigmoid. Each
// observation gets its own bound parameter eta_i, after which the covariate
// coefficients are integrated out analytically and the candidate variables
// are fitted by the same coordinate ascent as the linear model (sigma^2 = 1).

#include "varsel/core.hpp"
#include "varsel/linear_vb.hpp"
#include "varsel/variational.hpp"

#include <Eigen/Dense>

#include <span>

namespace varsel {

/// (sigmoid(eta) - 1/2) / eta, with the limit 1/4 below |eta| = 1e-8.
double sigmoid_slope(double eta);

/// log sigmoid(eta) + (x - eta)/2 - d (x^2 - eta^2)/2 <= log sigmoid(x).
double sigmoid_bound(double x, double eta);

/// How diag(X^T Dhat X) is evaluated, where Dhat = D - D Z (Z^T D Z)^{-1} Z^T D.
/// `stable` sums d_i (x_ij - z_i^T c_j)^2 over the weighted residuals of
/// each column. `naive` expands it as diag(X^T D X) minus the covariate
/// correction, which cancels badly when columns sit far from zero. The
/// naive path exists only so tests can contrast the two.
enum class XdxMethod { stable, naive };

/// Quantities of the bound that depend on eta but not on the variational
/// factors of the candidate variables.
struct LogisticStats {
    Eigen::VectorXd d;          // slopes d_i
    Eigen::MatrixXd L;          // lower Cholesky factor of Z^T D Z
    Eigen::MatrixXd Sigma_hat;  // (Z^T D Z)^{-1}
    Eigen::VectorXd u_hat;      // Sigma_hat Z^T (y - 1/2)
    Eigen::VectorXd yhat;       // (y - 1/2) - D Z u_hat, orthogonal to Z
    Eigen::MatrixXd C;          // Sigma_hat Z^T D X, m x p
    Eigen::VectorXd xdx;        // diag(X^T Dhat X)
    Eigen::VectorXd xdy;        // X^T yhat
    double logdet_Sigma_hat = 0;
    double u_quad = 0;          // u_hat^T Sigma_hat^{-1} u_hat
    double eta_terms = 0;       // sum log sigmoid(eta) + eta (d eta - 1) / 2
};

LogisticStats compute_logistic_stats(const Dataset &data, const Eigen::VectorXd &eta,
                                     XdxMethod method = XdxMethod::stable);

/// v - Z Sigma_hat Z^T D v: the part of v that the covariates cannot absorb.
Eigen::VectorXd weighted_residual(const Dataset &data, const LogisticStats &stats,
                                  const Eigen::VectorXd &v);

/// Running products for one inner fit. Xr = X (alpha .* mu) and resid is its
/// weighted residual. The bound only needs resid, which stays small even
/// when the columns of X carry large offsets.
struct LogisticWork {
    Eigen::VectorXd Xr;
    Eigen::VectorXd resid;
    Eigen::VectorXd xhat;  // scratch column
};

LogisticWork make_logistic_work(const Dataset &data, const LogisticStats &stats,
                                const VariationalState &q);

/// Re-residualizes work.resid after the stats (and so D) changed.
void reproject(LogisticWork &work, const Dataset &data, const LogisticStats &stats);

/// Right-hand side of the logistic lower bound, including the covariate
/// terms; the matched log|Sigma_0| constants of the flat prior are dropped.
double elbo_logistic(const VariationalState &q, const LogisticWork &work,
                     const LogisticStats &stats, double sa2, const Eigen::VectorXd &logodds);

void update_coordinate_logistic(Eigen::Index i, VariationalState &q, LogisticWork &work,
                                const Dataset &data, const LogisticStats &stats, double sa2,
                                double logodds_i);

void sweep_logistic(VariationalState &q, LogisticWork &work, const Dataset &data,
                    const LogisticStats &stats, double sa2, const Eigen::VectorXd &logodds,
                    std::span<const Eigen::Index> order);

/// E[u] = Sigma_hat Z^T (y - 1/2 - D X r).
Eigen::VectorXd logistic_covariate_mean(const Dataset &data, const LogisticStats &stats,
                                        const Eigen::VectorXd &Xr);

/// M-step for eta given the current factors. Stats must be recomputed and
/// the work reprojected by the caller afterwards.
Eigen::VectorXd update_eta(const VariationalState &q, const LogisticWork &work,
                           const Dataset &data, const LogisticStats &stats);

InnerResult fit_inner_logistic(const Dataset &data, double sa2, const Eigen::VectorXd &logodds,
                               VariationalState init, const InnerOptions &opts,
                               XdxMethod method = XdxMethod::stable);

}  // namespace varsel

#endif
