#include "varsel/linear_vb.hpp"

#include "varsel/kernels.hpp"

#include <cmath>
#include <numbers>

namespace varsel {

Eigen::VectorXd CovariateProjection::coefficients(const Eigen::VectorXd &v) const {
    return R.triangularView<Eigen::Upper>().solve(Q.transpose() * v);
}

CovariateProjection project_out_covariates(const Dataset &data) {
    const Eigen::Index n = data.n();
    const Eigen::Index m = data.m();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(data.Z);
    CovariateProjection proj;
    proj.R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < m; ++k) {
        const double scale = data.Z.col(k).norm();
        if (!(std::abs(proj.R(k, k)) > 1e-10 * std::max(scale, 1e-300))) {
            if (k == 0) throw ValidationError("intercept column of Z is degenerate");
            throw ValidationError("covariate column " + std::to_string(k) +
                                  " is linearly dependent on the intercept and earlier covariates");
        }
        proj.logdet_ZtZ += 2.0 * std::log(std::abs(proj.R(k, k)));
    }
    proj.Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);

    proj.Xhat = data.X;
    kernels::project_out(proj.Xhat, proj.Q);
    const Eigen::VectorXd raw_norm2 = kernels::col_sumsq(data.X);
    const Eigen::VectorXd hat_norm2 = kernels::col_sumsq(proj.Xhat);
    for (Eigen::Index j = 0; j < proj.Xhat.cols(); ++j)
        if (hat_norm2(j) <= 1e-20 * raw_norm2(j)) proj.Xhat.col(j).setZero();

    proj.yhat = data.y - proj.Q * (proj.Q.transpose() * data.y);
    return proj;
}

LinearStats make_linear_stats(const Dataset &data) {
    LinearStats stats;
    stats.proj = project_out_covariates(data);
    stats.xtx_diag = kernels::col_sumsq(stats.proj.Xhat);
    stats.xty = kernels::xt_v(stats.proj.Xhat, stats.proj.yhat);
    return stats;
}

double elbo_linear(const VariationalState &q, const Eigen::VectorXd &Xr,
                   const LinearStats &stats, double sigma2, double sa2,
                   const Eigen::VectorXd &logodds) {
    const double n = static_cast<double>(stats.n());
    const double resid = (stats.proj.yhat - Xr).squaredNorm();
    const double var_term = stats.xtx_diag.dot(coefficient_variance(q));
    return -0.5 * n * std::log(2.0 * std::numbers::pi * sigma2) - resid / (2.0 * sigma2) -
           var_term / (2.0 * sigma2) + spike_slab_terms(q, sigma2 * sa2, logodds);
}

void update_coordinate_linear(Eigen::Index i, VariationalState &q, Eigen::VectorXd &Xr,
                              const LinearStats &stats, double sigma2, double sa2,
                              double logodds_i) {
    const double xx = stats.xtx_diag(i);
    const double s2 = sigma2 / (xx + 1.0 / sa2);
    q.s2(i) = s2;
    if (xx <= 0) {
        // Column carries no information once covariates are removed.
        q.alpha(i) = prior_prob(logodds_i);
        q.mu(i) = 0;
        return;
    }
    const auto x = stats.proj.Xhat.col(i);
    const double r_old = q.alpha(i) * q.mu(i);
    const double mu = s2 / sigma2 * (stats.xty(i) - x.dot(Xr) + xx * r_old);
    const double alpha = sigmoid(inclusion_logit(logodds_i, s2, sigma2 * sa2, mu));
    q.mu(i) = mu;
    q.alpha(i) = alpha;
    const double delta = alpha * mu - r_old;
    if (delta != 0.0) Xr.noalias() += delta * x;
}

void sweep_linear(VariationalState &q, Eigen::VectorXd &Xr, const LinearStats &stats,
                  double sigma2, double sa2, const Eigen::VectorXd &logodds,
                  std::span<const Eigen::Index> order) {
    for (const Eigen::Index i : order)
        update_coordinate_linear(i, q, Xr, stats, sigma2, sa2, logodds(i));
}

double em_update_sigma(const VariationalState &q, const Eigen::VectorXd &Xr,
                       const LinearStats &stats, double sa2) {
    const double n = static_cast<double>(stats.n());
    const double resid = (stats.proj.yhat - Xr).squaredNorm();
    const double var_term = stats.xtx_diag.dot(coefficient_variance(q));
    const double slab = (q.alpha.array() * (q.s2.array() + q.mu.array().square())).sum() / sa2;
    return (resid + var_term + slab) / (n + q.alpha.sum());
}

InnerResult fit_inner_linear(const LinearStats &stats, double sigma2, double sa2,
                             const Eigen::VectorXd &logodds, VariationalState init,
                             const InnerOptions &opts) {
    InnerResult out;
    out.state = std::move(init);
    VariationalState &q = out.state;
    const Eigen::Index p = stats.p();
    Eigen::VectorXd Xr = kernels::x_times(stats.proj.Xhat, q.alpha.cwiseProduct(q.mu));

    const auto objective = [&] {
        double f = elbo_linear(q, Xr, stats, sigma2, sa2, logodds);
        if (opts.update_sa) f += sa_log_prior(sa2, opts.n0, opts.sa0);
        return f;
    };
    if (opts.record_trace) out.trace.push_back(objective());

    for (int iter = 0; iter < opts.maxiter; ++iter) {
        const Eigen::VectorXd alpha_old = q.alpha;
        const auto order = sweep_order(p, iter);
        sweep_linear(q, Xr, stats, sigma2, sa2, logodds, order);
        if (opts.update_sigma) sigma2 = em_update_sigma(q, Xr, stats, sa2);
        if (opts.update_sa) sa2 = em_update_sa(q, sigma2, opts.n0, opts.sa0, sa2);
        if ((iter + 1) % opts.refresh_every == 0)
            Xr = kernels::x_times(stats.proj.Xhat, q.alpha.cwiseProduct(q.mu));
        if (opts.record_trace) out.trace.push_back(objective());
        out.n_iter = iter + 1;
        if (max_abs_diff(q.alpha, alpha_old) < opts.tol) {
            out.converged = true;
            break;
        }
    }
    out.sigma2 = sigma2;
    out.sa2 = sa2;
    out.logw = elbo_linear(q, Xr, stats, sigma2, sa2, logodds) - 0.5 * stats.proj.logdet_ZtZ;
    return out;
}

Eigen::VectorXd linear_covariate_coefficients(const Dataset &data, const LinearStats &stats,
                                              const VariationalState &q) {
    const Eigen::VectorXd fitted = kernels::x_times(data.X, q.alpha.cwiseProduct(q.mu));
    return stats.proj.coefficients(data.y - fitted);
}

}  // namespace varsel
