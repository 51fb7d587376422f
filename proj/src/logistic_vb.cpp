#include "varsel/logistic_vb.hpp"

#include "varsel/kernels.hpp"

#include <cmath>

namespace varsel {

double sigmoid_slope(double eta) {
    eta = std::abs(eta);
    if (eta < 1e-8) return 0.25;
    // sigmoid(eta) - 1/2 = tanh(eta/2) / 2, which avoids cancellation near 0.
    return std::tanh(0.5 * eta) / (2.0 * eta);
}

double sigmoid_bound(double x, double eta) {
    const double d = sigmoid_slope(eta);
    return log_sigmoid(eta) + 0.5 * (x - eta) - 0.5 * d * (x * x - eta * eta);
}

LogisticStats compute_logistic_stats(const Dataset &data, const Eigen::VectorXd &eta,
                                     XdxMethod method) {
    const Eigen::Index n = data.n();
    const Eigen::MatrixXd &Z = data.Z;
    LogisticStats st;
    st.d.resize(n);
    st.eta_terms = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = std::abs(eta(i));
        st.d(i) = sigmoid_slope(e);
        st.eta_terms += log_sigmoid(e) + 0.5 * e * (st.d(i) * e - 1.0);
    }

    const Eigen::MatrixXd DZ = st.d.asDiagonal() * Z;
    const Eigen::MatrixXd ZtDZ = Z.transpose() * DZ;
    Eigen::LLT<Eigen::MatrixXd> llt(ZtDZ);
    if (llt.info() != Eigen::Success) throw NumericalError("Z^T D Z is not positive definite");
    st.L = llt.matrixL();
    for (Eigen::Index k = 0; k < st.L.rows(); ++k) {
        if (!(st.L(k, k) > 0)) throw NumericalError("Z^T D Z is singular");
        st.logdet_Sigma_hat -= 2.0 * std::log(st.L(k, k));
    }
    const Eigen::Index m = Z.cols();
    st.Sigma_hat = llt.solve(Eigen::MatrixXd::Identity(m, m));

    const Eigen::VectorXd yc = data.y.array() - 0.5;
    const Eigen::VectorXd Zty = Z.transpose() * yc;
    st.u_hat = llt.solve(Zty);
    st.u_quad = st.L.triangularView<Eigen::Lower>().solve(Zty).squaredNorm();
    st.yhat = yc - DZ * st.u_hat;

    const Eigen::MatrixXd A = kernels::left_multiply(DZ.transpose(), data.X);
    st.C = llt.solve(A);
    const kernels::ResidualMoments mom =
        kernels::residual_moments(data.X, Z, st.C, st.d, st.yhat);
    if (method == XdxMethod::stable)
        st.xdx = mom.resid_wss;
    else
        st.xdx = mom.raw_wss - (A.array() * st.C.array()).colwise().sum().transpose().matrix();
    // Columns inside span(Z) carry no information; clear their rounding residue.
    for (Eigen::Index j = 0; j < st.xdx.size(); ++j)
        if (st.xdx(j) <= 1e-10 * mom.raw_wss(j)) st.xdx(j) = 0;
    st.xdy = mom.resid_dot;
    return st;
}

Eigen::VectorXd weighted_residual(const Dataset &data, const LogisticStats &stats,
                                  const Eigen::VectorXd &v) {
    const Eigen::VectorXd coef = stats.Sigma_hat * (data.Z.transpose() * stats.d.cwiseProduct(v));
    return v - data.Z * coef;
}

LogisticWork make_logistic_work(const Dataset &data, const LogisticStats &stats,
                                const VariationalState &q) {
    LogisticWork w;
    w.Xr = kernels::x_times(data.X, q.alpha.cwiseProduct(q.mu));
    w.resid = weighted_residual(data, stats, w.Xr);
    w.xhat.resize(data.n());
    return w;
}

void reproject(LogisticWork &work, const Dataset &data, const LogisticStats &stats) {
    // resid differs from Xr by something in span(Z), which the new
    // projection removes, so there is no need to go back to Xr.
    work.resid = weighted_residual(data, stats, work.resid);
}

double elbo_logistic(const VariationalState &q, const LogisticWork &work,
                     const LogisticStats &stats, double sa2, const Eigen::VectorXd &logodds) {
    // y^T X r = yhat^T resid and r^T X^T Dhat X r = resid^T D resid.
    const double quad = (stats.d.array() * work.resid.array().square()).sum();
    return 0.5 * stats.logdet_Sigma_hat + 0.5 * stats.u_quad + stats.eta_terms +
           stats.yhat.dot(work.resid) - 0.5 * quad -
           0.5 * stats.xdx.dot(coefficient_variance(q)) + spike_slab_terms(q, sa2, logodds);
}

void update_coordinate_logistic(Eigen::Index i, VariationalState &q, LogisticWork &work,
                                const Dataset &data, const LogisticStats &stats, double sa2,
                                double logodds_i) {
    const double xdx = stats.xdx(i);
    const double s2 = 1.0 / (xdx + 1.0 / sa2);
    const double r_old = q.alpha(i) * q.mu(i);
    work.xhat.noalias() = data.X.col(i) - data.Z * stats.C.col(i);
    q.s2(i) = s2;
    if (xdx <= 0) {
        q.alpha(i) = prior_prob(logodds_i);
        q.mu(i) = 0;
    } else {
        const double cross =
            (work.xhat.array() * stats.d.array() * work.resid.array()).sum() - xdx * r_old;
        const double mu = s2 * (stats.xdy(i) - cross);
        q.mu(i) = mu;
        q.alpha(i) = sigmoid(inclusion_logit(logodds_i, s2, sa2, mu));
    }
    const double delta = q.alpha(i) * q.mu(i) - r_old;
    if (delta != 0.0) {
        work.Xr.noalias() += delta * data.X.col(i);
        work.resid.noalias() += delta * work.xhat;
    }
}

void sweep_logistic(VariationalState &q, LogisticWork &work, const Dataset &data,
                    const LogisticStats &stats, double sa2, const Eigen::VectorXd &logodds,
                    std::span<const Eigen::Index> order) {
    for (const Eigen::Index i : order)
        update_coordinate_logistic(i, q, work, data, stats, sa2, logodds(i));
}

Eigen::VectorXd logistic_covariate_mean(const Dataset &data, const LogisticStats &stats,
                                        const Eigen::VectorXd &Xr) {
    const Eigen::VectorXd target =
        (data.y.array() - 0.5 - stats.d.array() * Xr.array()).matrix();
    return stats.Sigma_hat * (data.Z.transpose() * target);
}

Eigen::VectorXd update_eta(const VariationalState &q, const LogisticWork &work,
                           const Dataset &data, const LogisticStats &stats) {
    // E[Z u + X beta] = Z u_hat + resid.
    const Eigen::VectorXd mean = data.Z * stats.u_hat + work.resid;

    // z_i^T Sigma_hat z_i = |L^{-1} z_i|^2
    const Eigen::MatrixXd LZ = stats.L.triangularView<Eigen::Lower>().solve(data.Z.transpose());
    const Eigen::VectorXd zsz = LZ.colwise().squaredNorm().transpose();

    // The terms involving Var[beta] collapse to sum_j Var[beta_j] (x_ij - z_i^T c_j)^2.
    const Eigen::VectorXd resid_var =
        kernels::row_residual_variance(data.X, data.Z, stats.C, coefficient_variance(q));

    Eigen::VectorXd eta(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        double e2 = mean(i) * mean(i) + zsz(i) + resid_var(i);
        if (e2 < 0) {
            if (e2 < -1e-12) throw NumericalError("negative radicand in the eta update");
            e2 = 0;
        }
        eta(i) = std::sqrt(e2);
    }
    return eta;
}

InnerResult fit_inner_logistic(const Dataset &data, double sa2, const Eigen::VectorXd &logodds,
                               VariationalState init, const InnerOptions &opts,
                               XdxMethod method) {
    InnerResult out;
    out.sigma2 = 1.0;
    out.state = std::move(init);
    VariationalState &q = out.state;
    if (q.eta.size() != data.n()) q.eta = Eigen::VectorXd::Ones(data.n());
    q.eta = q.eta.cwiseAbs();

    LogisticStats stats = compute_logistic_stats(data, q.eta, method);
    LogisticWork work = make_logistic_work(data, stats, q);

    const auto objective = [&] {
        double f = elbo_logistic(q, work, stats, sa2, logodds);
        if (opts.update_sa) f += sa_log_prior(sa2, opts.n0, opts.sa0);
        return f;
    };
    if (opts.record_trace) out.trace.push_back(objective());

    for (int iter = 0; iter < opts.maxiter; ++iter) {
        const Eigen::VectorXd alpha_old = q.alpha;
        const auto order = sweep_order(data.p(), iter);
        sweep_logistic(q, work, data, stats, sa2, logodds, order);
        if ((iter + 1) % opts.refresh_every == 0) work = make_logistic_work(data, stats, q);
        if (opts.optimize_eta) {
            q.eta = update_eta(q, work, data, stats);
            stats = compute_logistic_stats(data, q.eta, method);
            reproject(work, data, stats);
        }
        if (opts.update_sa) sa2 = em_update_sa(q, 1.0, opts.n0, opts.sa0, sa2);
        if (opts.record_trace) out.trace.push_back(objective());
        out.n_iter = iter + 1;
        if (max_abs_diff(q.alpha, alpha_old) < opts.tol) {
            out.converged = true;
            break;
        }
    }
    out.sa2 = sa2;
    out.logw = elbo_logistic(q, work, stats, sa2, logodds);
    return out;
}

}  // namespace varsel
