#include "varsel/oracle.hpp"

#include "varsel/linear_vb.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace varsel::oracle {

ExactLinear exact_posterior_linear(const Dataset &data, double sigma2, double sa2,
                                   const Eigen::VectorXd &logodds) {
    const Eigen::Index p = data.p();
    if (p > kMaxEnumeratedVariables)
        throw ValidationError("exact enumeration is limited to " +
                              std::to_string(kMaxEnumeratedVariables) + " variables");
    const CovariateProjection proj = project_out_covariates(data);
    const Eigen::MatrixXd gram = proj.Xhat.transpose() * proj.Xhat;
    const Eigen::VectorXd xty = proj.Xhat.transpose() * proj.yhat;
    const double yy = proj.yhat.squaredNorm();
    const double n = static_cast<double>(data.n());
    const double base = -0.5 * n * std::log(2.0 * std::numbers::pi * sigma2);

    Eigen::VectorXd log_pi(p), log_1mpi(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double lo = logodds.size() == 1 ? logodds(0) : logodds(i);
        log_pi(i) = log_prior_prob(lo);
        log_1mpi(i) = log_prior_prob_compl(lo);
    }

    const long npatterns = 1L << p;
    std::vector<double> logpost(static_cast<std::size_t>(npatterns));
#pragma omp parallel for schedule(static)
    for (long mask = 0; mask < npatterns; ++mask) {
        std::vector<Eigen::Index> idx;
        double lp = 0;
        for (Eigen::Index i = 0; i < p; ++i) {
            if (mask & (1L << i)) {
                idx.push_back(i);
                lp += log_pi(i);
            } else {
                lp += log_1mpi(i);
            }
        }
        const auto k = static_cast<Eigen::Index>(idx.size());
        double logml = base - yy / (2.0 * sigma2);
        if (k > 0) {
            Eigen::MatrixXd M(k, k);
            Eigen::VectorXd b(k);
            for (Eigen::Index a = 0; a < k; ++a) {
                b(a) = xty(idx[a]);
                for (Eigen::Index c = 0; c < k; ++c) M(a, c) = gram(idx[a], idx[c]);
                M(a, a) += 1.0 / sa2;
            }
            const Eigen::LLT<Eigen::MatrixXd> llt(M);
            const Eigen::MatrixXd L = llt.matrixL();
            // log det(I + sa2 X^T X) = k log sa2 + log det(X^T X + I / sa2)
            const double logdet =
                static_cast<double>(k) * std::log(sa2) + 2.0 * L.diagonal().array().log().sum();
            const double quad = yy - b.dot(llt.solve(b));
            logml = base - 0.5 * logdet - quad / (2.0 * sigma2);
        }
        logpost[static_cast<std::size_t>(mask)] = lp + logml;
    }

    double c = -std::numeric_limits<double>::infinity();
    for (const double v : logpost) c = std::max(c, v);
    double total = 0;
    Eigen::VectorXd pip_mass = Eigen::VectorXd::Zero(p);
    for (long mask = 0; mask < npatterns; ++mask) {
        const double wgt = std::exp(logpost[static_cast<std::size_t>(mask)] - c);
        total += wgt;
        for (Eigen::Index i = 0; i < p; ++i)
            if (mask & (1L << i)) pip_mass(i) += wgt;
    }
    ExactLinear out;
    out.pip = pip_mass / total;
    out.log_evidence = c + std::log(total) - 0.5 * proj.logdet_ZtZ;
    return out;
}

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kQuadTol = 1e-10;
// Integrands are log-concave and scaled to unit curvature at their mode, so
// +-40 standard deviations loses nothing representable.
constexpr double kHalfWidth = 40.0;
constexpr unsigned kQuadDepth = 15;

double bernoulli_loglik(const Eigen::VectorXd &x, const Eigen::VectorXd &y, double u, double b) {
    double ll = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double t = u + b * x(i);
        ll += y(i) > 0.5 ? log_sigmoid(t) : log_sigmoid(-t);
    }
    return ll;
}

// Newton's method for the intercept mode given b; returns (mode, curvature).
std::pair<double, double> intercept_mode(const Eigen::VectorXd &x, const Eigen::VectorXd &y,
                                         double b, double u = 0) {
    double h = 0;
    for (int it = 0; it < 200; ++it) {
        double g = 0;
        h = 0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double s = sigmoid(u + b * x(i));
            g += y(i) - s;
            h += s * (1.0 - s);
        }
        const double step = g / h;
        u += std::clamp(step, -5.0, 5.0);
        if (std::abs(step) < 1e-12) break;
    }
    h = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double s = sigmoid(u + b * x(i));
        h += s * (1.0 - s);
    }
    return {u, h};
}

// log of the integral over the intercept of exp(loglik(u, b)).
double log_intercept_integral(const Eigen::VectorXd &x, const Eigen::VectorXd &y, double b) {
    const auto [mode, curv] = intercept_mode(x, y, b);
    const double sd = 1.0 / std::sqrt(curv);
    const double peak = bernoulli_loglik(x, y, mode, b);
    const auto f = [&](double z) {
        return std::exp(bernoulli_loglik(x, y, mode + sd * z, b) - peak);
    };
    const double I =
        gauss_kronrod<double, 61>::integrate(f, -kHalfWidth, kHalfWidth, kQuadDepth, kQuadTol);
    return peak + std::log(sd * I);
}

}  // namespace

double exact_posterior_logistic_1d(const Dataset &data, double sa2, double logodds) {
    if (data.p() != 1) throw ValidationError("logistic oracle requires exactly one variable");
    if (data.m() != 1) throw ValidationError("logistic oracle supports the intercept only");
    const Eigen::VectorXd x = data.X.col(0);
    const Eigen::VectorXd &y = data.y;

    const double log_m0 = log_intercept_integral(x, y, 0.0);

    // g(b) = log N(b; 0, sa2) + log of the intercept integral at b.
    const auto g = [&](double b) {
        return -0.5 * std::log(2.0 * std::numbers::pi * sa2) - b * b / (2.0 * sa2) +
               log_intercept_integral(x, y, b);
    };

    // Joint Newton iterations locate the mode of the slope; the curvature of
    // the profile sets the quadrature scale.
    double b = 0;
    for (int it = 0; it < 100; ++it) {
        const auto [u, hu] = intercept_mode(x, y, b);
        double gb = -b / sa2, hbb = 1.0 / sa2, hub = 0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double s = sigmoid(u + b * x(i));
            gb += (y(i) - s) * x(i);
            hbb += s * (1.0 - s) * x(i) * x(i);
            hub += s * (1.0 - s) * x(i);
        }
        const double h_profile = hbb - hub * hub / hu;
        const double step = gb / h_profile;
        b += std::clamp(step, -2.0, 2.0);
        if (std::abs(step) < 1e-10) break;
    }
    double h_profile = 1.0 / sa2;
    {
        const auto [u, hu] = intercept_mode(x, y, b);
        double hbb = 1.0 / sa2, hub = 0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double s = sigmoid(u + b * x(i));
            hbb += s * (1.0 - s) * x(i) * x(i);
            hub += s * (1.0 - s) * x(i);
        }
        h_profile = hbb - hub * hub / hu;
    }
    const double sd = 1.0 / std::sqrt(h_profile);
    const double peak = g(b);
    const auto f = [&](double z) { return std::exp(g(b + sd * z) - peak); };
    const double I =
        gauss_kronrod<double, 61>::integrate(f, -kHalfWidth, kHalfWidth, kQuadDepth, kQuadTol);
    const double log_m1 = peak + std::log(sd * I);

    const double logit = logodds * std::log(10.0) + log_m1 - log_m0;
    return sigmoid(logit);
}

}  // namespace varsel::oracle
