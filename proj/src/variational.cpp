#include "varsel/variational.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace varsel {

Eigen::VectorXd coefficient_variance(const VariationalState &q) {
    return (q.alpha.array() * q.s2.array() +
            q.alpha.array() * (1.0 - q.alpha.array()) * q.mu.array().square())
        .matrix();
}

namespace {

double xlogx_ratio(double a, double log_b) {
    return a > 0 ? a * (std::log(a) - log_b) : 0.0;
}

}  // namespace

double spike_slab_terms(const VariationalState &q, double slab_var,
                        const Eigen::VectorXd &logodds) {
    double total = 0;
    for (Eigen::Index i = 0; i < q.alpha.size(); ++i) {
        const double a = q.alpha(i);
        const double lo = logodds(i);
        total -= xlogx_ratio(a, log_prior_prob(lo));
        total -= xlogx_ratio(1.0 - a, log_prior_prob_compl(lo));
        if (a > 0) {
            const double s2 = q.s2(i);
            const double mu = q.mu(i);
            total += 0.5 * a * (1.0 + std::log(s2 / slab_var) - (s2 + mu * mu) / slab_var);
        }
    }
    return total;
}

double inclusion_logit(double logodds10, double s2, double slab_var, double mu) {
    return logodds10 * std::log(10.0) + 0.5 * std::log(s2 / slab_var) + mu * mu / (2.0 * s2);
}

double max_abs_diff(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

std::vector<Eigen::Index> sweep_order(Eigen::Index p, int sweep) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    if (sweep % 2 == 1) std::reverse(order.begin(), order.end());
    return order;
}

double em_update_sa(const VariationalState &q, double sigma2, double n0, double sa0,
                    double sa_current) {
    const double sum_alpha = q.alpha.sum();
    if (sum_alpha <= 0 && n0 <= 0) return sa_current;
    const double second_moment =
        (q.alpha.array() * (q.s2.array() + q.mu.array().square())).sum();
    return (n0 * sa0 + second_moment / sigma2) / (n0 + sum_alpha);
}

double sa_log_prior(double sa2, double n0, double sa0) {
    if (n0 <= 0) return 0.0;
    return -0.5 * n0 * std::log(sa2) - 0.5 * n0 * sa0 / sa2;
}

}  // namespace varsel
