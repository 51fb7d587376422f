#include "varsel/outer.hpp"

#include "varsel/kernels.hpp"
#include "varsel/logistic_vb.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <random>

namespace varsel {

void validate_options(const FitOptions &opts) {
    if (!(opts.tol > 0)) throw ValidationError("tol must be positive");
    if (opts.maxiter < 1) throw ValidationError("maxiter must be at least 1");
    if (opts.nr < 1) throw ValidationError("nr must be at least 1");
    if (!(opts.n0 >= 0)) throw ValidationError("n0 must be nonnegative");
    if (!(opts.sa0 > 0)) throw ValidationError("sa0 must be positive");
}

namespace {

struct StageSetup {
    Eigen::VectorXd sigma_init;
    Eigen::VectorXd sa_init;
    std::vector<VariationalState> init;
};

GridFit run_stage(const Dataset &data, const LinearStats *lin, const HyperGrid &grid,
                  const InnerOptions &inner, const StageSetup &setup) {
    const Eigen::Index ns = grid.size();
    const Eigen::Index p = data.p();
    GridFit out;
    out.states.resize(static_cast<std::size_t>(ns));
    out.logw.resize(ns);
    out.sigma_hat.resize(ns);
    out.sa_hat.resize(ns);
    out.mu_cov.resize(data.m(), ns);
    out.converged.assign(static_cast<std::size_t>(ns), false);
    out.n_iter.assign(static_cast<std::size_t>(ns), 0);

    std::exception_ptr failure;
    std::mutex failure_mutex;
#pragma omp parallel for schedule(dynamic, 1)
    for (Eigen::Index j = 0; j < ns; ++j) {
        try {
            const auto js = static_cast<std::size_t>(j);
            const Eigen::VectorXd logodds = grid.logodds_column(j, p);
            InnerResult r;
            Eigen::VectorXd mu_cov;
            if (data.family == Family::gaussian) {
                r = fit_inner_linear(*lin, setup.sigma_init(j), setup.sa_init(j), logodds,
                                     setup.init[js], inner);
                mu_cov = linear_covariate_coefficients(data, *lin, r.state);
            } else {
                r = fit_inner_logistic(data, setup.sa_init(j), logodds, setup.init[js], inner);
                const LogisticStats st = compute_logistic_stats(data, r.state.eta);
                const Eigen::VectorXd Xr =
                    kernels::x_times(data.X, r.state.alpha.cwiseProduct(r.state.mu));
                mu_cov = logistic_covariate_mean(data, st, Xr);
            }
            if (!std::isfinite(r.logw))
                throw NumericalError("lower bound is not finite at grid point " +
                                     std::to_string(j + 1));
            out.logw(j) = r.logw;
            out.sigma_hat(j) = r.sigma2;
            out.sa_hat(j) = r.sa2;
            out.mu_cov.col(j) = mu_cov;
            out.converged[js] = r.converged;
            out.n_iter[js] = r.n_iter;
            out.states[js] = std::move(r.state);
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace

ModelFit fit(const Dataset &data, const HyperGrid &grid, const FitOptions &opts,
             FitReport *report) {
    validate_options(opts);
    const Eigen::Index ns = grid.size();
    const Eigen::Index p = data.p();
    if (ns < 1) throw ValidationError("hyperparameter grid is empty");
    if (grid.logodds.rows() != 1 && grid.logodds.rows() != p)
        throw ValidationError("logodds rows do not match the number of variables");
    const bool gaussian = data.family == Family::gaussian;

    InnerOptions inner;
    inner.tol = opts.tol;
    inner.maxiter = opts.maxiter;
    inner.update_sigma = gaussian && opts.update_sigma.value_or(!grid.sigma.has_value());
    inner.update_sa = opts.update_sa.value_or(!grid.sa.has_value());
    inner.optimize_eta = opts.optimize_eta;
    inner.n0 = opts.n0;
    inner.sa0 = opts.sa0;

    std::optional<LinearStats> lin;
    if (gaussian) lin = make_linear_stats(data);

    StageSetup setup;
    setup.sigma_init.resize(ns);
    setup.sa_init.resize(ns);
    double sigma_default = 1.0;
    if (gaussian) {
        sigma_default = lin->proj.yhat.squaredNorm() / static_cast<double>(data.n() - 1);
        if (!(sigma_default > 0)) sigma_default = 1.0;
    }
    for (Eigen::Index j = 0; j < ns; ++j) {
        setup.sigma_init(j) = gaussian && grid.sigma ? (*grid.sigma)(j) : sigma_default;
        setup.sa_init(j) = grid.sa ? (*grid.sa)(j) : 1.0;
        VariationalState q;
        q.alpha = grid.logodds_column(j, p).unaryExpr([](double lo) { return prior_prob(lo); });
        q.mu = Eigen::VectorXd::Zero(p);
        q.s2 = Eigen::VectorXd::Constant(p, setup.sigma_init(j) * setup.sa_init(j));
        if (!gaussian) q.eta = Eigen::VectorXd::Ones(data.n());
        setup.init.push_back(std::move(q));
    }

    GridFit result = run_stage(data, lin ? &*lin : nullptr, grid, inner, setup);
    if (opts.initialize_params) {
        Eigen::Index best = 0;
        result.logw.maxCoeff(&best);
        const auto bs = static_cast<std::size_t>(best);
        for (Eigen::Index j = 0; j < ns; ++j) {
            setup.init[static_cast<std::size_t>(j)] = result.states[bs];
            if (inner.update_sigma) setup.sigma_init(j) = result.sigma_hat(best);
            if (inner.update_sa) setup.sa_init(j) = result.sa_hat(best);
        }
        GridFit stage2 = run_stage(data, lin ? &*lin : nullptr, grid, inner, setup);
        if (report) {
            report->stage1 = std::move(result);
            report->stage1_best = best;
        }
        result = std::move(stage2);
    } else if (report) {
        report->stage1 = result;
        report->stage1_best.reset();
    }

    ModelFit out;
    out.family = data.family;
    out.dataset_digest = dataset_digest(data);
    out.grid = std::move(result);
    out.w = normalize_weights(out.grid.logw);
    const Eigen::MatrixXd alpha = out.grid.alpha_matrix();
    const Eigen::MatrixXd mu = out.grid.mu_matrix();
    out.pip = average_pips(alpha, out.w);
    out.beta_mean = posterior_mean_coefficients(alpha, mu, out.w);
    if (gaussian) {
        const Eigen::VectorXd col_var = column_variances(*lin);
        Eigen::MatrixXd pve(p, ns);
        for (Eigen::Index j = 0; j < ns; ++j)
            pve.col(j) = compute_pve(out.grid.states[static_cast<std::size_t>(j)], col_var,
                                     out.grid.sigma_hat(j));
        out.pve = std::move(pve);
        out.model_pve_samples = sample_model_pve(out, *lin, opts.nr, opts.seed);
    }
    return out;
}

Eigen::VectorXd normalize_weights(const Eigen::VectorXd &logw) {
    const double c = logw.maxCoeff();
    Eigen::VectorXd w = (logw.array() - c).exp().matrix();
    return w / w.sum();
}

Eigen::VectorXd average_pips(const Eigen::MatrixXd &alpha, const Eigen::VectorXd &w) {
    return alpha * w;
}

Eigen::VectorXd posterior_mean_coefficients(const Eigen::MatrixXd &alpha,
                                            const Eigen::MatrixXd &mu, const Eigen::VectorXd &w) {
    return alpha.cwiseProduct(mu) * w;
}

double prob_at_least_one(const Eigen::MatrixXd &alpha, const Eigen::VectorXd &w) {
    double total = 0;
    for (Eigen::Index j = 0; j < alpha.cols(); ++j) {
        const double none = (1.0 - alpha.col(j).array()).prod();
        total += w(j) * (1.0 - none);
    }
    return total;
}

double log_sum_exp(const Eigen::VectorXd &v) {
    const double c = v.maxCoeff();
    return c + std::log((v.array() - c).exp().sum());
}

double bayes_factor(const ModelFit &null_fit, const ModelFit &alt_fit) {
    if (null_fit.dataset_digest != alt_fit.dataset_digest)
        throw ValidationError("Bayes factor requires both fits to use the same dataset");
    const auto n_null = static_cast<double>(null_fit.grid.logw.size());
    const auto n_alt = static_cast<double>(alt_fit.grid.logw.size());
    return std::exp(log_sum_exp(alt_fit.grid.logw) - std::log(n_alt) -
                    log_sum_exp(null_fit.grid.logw) + std::log(n_null));
}

Eigen::VectorXd column_variances(const LinearStats &stats) {
    return stats.xtx_diag / static_cast<double>(stats.n() - 1);
}

Eigen::VectorXd compute_pve(const VariationalState &q, const Eigen::VectorXd &col_var,
                            double sigma2) {
    const Eigen::ArrayXd explained =
        col_var.array() * (q.mu.array().square() + q.s2.array());
    return (explained / (explained + sigma2)).matrix();
}

Eigen::VectorXd sample_model_pve(const ModelFit &fit, const LinearStats &stats, int nr,
                                 std::uint64_t seed) {
    const Eigen::MatrixXd &Xhat = stats.proj.Xhat;
    const Eigen::Index n = Xhat.rows();
    const Eigen::Index p = Xhat.cols();
    const std::vector<double> weights(fit.w.data(), fit.w.data() + fit.w.size());
    Eigen::VectorXd out(nr);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < nr; ++k) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(k)};
        std::mt19937_64 rng(seq);
        std::discrete_distribution<Eigen::Index> pick(weights.begin(), weights.end());
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::normal_distribution<double> normal(0.0, 1.0);
        const Eigen::Index j = pick(rng);
        const VariationalState &q = fit.grid.states[static_cast<std::size_t>(j)];
        Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < p; ++i) {
            if (unif(rng) < q.alpha(i)) {
                const double beta = q.mu(i) + std::sqrt(q.s2(i)) * normal(rng);
                z.noalias() += beta * Xhat.col(i);
            }
        }
        const double mean = z.mean();
        const double var = (z.array() - mean).square().sum() / static_cast<double>(n - 1);
        const double sigma2 = fit.grid.sigma_hat(j);
        out(k) = var / (var + sigma2);
    }
    return out;
}

}  // namespace varsel
