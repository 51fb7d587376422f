#ifndef VARSEL_OUTER_HPP
#define VARSEL_OUTER_HPP

#include "varsel/core.hpp"
#include "varsel/linear_vb.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

namespace varsel {

struct FitOptions {
    double tol = 1e-4;
    int maxiter = 10000;
    // Unset means: estimate exactly when the grid leaves the value out.
    std::optional<bool> update_sigma;
    std::optional<bool> update_sa;
    bool optimize_eta = true;
    bool initialize_params = true;
    double n0 = 10;
    double sa0 = 1;
    int nr = 1000;
    std::uint64_t seed = 1;
};

void validate_options(const FitOptions &opts);

/// Per-stage results, for callers that want to look at the first stage.
struct FitReport {
    GridFit stage1;
    std::optional<Eigen::Index> stage1_best;
};

/// Fits every grid point, optionally a second time starting from the best
/// first-stage solution, then averages over the grid.
ModelFit fit(const Dataset &data, const HyperGrid &grid, const FitOptions &opts,
             FitReport *report = nullptr);

/// w_j proportional to exp(logw_j), computed relative to max(logw).
Eigen::VectorXd normalize_weights(const Eigen::VectorXd &logw);

Eigen::VectorXd average_pips(const Eigen::MatrixXd &alpha, const Eigen::VectorXd &w);

Eigen::VectorXd posterior_mean_coefficients(const Eigen::MatrixXd &alpha,
                                            const Eigen::MatrixXd &mu, const Eigen::VectorXd &w);

/// Posterior probability that at least one variable is in the model.
double prob_at_least_one(const Eigen::MatrixXd &alpha, const Eigen::VectorXd &w);

double log_sum_exp(const Eigen::VectorXd &v);

/// Ratio of grid-averaged marginal likelihoods, alt over null. Both fits must
/// come from the same dataset.
double bayes_factor(const ModelFit &null_fit, const ModelFit &alt_fit);

/// Sample variance of every column of Xhat.
Eigen::VectorXd column_variances(const LinearStats &stats);

/// Proportion of variance explained by each variable given it is included:
/// v_i (mu_i^2 + s2_i) / (v_i (mu_i^2 + s2_i) + sigma2).
Eigen::VectorXd compute_pve(const VariationalState &q, const Eigen::VectorXd &col_var,
                            double sigma2);

/// Draws from the posterior of the model-wide PVE. Draw k uses its own
/// generator seeded from (seed, k), so output is independent of scheduling.
Eigen::VectorXd sample_model_pve(const ModelFit &fit, const LinearStats &stats, int nr,
                                 std::uint64_t seed);

}  // namespace varsel

#endif
