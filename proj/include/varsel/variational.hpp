#ifndef VARSEL_VARIATIONAL_HPP
#define VARSEL_VARIATIONAL_HPP

// Pieces of the lower bound shared by the linear and logistic solvers.

#include "varsel/core.hpp"

#include <Eigen/Dense>

#include <vector>

namespace varsel {

/// Var[beta_i] under q: alpha (s2 + mu^2) - (alpha mu)^2, written so it stays
/// nonnegative in floating point.
Eigen::VectorXd coefficient_variance(const VariationalState &q);

/// The prior terms of the bound: minus the KL divergence of the spike-and-slab
/// factors from the prior, with slab variance slab_var (sigma^2 sa^2 for the
/// linear model, sa^2 for the logistic model). Uses 0 log 0 = 0.
double spike_slab_terms(const VariationalState &q, double slab_var,
                        const Eigen::VectorXd &logodds);

/// Log-odds (natural scale) of the coordinate update for alpha_i.
double inclusion_logit(double logodds10, double s2, double slab_var, double mu);

double max_abs_diff(const Eigen::VectorXd &a, const Eigen::VectorXd &b);

/// Alternating ascending / descending coordinate order for sweep k.
std::vector<Eigen::Index> sweep_order(Eigen::Index p, int sweep);

/// Settings shared by the inner coordinate-ascent loops.
struct InnerOptions {
    double tol = 1e-4;
    int maxiter = 10000;
    bool update_sigma = false;  // linear only
    bool update_sa = false;
    bool optimize_eta = true;   // logistic only
    double n0 = 0;
    double sa0 = 1;
    int refresh_every = 100;
    bool record_trace = false;
};

/// Prior-regularized M-step for the prior variance sa:
/// (n0 sa0 + sum alpha (s2 + mu^2) / sigma2) / (n0 + sum alpha).
/// Returns sa_current when there is no evidence (sum alpha = 0 and n0 = 0).
double em_update_sa(const VariationalState &q, double sigma2, double n0, double sa0,
                    double sa_current);

/// Log density (up to a constant) of the scaled prior on sa whose MAP is the
/// update above. Zero when n0 = 0.
double sa_log_prior(double sa2, double n0, double sa0);

}  // namespace varsel

#endif
