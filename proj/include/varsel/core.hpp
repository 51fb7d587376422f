#ifndef VARSEL_CORE_HPP
#define VARSEL_CORE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace varsel {

// Error categories map one-to-one onto CLI exit codes (1, 2, 3).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Family { gaussian, binomial };

std::string to_string(Family f);
Family family_from_string(const std::string &s);

struct Dataset {
    Eigen::MatrixXd X;   // n x p candidate variables
    Eigen::MatrixXd Z;   // n x m covariates, column 0 is the intercept
    Eigen::VectorXd y;
    Family family = Family::gaussian;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }
    Eigen::Index m() const { return Z.cols(); }
};

/// Checks shapes and values and prepends the intercept column to the
/// user covariates. Z_user may have zero columns (or be empty).
Dataset validate_dataset(Eigen::MatrixXd X, const Eigen::MatrixXd &Z_user,
                         Eigen::VectorXd y, Family family);

/// SHA-256 over the shapes, family and raw bytes of X, Z and y (hex string).
std::string dataset_digest(const Dataset &data);

/// Same, but over X and Z only (used to recognise the training design).
std::string design_digest(const Dataset &data);

/// Grid of hyperparameter settings. Absent sigma/sa means "estimate per grid
/// point". logodds is base-10 prior log-odds with either one row (shared by
/// all variables) or p rows (one per variable); columns index grid points.
struct HyperGrid {
    std::optional<Eigen::VectorXd> sigma;
    std::optional<Eigen::VectorXd> sa;
    Eigen::MatrixXd logodds;

    Eigen::Index size() const { return logodds.cols(); }
    bool exchangeable() const { return logodds.rows() == 1; }
    double logodds_at(Eigen::Index i, Eigen::Index j) const {
        return logodds(exchangeable() ? 0 : i, j);
    }
    /// Per-variable log-odds for grid point j, expanded to length p.
    Eigen::VectorXd logodds_column(Eigen::Index j, Eigen::Index p) const;
};

/// Broadcasts length-1 sigma/sa to the grid size and checks every invariant
/// against the dataset (p rows for a per-variable logodds matrix).
HyperGrid make_grid(const Dataset &data, std::optional<Eigen::VectorXd> sigma,
                    std::optional<Eigen::VectorXd> sa, Eigen::MatrixXd logodds);

struct VariationalState {
    Eigen::VectorXd alpha;
    Eigen::VectorXd mu;
    Eigen::VectorXd s2;
    Eigen::VectorXd eta;   // binomial only; empty otherwise
};

struct GridFit {
    std::vector<VariationalState> states;
    Eigen::VectorXd logw;
    Eigen::VectorXd sigma_hat;
    Eigen::VectorXd sa_hat;
    Eigen::MatrixXd mu_cov;   // m x n_s
    std::vector<bool> converged;
    std::vector<int> n_iter;

    Eigen::Index size() const { return logw.size(); }
    Eigen::MatrixXd alpha_matrix() const;
    Eigen::MatrixXd mu_matrix() const;
    Eigen::MatrixXd s2_matrix() const;
};

struct ModelFit {
    Family family = Family::gaussian;
    std::string dataset_digest;
    GridFit grid;
    Eigen::VectorXd w;
    Eigen::VectorXd pip;
    Eigen::VectorXd beta_mean;
    std::optional<Eigen::MatrixXd> pve;              // p x n_s, gaussian only
    std::optional<Eigen::VectorXd> model_pve_samples;  // gaussian only
};

/// Twenty evenly spaced base-10 log-odds from -log10(p) up to -1.
std::vector<double> default_logodds(Eigen::Index p);

/// Inclusive arithmetic sequence lo, lo+step, ..., hi.
std::vector<double> parse_grid_spec(double lo, double hi, double step);

/// Parses "LO:HI:STEP".
std::vector<double> parse_grid_spec(const std::string &spec);

/// Locale-independent parse of a whole token as a double.
std::optional<double> parse_number(std::string_view text);

// Prior inclusion probability helpers on the base-10 log-odds scale.
double prior_prob(double logodds10);
double log_prior_prob(double logodds10);        // log(pi)
double log_prior_prob_compl(double logodds10);  // log(1 - pi)

double sigmoid(double x);
double log_sigmoid(double x);

}  // namespace varsel

#endif
