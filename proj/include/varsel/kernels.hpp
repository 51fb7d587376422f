#ifndef VARSEL_KERNELS_HPP
#define VARSEL_KERNELS_HPP

// Data-parallel O(np) building blocks shared by the solvers.
//
// The functions in varsel::kernels are OpenMP-parallel. Every output entry is
// produced by a single thread in a fixed order, so results do not depend on
// the thread count. varsel::kernels::serial holds plain-loop reference
// versions used by the tests and the benchmark.

#include <Eigen/Dense>

namespace varsel::kernels {

/// X^T v.
Eigen::VectorXd xt_v(const Eigen::MatrixXd &X, const Eigen::VectorXd &v);

/// Column sums of squares, sum_k x_kj^2.
Eigen::VectorXd col_sumsq(const Eigen::MatrixXd &X);

/// Weighted column sums of squares, sum_k d_k x_kj^2.
Eigen::VectorXd col_weighted_sumsq(const Eigen::MatrixXd &X, const Eigen::VectorXd &d);

/// G X for a short-and-wide G (m x n), computed one column of X at a time.
Eigen::MatrixXd left_multiply(const Eigen::MatrixXd &G, const Eigen::MatrixXd &X);

/// X r, accumulated row block by row block; zero entries of r are skipped.
Eigen::VectorXd x_times(const Eigen::MatrixXd &X, const Eigen::VectorXd &r);

/// In place X <- X - Q (Q^T X) for Q with orthonormal columns.
void project_out(Eigen::MatrixXd &X, const Eigen::MatrixXd &Q);

/// Row-wise sum_j v_j (x_ij - z_i^T c_j)^2 for Z (n x m) and C (m x p).
Eigen::VectorXd row_residual_variance(const Eigen::MatrixXd &X, const Eigen::MatrixXd &Z,
                                      const Eigen::MatrixXd &C, const Eigen::VectorXd &v);

/// Per-column moments of the residuals xhat_j = x_j - Z c_j:
/// weighted sum of squares sum_i d_i xhat_ij^2, inner product sum_i v_i xhat_ij,
/// and the raw weighted sum of squares sum_i d_i x_ij^2.
struct ResidualMoments {
    Eigen::VectorXd resid_wss;
    Eigen::VectorXd resid_dot;
    Eigen::VectorXd raw_wss;
};

ResidualMoments residual_moments(const Eigen::MatrixXd &X, const Eigen::MatrixXd &Z,
                                 const Eigen::MatrixXd &C, const Eigen::VectorXd &d,
                                 const Eigen::VectorXd &v);

/// Caps the worker count; 0 restores the runtime default.
void set_max_threads(int n);

/// Reads VARSEL_THREADS (0 or unset means all available) and applies it.
void configure_threads_from_env();

int max_threads();

namespace serial {

Eigen::VectorXd xt_v(const Eigen::MatrixXd &X, const Eigen::VectorXd &v);
Eigen::VectorXd col_sumsq(const Eigen::MatrixXd &X);
Eigen::VectorXd col_weighted_sumsq(const Eigen::MatrixXd &X, const Eigen::VectorXd &d);
Eigen::MatrixXd left_multiply(const Eigen::MatrixXd &G, const Eigen::MatrixXd &X);
Eigen::VectorXd x_times(const Eigen::MatrixXd &X, const Eigen::VectorXd &r);
void project_out(Eigen::MatrixXd &X, const Eigen::MatrixXd &Q);
Eigen::VectorXd row_residual_variance(const Eigen::MatrixXd &X, const Eigen::MatrixXd &Z,
                                      const Eigen::MatrixXd &C, const Eigen::VectorXd &v);
ResidualMoments residual_moments(const Eigen::MatrixXd &X, const Eigen::MatrixXd &Z,
                                 const Eigen::MatrixXd &C, const Eigen::VectorXd &d,
                                 const Eigen::VectorXd &v);

}  // namespace serial

}  // namespace varsel::kernels

#endif
