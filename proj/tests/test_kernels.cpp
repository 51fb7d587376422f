#include "support.hpp"
#include "varsel/kernels.hpp"

#include <doctest.h>

using namespace varsel;
namespace k = varsel::kernels;

namespace {

double rel_err(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

struct Fixture {
    std::mt19937_64 rng{11};
    // Not a multiple of the row block, so the ragged tail is exercised.
    Eigen::MatrixXd X = testing::normal_matrix(rng, 613, 37);
    Eigen::MatrixXd Z = testing::normal_matrix(rng, 613, 3);
    Eigen::VectorXd v = testing::normal_matrix(rng, 613, 1).col(0);
    Eigen::VectorXd d = testing::normal_matrix(rng, 613, 1).col(0).cwiseAbs();
    Eigen::VectorXd r = testing::normal_matrix(rng, 37, 1).col(0);
    Eigen::MatrixXd C = testing::normal_matrix(rng, 3, 37);
    Eigen::MatrixXd G = testing::normal_matrix(rng, 3, 613);
    Fixture() {
        r(4) = 0;
        r(20) = 0;
    }
};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE_FIXTURE(Fixture, "parallel kernels match the serial reference") {
    k::set_max_threads(4);
    CHECK(rel_err(k::xt_v(X, v), k::serial::xt_v(X, v)) < 1e-13);
    CHECK(rel_err(k::col_sumsq(X), k::serial::col_sumsq(X)) < 1e-13);
    CHECK(rel_err(k::col_weighted_sumsq(X, d), k::serial::col_weighted_sumsq(X, d)) < 1e-13);
    CHECK(rel_err(k::left_multiply(G, X), k::serial::left_multiply(G, X)) < 1e-13);
    CHECK(rel_err(k::x_times(X, r), k::serial::x_times(X, r)) < 1e-13);
    CHECK(rel_err(k::row_residual_variance(X, Z, C, d), k::serial::row_residual_variance(X, Z, C, d)) <
          1e-13);

    const auto a = k::residual_moments(X, Z, C, d, v);
    const auto b = k::serial::residual_moments(X, Z, C, d, v);
    CHECK(rel_err(a.resid_wss, b.resid_wss) < 1e-13);
    CHECK(rel_err(a.resid_dot, b.resid_dot) < 1e-13);
    CHECK(rel_err(a.raw_wss, b.raw_wss) < 1e-13);

    const Eigen::MatrixXd Q = Z.householderQr().householderQ() * Eigen::MatrixXd::Identity(613, 3);
    Eigen::MatrixXd P1 = X, P2 = X;
    k::project_out(P1, Q);
    k::serial::project_out(P2, Q);
    CHECK(rel_err(P1, P2) < 1e-12);
    CHECK((Q.transpose() * P1).cwiseAbs().maxCoeff() < 1e-10);
    k::set_max_threads(0);
}

TEST_CASE_FIXTURE(Fixture, "results do not depend on the thread count") {
    k::set_max_threads(1);
    const Eigen::VectorXd a1 = k::x_times(X, r);
    const Eigen::VectorXd b1 = k::row_residual_variance(X, Z, C, d);
    const auto m1 = k::residual_moments(X, Z, C, d, v);
    k::set_max_threads(3);
    CHECK(k::x_times(X, r) == a1);
    CHECK(k::row_residual_variance(X, Z, C, d) == b1);
    const auto m3 = k::residual_moments(X, Z, C, d, v);
    CHECK(m3.resid_wss == m1.resid_wss);
    CHECK(m3.resid_dot == m1.resid_dot);
    k::set_max_threads(0);
}

TEST_CASE("VARSEL_THREADS caps the worker count") {
    setenv("VARSEL_THREADS", "2", 1);
    k::configure_threads_from_env();
    CHECK(k::max_threads() == 2);
    setenv("VARSEL_THREADS", "junk", 1);
    k::configure_threads_from_env();
    CHECK(k::max_threads() >= 1);
    unsetenv("VARSEL_THREADS");
    k::set_max_threads(0);
}

}
