#include "support.hpp"
#include "varsel/linear_vb.hpp"
#include "varsel/variational.hpp"

#include <doctest.h>

#include <numeric>

using namespace varsel;

namespace {

VariationalState flat_state(Eigen::Index p, double alpha) {
    return {Eigen::VectorXd::Constant(p, alpha), Eigen::VectorXd::Zero(p),
            Eigen::VectorXd::Constant(p, 1.0), {}};
}

std::vector<Eigen::Index> iota(Eigen::Index p) {
    std::vector<Eigen::Index> v(static_cast<std::size_t>(p));
    std::iota(v.begin(), v.end(), Eigen::Index{0});
    return v;
}

}  // namespace

TEST_SUITE("linear") {

TEST_CASE("covariate projection") {
    std::mt19937_64 rng(21);
    Dataset d = testing::gaussian_instance(rng, 40, 6, 0.3, 2);
    d.X.col(5) = d.Z.col(2) * 3.0 - d.Z.col(0);  // lies in span(Z)
    const CovariateProjection proj = project_out_covariates(d);
    CHECK((d.Z.transpose() * proj.Xhat).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((d.Z.transpose() * proj.yhat).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(proj.Xhat.col(5).isZero());
    CHECK(proj.logdet_ZtZ == doctest::Approx(std::log((d.Z.transpose() * d.Z).determinant())));
    const Eigen::VectorXd c = proj.coefficients(d.y);
    CHECK((c - (d.Z.transpose() * d.Z).ldlt().solve(d.Z.transpose() * d.y)).norm() < 1e-10);

    Dataset bad = d;
    bad.Z.col(2) = bad.Z.col(1) * 2;
    CHECK_THROWS_AS(project_out_covariates(bad), ValidationError);
}

TEST_CASE("sweeps keep Xr current and never lower the bound") {
    std::mt19937_64 rng(22);
    const Dataset d = testing::gaussian_instance(rng, 80, 25, 0.6, 1);
    const LinearStats stats = make_linear_stats(d);
    VariationalState q = testing::random_state(rng, 25, 0);
    Eigen::VectorXd Xr = stats.proj.Xhat * q.alpha.cwiseProduct(q.mu);
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(25, -1.0);
    double prev = elbo_linear(q, Xr, stats, 1.2, 0.5, lo);
    for (int s = 0; s < 5; ++s) {
        const auto order = sweep_order(25, s);
        sweep_linear(q, Xr, stats, 1.2, 0.5, lo, order);
        const double now = elbo_linear(q, Xr, stats, 1.2, 0.5, lo);
        CHECK(now >= prev - 1e-10 * std::abs(prev));
        prev = now;
    }
    CHECK((Xr - stats.proj.Xhat * q.alpha.cwiseProduct(q.mu)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((q.alpha.array() >= 0).all());
    CHECK((q.alpha.array() <= 1).all());
    CHECK((coefficient_variance(q).array() >= 0).all());
}

TEST_CASE("sigma update maximizes the bound") {
    std::mt19937_64 rng(23);
    const Dataset d = testing::gaussian_instance(rng, 60, 10, 0.2);
    const LinearStats stats = make_linear_stats(d);
    const VariationalState q = testing::random_state(rng, 10, 0);
    const Eigen::VectorXd Xr = stats.proj.Xhat * q.alpha.cwiseProduct(q.mu);
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(10, -1.0);
    const double s = em_update_sigma(q, Xr, stats, 0.7);
    REQUIRE(s > 0);
    const double f = elbo_linear(q, Xr, stats, s, 0.7, lo);
    CHECK(f >= elbo_linear(q, Xr, stats, s * 1.01, 0.7, lo));
    CHECK(f >= elbo_linear(q, Xr, stats, s * 0.99, 0.7, lo));
}

TEST_CASE("sa update without evidence keeps the current value") {
    VariationalState q = flat_state(4, 0.0);
    CHECK(em_update_sa(q, 1.0, 0.0, 1.0, 0.37) == 0.37);
    CHECK(em_update_sa(q, 1.0, 10.0, 2.0, 0.37) == doctest::Approx(2.0));
    CHECK(sa_log_prior(0.5, 0.0, 1.0) == 0.0);
}

TEST_CASE("adding a constant to a column does not change the fit") {
    std::mt19937_64 rng(24);
    Dataset d = testing::gaussian_instance(rng, 100, 12, 0.4);
    InnerOptions opts;
    opts.tol = 1e-8;
    opts.update_sigma = true;
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(12, -1.5);
    const auto a = fit_inner_linear(make_linear_stats(d), 1, 1, lo, flat_state(12, 0.1), opts);
    d.X.array().rowwise() += Eigen::RowVectorXd::LinSpaced(12, 5, 500).array();
    const auto b = fit_inner_linear(make_linear_stats(d), 1, 1, lo, flat_state(12, 0.1), opts);
    CHECK(a.logw == doctest::Approx(b.logw).epsilon(1e-9));
    CHECK(max_abs_diff(a.state.alpha, b.state.alpha) < 1e-8);
}

TEST_CASE("fit_inner_linear recovers strong effects") {
    std::mt19937_64 rng(25);
    const Dataset d = testing::gaussian_instance(rng, 300, 30, 0.0);
    InnerOptions opts;
    opts.update_sigma = true;
    opts.update_sa = true;
    opts.record_trace = true;
    const auto r = fit_inner_linear(make_linear_stats(d), 1, 1, Eigen::VectorXd::Constant(30, -1.0),
                                    flat_state(30, 0.1), opts);
    CHECK(r.converged);
    CHECK(r.trace.size() == static_cast<std::size_t>(r.n_iter) + 1);  // plus the starting bound
    // sparse_effects places the three effects at 0, 10 and 20.
    int hits = 0;
    for (Eigen::Index i : {0, 10, 20}) hits += r.state.alpha(i) > 0.5;
    CHECK(hits >= 2);
    const Eigen::VectorXd cov = linear_covariate_coefficients(d, make_linear_stats(d), r.state);
    CHECK(cov.size() == 1);
}

TEST_CASE("inclusion logit at the symmetric point") {
    // pi = 1/2, mu = 0 and s2 equal to the slab variance give alpha = 1/2.
    CHECK(inclusion_logit(0.0, 0.7, 0.7, 0.0) == 0.0);
    CHECK(sigmoid(inclusion_logit(0.0, 0.7, 0.7, 0.0)) == 0.5);
}

TEST_CASE("sweep order alternates") {
    const auto up = sweep_order(4, 0);
    const auto down = sweep_order(4, 1);
    CHECK(up == iota(4));
    CHECK(std::vector<Eigen::Index>(down.rbegin(), down.rend()) == iota(4));
}

}
