#include "support.hpp"
#include "varsel/core.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace varsel;

TEST_SUITE("core") {

TEST_CASE("family names") {
    CHECK(family_from_string("gaussian") == Family::gaussian);
    CHECK(family_from_string("binomial") == Family::binomial);
    CHECK(to_string(Family::binomial) == "binomial");
    CHECK_THROWS_AS(family_from_string("poisson"), UsageError);
}

TEST_CASE("validate_dataset prepends the intercept") {
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd X = testing::normal_matrix(rng, 10, 3);
    const Eigen::MatrixXd Z = testing::normal_matrix(rng, 10, 2);
    const Eigen::VectorXd y = testing::normal_matrix(rng, 10, 1).col(0);
    const Dataset d = validate_dataset(X, Z, y, Family::gaussian);
    REQUIRE(d.m() == 3);
    CHECK(d.Z.col(0).isOnes());
    CHECK(d.Z.rightCols(2) == Z);
    CHECK(validate_dataset(X, Eigen::MatrixXd(), y, Family::gaussian).m() == 1);
}

TEST_CASE("validate_dataset rejects bad input") {
    std::mt19937_64 rng(2);
    const Eigen::MatrixXd X = testing::normal_matrix(rng, 10, 3);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(10);
    CHECK_THROWS_AS(validate_dataset(X, Eigen::MatrixXd(), Eigen::VectorXd::Zero(9), Family::gaussian),
                    ValidationError);
    CHECK_THROWS_AS(validate_dataset(X, testing::normal_matrix(rng, 9, 1), y, Family::gaussian),
                    ValidationError);
    y(3) = 2;
    CHECK_THROWS_AS(validate_dataset(X, Eigen::MatrixXd(), y, Family::binomial), ValidationError);
    Eigen::MatrixXd Xnan = X;
    Xnan(4, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(validate_dataset(Xnan, Eigen::MatrixXd(), Eigen::VectorXd::Zero(10), Family::gaussian),
                    ValidationError);
    CHECK_THROWS_AS(validate_dataset(X.topRows(1), Eigen::MatrixXd(), Eigen::VectorXd::Zero(1),
                                     Family::gaussian),
                    ValidationError);
}

TEST_CASE("digests") {
    std::mt19937_64 rng(3);
    Dataset a = testing::gaussian_instance(rng, 20, 5, 0.0);
    Dataset b = a;
    CHECK(dataset_digest(a).size() == 64);
    CHECK(dataset_digest(a) == dataset_digest(b));
    b.y(0) += 1;
    CHECK(dataset_digest(a) != dataset_digest(b));
    CHECK(design_digest(a) == design_digest(b));
    b.X(0, 0) += 1;
    CHECK(design_digest(a) != design_digest(b));
}

TEST_CASE("grid specifications") {
    const auto g = parse_grid_spec("-3:-1:0.5");
    REQUIRE(g.size() == 5);
    CHECK(g.front() == -3.0);
    CHECK(g.back() == -1.0);
    CHECK(parse_grid_spec("2") == std::vector<double>{2.0});
    CHECK_THROWS_AS(parse_grid_spec("-1:-3:1"), UsageError);
    CHECK_THROWS_AS(parse_grid_spec("0:1:0.3"), UsageError);
    CHECK_THROWS_AS(parse_grid_spec("0:1:0"), UsageError);
    CHECK_THROWS_AS(parse_grid_spec("a:b:c"), UsageError);
    CHECK_THROWS_AS(parse_grid_spec("0:1"), UsageError);
}

TEST_CASE("parse_number") {
    CHECK(parse_number("1e-3").value() == doctest::Approx(1e-3));
    CHECK(parse_number(" -2.5\r").value() == -2.5);
    CHECK(parse_number("+4").value() == 4.0);
    CHECK_FALSE(parse_number("1.5x"));
    CHECK_FALSE(parse_number(""));
    CHECK_FALSE(parse_number("abc"));
}

TEST_CASE("default log-odds grid") {
    const auto g = default_logodds(1000);
    REQUIRE(g.size() == 20);
    CHECK(g.front() == doctest::Approx(-3));
    CHECK(g.back() == -1.0);
    for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] >= g[k - 1]);
    // Too few variables for a proper range: everything collapses onto -1.
    for (double v : default_logodds(5)) CHECK(v == doctest::Approx(-1));
}

TEST_CASE("make_grid") {
    std::mt19937_64 rng(4);
    const Dataset d = testing::gaussian_instance(rng, 20, 4, 0.0);
    Eigen::MatrixXd lo(1, 3);
    lo << -2, -1.5, -1;
    const HyperGrid g = make_grid(d, Eigen::VectorXd::Constant(1, 1.0), std::nullopt, lo);
    CHECK(g.size() == 3);
    REQUIRE(g.sigma);
    CHECK(g.sigma->size() == 3);
    CHECK(g.exchangeable());
    CHECK(g.logodds_column(1, 4).isConstant(-1.5));
    CHECK_THROWS_AS(make_grid(d, Eigen::VectorXd::Constant(1, -1.0), std::nullopt, lo), ValidationError);
    CHECK_THROWS_AS(make_grid(d, std::nullopt, std::nullopt, Eigen::MatrixXd(3, 3).setZero()),
                    ValidationError);

    std::mt19937_64 rng2(5);
    const Dataset b = testing::binomial_instance(rng2, 20, 4, 0.0);
    CHECK_THROWS_AS(make_grid(b, Eigen::VectorXd::Constant(1, 1.0), std::nullopt, lo), ValidationError);
}

TEST_CASE("prior and sigmoid helpers") {
    CHECK(prior_prob(0) == doctest::Approx(0.5));
    CHECK(prior_prob(-1) == doctest::Approx(1.0 / 11));
    CHECK(std::exp(log_prior_prob(-2)) == doctest::Approx(prior_prob(-2)));
    CHECK(std::exp(log_prior_prob_compl(-2)) == doctest::Approx(1 - prior_prob(-2)));
    CHECK(sigmoid(0) == 0.5);
    CHECK(log_sigmoid(-800) == doctest::Approx(-800));
    CHECK(log_sigmoid(800) == doctest::Approx(0.0));
    CHECK(std::isfinite(log_sigmoid(-1e5)));
}

}
