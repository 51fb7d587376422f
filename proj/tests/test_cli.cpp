#include "scratch_dir.hpp"
#include "support.hpp"
#include "varsel/cli.hpp"
#include "varsel/io.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace varsel;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string &text) {
    std::vector<std::string> v;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

// Simulates and fits a small gaussian data set once per scratch directory.
struct Fitted {
    testing::ScratchDir dir;
    Run fit_run;
    Fitted() {
        REQUIRE(run({"simulate", "--n", "200", "--p", "30", "--n-causal", "3", "--pve", "0.5", "--seed",
                     "3", "--out-prefix", dir / "sim"})
                    .code == exit_ok);
        fit_run = run({"fit", "--x", dir / "sim_X.csv", "--y", dir / "sim_y.csv", "--out",
                       dir / "fit.varsel", "--nv", "4", "--nr", "100"});
    }
};

FitArchive null_archive(Family family, Eigen::VectorXd logw) {
    FitArchive a;
    const Eigen::Index ns = logw.size();
    a.fit.family = family;
    a.fit.dataset_digest = "d";
    for (Eigen::Index j = 0; j < ns; ++j)
        a.fit.grid.states.push_back({Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2),
                                     Eigen::VectorXd::Ones(2),
                                     family == Family::binomial ? Eigen::VectorXd::Ones(3) : Eigen::VectorXd()});
    a.fit.grid.logw = logw;
    a.fit.grid.sigma_hat = Eigen::VectorXd::Ones(ns);
    a.fit.grid.sa_hat = Eigen::VectorXd::Ones(ns);
    a.fit.grid.mu_cov = Eigen::MatrixXd::Zero(1, ns);
    a.fit.grid.converged.assign(static_cast<std::size_t>(ns), true);
    a.fit.grid.n_iter.assign(static_cast<std::size_t>(ns), 1);
    a.fit.w = Eigen::VectorXd::Constant(ns, 1.0 / static_cast<double>(ns));
    a.fit.pip = Eigen::VectorXd::Zero(2);
    a.fit.beta_mean = Eigen::VectorXd::Zero(2);
    a.grid.logodds = Eigen::MatrixXd::Constant(1, ns, -1.0);
    a.n = 3;
    a.m = 1;
    a.variable_names = {"a", "b"};
    a.options_json = "{}";
    return a;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 1") {
    CHECK(run({}).code == exit_usage);
    CHECK(run({"frobnicate"}).code == exit_usage);
    CHECK(run({"fit", "--x", "a.csv"}).code == exit_usage);
    CHECK(run({"fit", "--x", "a", "--y", "b", "--logodds", "-1", "--logodds-file", "c"}).code == exit_usage);
    CHECK(run({"simulate", "--out-prefix", "x", "--effects", "odd"}).code == exit_usage);
    CHECK(run({"--help"}).code == exit_ok);
}

TEST_CASE("data errors exit with 2") {
    testing::ScratchDir dir;
    const Run r = run({"fit", "--x", dir / "nope.csv", "--y", dir / "nope.csv"});
    CHECK(r.code == exit_data);
    CHECK(r.err.rfind("error: ", 0) == 0);
    CHECK(run({"summary", dir / "nope.varsel"}).code == exit_data);
    write_file(dir / "junk.varsel", "not an archive");
    CHECK(run({"summary", dir / "junk.varsel"}).code == exit_data);
}

TEST_CASE("number formatting") {
    CHECK(format_bayes_factor(1.0) == "1.000e+00");
    CHECK(format_bayes_factor(935500.0) == "9.355e+05");
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("cutoff counts and credible sets") {
    Eigen::VectorXd pip(5);
    pip << 0.05, 0.2, 0.6, 0.92, 0.99;
    CHECK(cutoff_counts(pip) == std::array<int, 6>{4, 3, 3, 2, 2, 1});
    Eigen::VectorXd w(4);
    w << 0.1, 0.6, 0.25, 0.05;
    const auto set = credible_set(w, 0.8);
    CHECK(set.size() == 2);
    CHECK(credible_set(w, 0.5).size() == 1);
}

TEST_CASE("fit, summary, predict and plot-data") {
    Fitted f;
    REQUIRE(f.fit_run.code == exit_ok);
    const auto fit_lines = lines(f.fit_run.out);
    CHECK(fit_lines.front() == "Summary of fitted Bayesian variable selection model:");

    const Run s = run({"summary", f.dir / "fit.varsel", "--nv", "2"});
    REQUIRE(s.code == exit_ok);
    const auto sl = lines(s.out);
    const auto top = std::find(sl.begin(), sl.end(), "Top 2 variables by inclusion probability:");
    REQUIRE(top != sl.end());
    CHECK(sl.end() - top == 4);  // title, column header, two rows
    CHECK(s.out.find("Selected variables by probability cutoff:") != std::string::npos);

    const Run p = run({"predict", f.dir / "fit.varsel", "--x", f.dir / "sim_X.csv"});
    CHECK(p.code == exit_ok);
    CHECK(lines(p.out).size() == 200);
    CHECK(p.err.find("note: predicting on the training data") != std::string::npos);

    std::string header;
    for (int j = 1; j <= 30; ++j) header += (j > 1 ? ",X" : "X") + std::to_string(j);
    write_file(f.dir / "empty.csv", header + "\n");
    const Run empty = run({"predict", f.dir / "fit.varsel", "--x", f.dir / "empty.csv"});
    CHECK(empty.code == exit_ok);
    CHECK(empty.out.empty());

    write_file(f.dir / "groups.csv", "variable,group\nX1,chr10\nX2,chr2\nX3,chr1\nX16,chr2\n");
    const Run pd = run({"plot-data", f.dir / "fit.varsel", "--groups", f.dir / "groups.csv", "--vars",
                        "X16,X1"});
    REQUIRE(pd.code == exit_ok);
    const auto pl = lines(pd.out);
    REQUIRE(pl.size() == 31);
    CHECK(pl[0] == "index,name,group,pip,beta_mean,highlight");
    CHECK(pl[1].rfind("3,X3,chr1,", 0) == 0);
    CHECK(pl[2].rfind("2,X2,chr2,", 0) == 0);
    CHECK(pl[3].rfind("16,X16,chr2,", 0) == 0);
    CHECK(pl[3].back() == '1');
    CHECK(pl[4].rfind("1,X1,chr10,", 0) == 0);
    CHECK(pl[4].back() == '1');
    CHECK(pl[5].rfind("4,X4,NA,", 0) == 0);
    CHECK(pl[5].back() == '0');

    CHECK(run({"plot-data", f.dir / "fit.varsel", "--vars", "nope"}).code == exit_data);
    write_file(f.dir / "badgroups.csv", "X1,a\nX99,b\n");
    CHECK(run({"plot-data", f.dir / "fit.varsel", "--groups", f.dir / "badgroups.csv"}).code == exit_data);

    const Run bf = run({"bf", f.dir / "fit.varsel", f.dir / "fit.varsel"});
    CHECK(bf.code == exit_ok);
    CHECK(bf.out == "1.000e+00\n");
}

TEST_CASE("bayes factor of shifted bounds") {
    testing::ScratchDir dir;
    Eigen::VectorXd logw(3);
    logw << -10, -11, -12;
    save_archive(null_archive(Family::gaussian, logw), dir / "null.varsel");
    save_archive(null_archive(Family::gaussian, logw.array() + std::log(2.0)), dir / "alt.varsel");
    const Run r = run({"bf", dir / "null.varsel", dir / "alt.varsel"});
    CHECK(r.code == exit_ok);
    CHECK(r.out == "2.000e+00\n");

    FitArchive other = null_archive(Family::gaussian, logw);
    other.fit.dataset_digest = "e";
    save_archive(other, dir / "other.varsel");
    CHECK(run({"bf", dir / "null.varsel", dir / "other.varsel"}).code == exit_data);
}

TEST_CASE("logistic model without effects predicts one half") {
    testing::ScratchDir dir;
    save_archive(null_archive(Family::binomial, Eigen::VectorXd::Zero(1)), dir / "m.varsel");
    write_file(dir / "x.csv", "a,b\n1,2\n-3,4\n");
    const Run r = run({"predict", dir / "m.varsel", "--x", dir / "x.csv"});
    CHECK(r.code == exit_ok);
    CHECK(r.out == "0.5,0\n0.5,0\n");
    write_file(dir / "wide.csv", "a,b,c\n1,2,3\n");
    CHECK(run({"predict", dir / "m.varsel", "--x", dir / "wide.csv"}).code == exit_data);
}

TEST_CASE("simulation") {
    SimulationSpec spec;
    spec.n = 4000;
    spec.p = 100;
    spec.n_causal = 10;
    spec.pve = 0.3;
    spec.seed = 9;
    const SimulatedData a = simulate(spec);
    const SimulatedData b = simulate(spec);
    CHECK(a.X == b.X);
    CHECK(a.y == b.y);
    REQUIRE(a.causal.size() == 10);
    CHECK(std::is_sorted(a.causal.begin(), a.causal.end()));

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(100);
    for (std::size_t k = 0; k < a.causal.size(); ++k) beta(a.causal[k]) = a.effects(static_cast<Eigen::Index>(k));
    const Eigen::VectorXd g = a.X * beta;
    auto var = [](const Eigen::VectorXd &v) { return (v.array() - v.mean()).square().mean(); };
    CHECK(std::abs(var(g) / var(a.y) - 0.3) < 0.05);

    spec.seed = 10;
    CHECK(simulate(spec).y != a.y);

    spec.family = Family::binomial;
    const SimulatedData c = simulate(spec);
    CHECK((c.y.array() * (1 - c.y.array()) == 0).all());
    CHECK(c.y.sum() > 0);

    testing::ScratchDir dir;
    CHECK(run({"simulate", "--n", "20", "--p", "5", "--n-causal", "2", "--seed", "4", "--out-prefix",
               dir / "s"})
              .code == exit_ok);
    const std::string first = read_file(dir / "s_X.csv");
    run({"simulate", "--n", "20", "--p", "5", "--n-causal", "2", "--seed", "4", "--out-prefix", dir / "s"});
    CHECK(read_file(dir / "s_X.csv") == first);
    CHECK(load_matrix(dir / "s_y.csv").names == std::vector<std::string>{"y"});
    CHECK(lines(read_file(dir / "s_truth.csv")).size() == 3);
}

}
