// Serial reference kernels against their OpenMP counterparts, and one full
// inner fit for scale. Run with VARSEL_THREADS to pin the worker count.

#include "varsel/kernels.hpp"
#include "varsel/linear_vb.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

namespace k = varsel::kernels;

struct Inputs {
    Eigen::MatrixXd X, Z, C;
    Eigen::VectorXd v, d, r;

    Inputs(Eigen::Index n, Eigen::Index p) {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> z(0, 1);
        auto fill = [&](Eigen::MatrixXd &M, Eigen::Index rows, Eigen::Index cols) {
            M.resize(rows, cols);
            for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = z(rng);
        };
        fill(X, n, p);
        fill(Z, n, 3);
        fill(C, 3, p);
        Eigen::MatrixXd tmp;
        fill(tmp, n, 3);
        v = tmp.col(0);
        d = tmp.col(1).cwiseAbs();
        r = Eigen::VectorXd::NullaryExpr(p, [&] { return z(rng); });
    }
};

const Inputs &inputs(Eigen::Index n, Eigen::Index p) {
    static const Inputs in(n, p);
    return in;
}

template <auto Fn>
void BM_xt_v(benchmark::State &state) {
    const auto &in = inputs(2000, 5000);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(in.X, in.v));
    state.SetItemsProcessed(state.iterations() * in.X.size());
}

template <auto Fn>
void BM_x_times(benchmark::State &state) {
    const auto &in = inputs(2000, 5000);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(in.X, in.r));
    state.SetItemsProcessed(state.iterations() * in.X.size());
}

template <auto Fn>
void BM_weighted_sumsq(benchmark::State &state) {
    const auto &in = inputs(2000, 5000);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(in.X, in.d));
    state.SetItemsProcessed(state.iterations() * in.X.size());
}

template <auto Fn>
void BM_residual_moments(benchmark::State &state) {
    const auto &in = inputs(2000, 5000);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(in.X, in.Z, in.C, in.d, in.v));
    state.SetItemsProcessed(state.iterations() * in.X.size());
}

template <auto Fn>
void BM_row_residual_variance(benchmark::State &state) {
    const auto &in = inputs(2000, 5000);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(in.X, in.Z, in.C, in.r));
    state.SetItemsProcessed(state.iterations() * in.X.size());
}

void BM_inner_fit_linear(benchmark::State &state) {
    const auto &in = inputs(2000, 5000);
    Eigen::VectorXd y = in.X.leftCols(10).rowwise().sum() + in.v;
    const auto data = varsel::validate_dataset(in.X, Eigen::MatrixXd(), y, varsel::Family::gaussian);
    const auto stats = varsel::make_linear_stats(data);
    varsel::InnerOptions opts;
    opts.update_sigma = true;
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(in.X.cols(), -2.0);
    const varsel::VariationalState init{Eigen::VectorXd::Constant(in.X.cols(), 0.01),
                                        Eigen::VectorXd::Zero(in.X.cols()),
                                        Eigen::VectorXd::Ones(in.X.cols()), {}};
    for (auto _ : state) benchmark::DoNotOptimize(varsel::fit_inner_linear(stats, 1, 1, lo, init, opts));
}

}  // namespace

BENCHMARK(BM_xt_v<k::serial::xt_v>)->Name("xt_v/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_xt_v<k::xt_v>)->Name("xt_v/openmp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_x_times<k::serial::x_times>)->Name("x_times/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_x_times<k::x_times>)->Name("x_times/openmp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_weighted_sumsq<k::serial::col_weighted_sumsq>)
    ->Name("col_weighted_sumsq/serial")
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_weighted_sumsq<k::col_weighted_sumsq>)
    ->Name("col_weighted_sumsq/openmp")
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_residual_moments<k::serial::residual_moments>)
    ->Name("residual_moments/serial")
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_residual_moments<k::residual_moments>)
    ->Name("residual_moments/openmp")
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_row_residual_variance<k::serial::row_residual_variance>)
    ->Name("row_residual_variance/serial")
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_row_residual_variance<k::row_residual_variance>)
    ->Name("row_residual_variance/openmp")
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_inner_fit_linear)->Name("inner_fit_linear/n2000_p5000")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
