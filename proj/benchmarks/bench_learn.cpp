#include <benchmark/benchmark.h>

#include <cmath>

#include "stentx/gpr.hpp"
#include "stentx/lasso.hpp"
#include "stentx/rng.hpp"

namespace {

void make_data(int n, int p, Eigen::MatrixXd& x, Eigen::VectorXd& y) {
    stentx::Rng rng(42);
    x.resize(n, p);
    y.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) x(i, j) = stentx::standard_normal(rng);
        y(i) = std::sin(x(i, 0)) + 0.5 * x(i, 1) + 0.1 * stentx::standard_normal(rng);
    }
}

void BM_LassoPath(benchmark::State& state) {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    make_data(static_cast<int>(state.range(0)), 184, x, y);
    const auto grid = stentx::default_lambda_grid(x, y, 50, 1e-3);
    for (auto _ : state) benchmark::DoNotOptimize(stentx::lasso_path(x, y, grid));
}
BENCHMARK(BM_LassoPath)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_GprFit(benchmark::State& state) {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    make_data(static_cast<int>(state.range(0)), 33, x, y);
    stentx::GprOptions opt;
    opt.starts = 2;
    for (auto _ : state) benchmark::DoNotOptimize(stentx::fit_gpr(x, y, opt, 1));
}
BENCHMARK(BM_GprFit)->Arg(300)->Arg(1500)->Unit(benchmark::kMillisecond);

void BM_GprPredict(benchmark::State& state) {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    make_data(1500, 33, x, y);
    stentx::GprOptions opt;
    opt.starts = 1;
    const auto m = stentx::fit_gpr(x, y, opt, 1);
    for (auto _ : state) benchmark::DoNotOptimize(stentx::gpr_predict(m, x));
}
BENCHMARK(BM_GprPredict)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
