#include <benchmark/benchmark.h>

#include <censreg/normal_dist.hpp>
#include <censreg/polyhedral_pivot.hpp>
#include <censreg/probit.hpp>
#include <censreg/rng.hpp>
#include <censreg/simulate.hpp>

using namespace censreg;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = rng.normal();
  return M;
}

void BM_ProbitFit(benchmark::State& state) {
  const auto n = state.range(0);
  Rng rng(1);
  Eigen::MatrixXd X = gaussian(n, 10, rng);
  X.col(0).setOnes();
  const Eigen::VectorXd alpha = 0.3 * gaussian(10, 1, rng).col(0);
  Indicator z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = X.row(i).dot(alpha) + rng.normal() > 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(fit_probit(X, z).alpha_hat);
  state.SetComplexityN(n);
}
BENCHMARK(BM_ProbitFit)->RangeMultiplier(10)->Range(100, 100000)->Complexity();

void BM_TwoStepTobit1(benchmark::State& state) {
  SimDesign d;
  d.n = state.range(0);
  Rng rng(2);
  const auto s = gen_tobit1(d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(fit_tobit1(s.data).gamma_hat);
}
BENCHMARK(BM_TwoStepTobit1)->Arg(100)->Arg(10000);

void BM_TruncationBounds(benchmark::State& state) {
  const auto n = state.range(0);
  Rng rng(3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = std::abs(rng.normal()) + 0.01;
  const Eigen::VectorXd eta = gaussian(n, 1, rng).col(0);
  const auto constraint = PolyhedralConstraint::nonnegative(n);
  const auto sigma = Covariance::scaled_identity(n, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(truncation_bounds(y, constraint, sigma, eta));
}
BENCHMARK(BM_TruncationBounds)->Arg(100)->Arg(10000);

void BM_InvertInterval(benchmark::State& state) {
  const double x = static_cast<double>(state.range(0)) / 10.0;
  const auto ctx = PivotContext::scalar(x, 1.0, -3.0, kInf);
  for (auto _ : state) benchmark::DoNotOptimize(invert_interval(ctx, 0.05));
}
// observation at the boundary, near it and in the bulk
BENCHMARK(BM_InvertInterval)->Arg(-29)->Arg(-20)->Arg(20);

void BM_TruncnormCdfTail(benchmark::State& state) {
  const double lo = static_cast<double>(state.range(0));
  double acc = 0.0;
  for (auto _ : state) {
    acc += truncnorm_cdf(lo + 0.5, {0.0, 1.0, lo, kInf});
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_TruncnormCdfTail)->Arg(0)->Arg(10)->Arg(35);

}  // namespace

BENCHMARK_MAIN();
