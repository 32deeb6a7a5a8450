#include <benchmark/benchmark.h>

#include <random>

#include "gridrisk/alloc.hpp"
#include "gridrisk/gbm.hpp"
#include "gridrisk/hedge.hpp"
#include "gridrisk/reserve.hpp"
#include "gridrisk/rng.hpp"

namespace {

const gridrisk::gbm::GbmParams kParams{20.0, 0.1, 0.3};

gridrisk::hedge::HedgeProblem hedge_problem() {
  gridrisk::hedge::HedgeProblem p;
  p.gbm = kParams;
  p.demand = 25.0;
  p.block_power = 1.0;
  p.maturity = 5.0;
  return p;
}

gridrisk::reserve::ReserveProblem reserve_problem() {
  gridrisk::reserve::ReserveProblem p;
  p.gbm = kParams;
  p.demand = 25.0;
  p.block_power = 1.0;
  p.horizon = 5.0;
  p.tolerance = 6.25;
  return p;
}

void SimulatePath(benchmark::State& state) {
  const auto n_steps = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto path = gridrisk::gbm::simulate_path(kParams, 5.0, n_steps, seed++);
    benchmark::DoNotOptimize(path.values.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(SimulatePath)->Arg(300)->Arg(600)->Arg(4800);

void PolicyEval(benchmark::State& state) {
  const auto problem = hedge_problem();
  double p_g = 5.0;
  for (auto _ : state) {
    const auto h = gridrisk::hedge::policy(problem, p_g, 1.0);
    benchmark::DoNotOptimize(h.a);
    p_g = 5.0 + (p_g + 3.0) * 0.5;  // wander without leaving (0, inf)
    if (p_g > 60.0) {
      p_g = 5.0;
    }
  }
}
BENCHMARK(PolicyEval);

void ReplayHedge(benchmark::State& state) {
  const auto problem = hedge_problem();
  const auto path = gridrisk::gbm::simulate_path(
      kParams, 5.0, static_cast<std::size_t>(state.range(0)), 42);
  for (auto _ : state) {
    auto trace = gridrisk::hedge::replay_hedge(problem, path, 1);
    benchmark::DoNotOptimize(trace.terminal_error);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(ReplayHedge)->Arg(300)->Arg(600);

void PlanReserve(benchmark::State& state) {
  const auto problem = reserve_problem();
  const auto path = gridrisk::gbm::simulate_path(kParams, 5.0, 300, 9);
  for (auto _ : state) {
    auto plan = gridrisk::reserve::plan_horizon(problem, path);
    benchmark::DoNotOptimize(plan.total_covered);
  }
}
BENCHMARK(PlanReserve);

void SolveUncorrelated(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> var_dist(0.1, 4.0);
  std::uniform_real_distribution<double> mean_dist(0.5, 5.0);
  Eigen::VectorXd variances(n);
  Eigen::VectorXd means(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    variances[i] = var_dist(rng);
    means[i] = mean_dist(rng);
  }
  const double demand = 0.9 * means.maxCoeff();
  for (auto _ : state) {
    auto alloc = gridrisk::alloc::solve_uncorrelated(variances, means, demand);
    benchmark::DoNotOptimize(alloc.objective);
  }
}
BENCHMARK(SolveUncorrelated)->Arg(4)->Arg(32)->Arg(256);

void SolveCorrelated(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> mean_dist(0.5, 5.0);
  gridrisk::alloc::ReguEnsemble ensemble;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      a(r, c) = normal(rng);
    }
  }
  ensemble.covariance = a * a.transpose() / static_cast<double>(n);
  ensemble.covariance.diagonal().array() += 0.05;
  ensemble.means.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ensemble.means[i] = mean_dist(rng);
  }
  ensemble.demand = 0.9 * ensemble.means.maxCoeff();
  for (auto _ : state) {
    auto alloc = gridrisk::alloc::solve_correlated(ensemble);
    benchmark::DoNotOptimize(alloc.objective);
  }
}
BENCHMARK(SolveCorrelated)->Arg(4)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
