#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>

#include "gridrisk/alloc.hpp"
#include "gridrisk/errors.hpp"
#include "oracles.hpp"

using gridrisk::alloc::Allocation;
using gridrisk::alloc::ReguEnsemble;
using gridrisk::alloc::SolutionKind;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) {
    v[i++] = x;
  }
  return v;
}

ReguEnsemble diagonal_ensemble(const Eigen::VectorXd& variances,
                               const Eigen::VectorXd& means, double demand) {
  ReguEnsemble e;
  e.means = means;
  e.covariance = variances.asDiagonal();
  e.demand = demand;
  return e;
}

// Random PSD covariance A A' / n plus a variance floor.
Eigen::MatrixXd random_psd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      a(r, c) = normal(rng);
    }
  }
  Eigen::MatrixXd cov = a * a.transpose() / n;
  cov.diagonal().array() += 0.05;
  return cov;
}

}  // namespace

TEST_SUITE("alloc") {

TEST_CASE("symmetric excess-production split") {
  const auto alloc =
      gridrisk::alloc::solve_uncorrelated(vec({1, 1}), vec({3, 3}), 1.0);
  CHECK(alloc.kind == SolutionKind::excess_production);
  CHECK(alloc.weights[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(alloc.weights[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(alloc.objective == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(alloc.achieved_mean == doctest::Approx(3.0));
  CHECK(alloc.gamma == 0.0);
}

TEST_CASE("excess production weighs by inverse variance") {
  const auto alloc =
      gridrisk::alloc::solve_uncorrelated(vec({1, 2}), vec({3, 3}), 1.0);
  CHECK(alloc.kind == SolutionKind::excess_production);
  CHECK(alloc.weights[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(alloc.weights[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  // Grid search over the simplex confirms optimality.
  const double grid_best = oracles::simplex_grid_min(
      vec({1, 2}).asDiagonal().toDenseMatrix(), vec({3, 3}), 1.0);
  CHECK(alloc.objective <= grid_best + 1e-5);
}

TEST_CASE("critical production activates the demand constraint") {
  const auto alloc =
      gridrisk::alloc::solve_uncorrelated(vec({1, 1}), vec({2, 1}), 1.8);
  CHECK(alloc.kind == SolutionKind::critical_production);
  CHECK(alloc.weights[0] == doctest::Approx(0.8).epsilon(1e-8));
  CHECK(alloc.weights[1] == doctest::Approx(0.2).epsilon(1e-8));
  CHECK(alloc.achieved_mean == doctest::Approx(1.8).epsilon(1e-9));
  CHECK(alloc.gamma == doctest::Approx(0.6).epsilon(1e-7));
  CHECK(alloc.delta == doctest::Approx(0.4).epsilon(1e-7));
  CHECK(alloc.objective == doctest::Approx(0.34).epsilon(1e-8));
  const double grid_best = oracles::simplex_grid_min(
      vec({1, 1}).asDiagonal().toDenseMatrix(), vec({2, 1}), 1.8);
  CHECK(alloc.objective <= grid_best + 1e-5);
}

TEST_CASE("infeasible demand and degenerate variances are rejected") {
  CHECK_THROWS_AS(
      gridrisk::alloc::solve_uncorrelated(vec({1, 1}), vec({2, 1}), 3.0),
      gridrisk::infeasible_error);
  CHECK_THROWS_AS(
      gridrisk::alloc::solve_uncorrelated(vec({1, 0}), vec({2, 1}), 1.0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      gridrisk::alloc::solve_uncorrelated(vec({1, -2}), vec({2, 1}), 1.0),
      std::invalid_argument);
}

TEST_CASE("EP weights depend only on variance ratios") {
  const auto base =
      gridrisk::alloc::solve_uncorrelated(vec({1, 2, 5}), vec({4, 4, 4}), 1.0);
  const auto scaled = gridrisk::alloc::solve_uncorrelated(
      7.3 * vec({1, 2, 5}), vec({4, 4, 4}), 1.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(base.weights[i] ==
          doctest::Approx(scaled.weights[i]).epsilon(1e-12));
  }
}

TEST_CASE("verify_kkt passes EP and CP optima, rejects perturbations") {
  const auto ep_ensemble = diagonal_ensemble(vec({1, 1}), vec({3, 3}), 1.0);
  const auto ep = gridrisk::alloc::solve_uncorrelated(vec({1, 1}), vec({3, 3}), 1.0);
  const auto ep_report = gridrisk::alloc::verify_kkt(ep_ensemble, ep, 1e-8);
  CHECK(ep_report.pass());
  CHECK(ep.gamma == 0.0);

  const auto cp_ensemble = diagonal_ensemble(vec({1, 1}), vec({2, 1}), 1.8);
  const auto cp = gridrisk::alloc::solve_uncorrelated(vec({1, 1}), vec({2, 1}), 1.8);
  const auto cp_report = gridrisk::alloc::verify_kkt(cp_ensemble, cp, 1e-8);
  CHECK(cp_report.pass());
  CHECK(cp.gamma > 0.0);

  Allocation perturbed = cp;
  perturbed.weights = vec({0.7, 0.3});
  const auto bad = gridrisk::alloc::verify_kkt(cp_ensemble, perturbed, 1e-8);
  CHECK_FALSE(bad.stationarity_ok);
  CHECK_FALSE(bad.pass());
}

TEST_CASE("correlated solver reproduces the diagonal closed form") {
  std::mt19937_64 rng(314);
  std::uniform_real_distribution<double> var_dist(0.1, 4.0);
  std::uniform_real_distribution<double> mean_dist(0.5, 5.0);
  std::uniform_real_distribution<double> frac(0.2, 0.98);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 3;
    Eigen::VectorXd variances(n);
    Eigen::VectorXd means(n);
    for (int i = 0; i < n; ++i) {
      variances[i] = var_dist(rng);
      means[i] = mean_dist(rng);
    }
    const double demand = frac(rng) * means.maxCoeff();
    const auto direct =
        gridrisk::alloc::solve_uncorrelated(variances, means, demand);
    const auto general = gridrisk::alloc::solve_correlated(
        diagonal_ensemble(variances, means, demand));
    CAPTURE(trial);
    CHECK(std::abs(direct.objective - general.objective) <= 1e-9);
    for (int i = 0; i < n; ++i) {
      CHECK(general.weights[i] ==
            doctest::Approx(direct.weights[i]).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("exchange symmetry for identical correlated sources") {
  ReguEnsemble e;
  e.means = vec({3, 3});
  e.covariance.resize(2, 2);
  e.covariance << 1.0, 0.5, 0.5, 1.0;
  e.demand = 1.0;
  const auto alloc = gridrisk::alloc::solve_correlated(e);
  CHECK(alloc.weights[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(alloc.weights[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("correlated solver matches the simplex grid oracle") {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> mean_dist(0.5, 5.0);
  std::uniform_real_distribution<double> frac(0.2, 0.98);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 2 + trial % 3;
    ReguEnsemble e;
    e.means.resize(n);
    for (int i = 0; i < n; ++i) {
      e.means[i] = mean_dist(rng);
    }
    e.covariance = random_psd(n, rng);
    e.demand = frac(rng) * e.means.maxCoeff();
    const auto alloc = gridrisk::alloc::solve_correlated(e);
    const double grid_best =
        oracles::simplex_grid_min(e.covariance, e.means, e.demand);
    CAPTURE(trial);
    CHECK(alloc.objective <= grid_best + 1e-5);
    // Feasibility contract.
    CHECK(std::abs(alloc.weights.sum() - 1.0) <= 1e-10);
    CHECK(alloc.weights.minCoeff() >= -1e-12);
    CHECK(alloc.achieved_mean >= e.demand - 1e-8);
    // EP/CP dichotomy.
    if (alloc.kind == SolutionKind::excess_production) {
      CHECK(alloc.achieved_mean > e.demand);
    } else {
      CHECK(std::abs(alloc.achieved_mean - e.demand) <= 1e-8);
    }
  }
}

TEST_CASE("random uncorrelated instances satisfy the output contract") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> var_dist(0.05, 4.0);
  std::uniform_real_distribution<double> mean_dist(0.5, 5.0);
  std::uniform_real_distribution<double> frac(0.05, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 5;
    Eigen::VectorXd variances(n);
    Eigen::VectorXd means(n);
    for (int i = 0; i < n; ++i) {
      variances[i] = var_dist(rng);
      means[i] = mean_dist(rng);
    }
    const double demand = frac(rng) * means.maxCoeff();
    const auto alloc =
        gridrisk::alloc::solve_uncorrelated(variances, means, demand);
    CAPTURE(trial);
    CHECK(std::abs(alloc.weights.sum() - 1.0) <= 1e-10);
    CHECK(alloc.weights.minCoeff() >= 0.0);
    CHECK(alloc.achieved_mean >= demand - 1e-8);
    if (alloc.kind == SolutionKind::excess_production) {
      CHECK(alloc.achieved_mean > demand);
    } else {
      CHECK(std::abs(alloc.achieved_mean - demand) <= 1e-8);
    }
    const auto report = gridrisk::alloc::verify_kkt(
        diagonal_ensemble(variances, means, demand), alloc, 1e-8);
    CHECK(report.pass());
  }
}

TEST_CASE("covariance validation") {
  ReguEnsemble e;
  e.means = vec({1, 1});
  e.covariance.resize(2, 2);
  e.covariance << 1.0, 2.0, 2.0, 1.0;  // eigenvalues -1 and 3
  e.demand = 0.5;
  CHECK_THROWS_AS(gridrisk::alloc::solve_correlated(e), std::invalid_argument);
  e.covariance << 1.0, 0.2, 0.3, 1.0;  // asymmetric
  CHECK_THROWS_AS(gridrisk::alloc::solve_correlated(e), std::invalid_argument);
  e.covariance << 1.0, 0.2, 0.2, 1.0;
  e.demand = 5.0;  // above best mean
  CHECK_THROWS_AS(gridrisk::alloc::solve_correlated(e),
                  gridrisk::infeasible_error);
}

}  // TEST_SUITE
