#include "gridrisk/alloc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gridrisk/errors.hpp"

namespace gridrisk::alloc {

namespace {

constexpr double kResidualTol = 1e-10;  // demand residual target
// The budget bisection runs tighter than the 1e-10 contract so the unit-sum
// invariant survives reordered summation downstream.
constexpr double kBudgetTol = 1e-12;
constexpr int kMaxBisectIter = 200;
constexpr double kDiagReg = 1e-12;      // PSD regularization for the QP

Eigen::VectorXd cp_weights(const Eigen::VectorXd& variances,
                           const Eigen::VectorXd& means, double gamma,
                           double delta) {
  Eigen::VectorXd w(means.size());
  for (Eigen::Index i = 0; i < means.size(); ++i) {
    w[i] = std::max(0.0, (gamma * means[i] - delta) / variances[i]);
  }
  return w;
}

// The unit-budget residual sum_i max(0, (gamma mu_i - delta)/s_i) is
// continuous and nonincreasing in delta; bisect for the delta where it
// crosses 1.
double water_fill_delta(const Eigen::VectorXd& variances,
                        const Eigen::VectorXd& means, double gamma) {
  const auto budget = [&](double delta) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < means.size(); ++i) {
      sum += std::max(0.0, (gamma * means[i] - delta) / variances[i]);
    }
    return sum;
  };

  double hi = (gamma * means.array()).maxCoeff();  // budget(hi) == 0
  double lo = hi - 1.0;
  int expansions = 0;
  while (budget(lo) < 1.0) {
    lo = hi - 2.0 * (hi - lo);
    if (++expansions > kMaxBisectIter) {
      throw numerical_error("water_fill_delta: bracket expansion failed");
    }
  }

  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxBisectIter; ++it) {
    mid = 0.5 * (lo + hi);
    const double b = budget(mid);
    if (std::abs(b - 1.0) <= kBudgetTol) {
      return mid;
    }
    if (b > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

Allocation finish(const Eigen::MatrixXd& covariance,
                  const Eigen::VectorXd& means, Eigen::VectorXd weights,
                  SolutionKind kind, double gamma, double delta) {
  Allocation out;
  out.kind = kind;
  out.gamma = gamma;
  out.delta = delta;
  out.achieved_mean = means.dot(weights);
  out.objective = 0.5 * weights.dot(covariance * weights);
  out.weights = std::move(weights);
  return out;
}

}  // namespace

void ReguEnsemble::validate() const {
  const auto n = means.size();
  if (n == 0) {
    throw std::invalid_argument("ReguEnsemble: empty ensemble");
  }
  if (covariance.rows() != n || covariance.cols() != n) {
    throw std::invalid_argument("ReguEnsemble: covariance dimensions mismatch");
  }
  if (!means.allFinite() || !covariance.allFinite()) {
    throw std::invalid_argument("ReguEnsemble: non-finite entries");
  }
  if (!std::isfinite(demand) || demand < 0.0) {
    throw std::invalid_argument("ReguEnsemble: demand must be >= 0");
  }
  const double scale = 1.0 + covariance.cwiseAbs().maxCoeff();
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() >
      1e-9 * scale) {
    throw std::invalid_argument("ReguEnsemble: covariance not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
  if (eig.eigenvalues().minCoeff() < -1e-9 * scale) {
    throw std::invalid_argument("ReguEnsemble: covariance not PSD");
  }
}

Allocation solve_uncorrelated(const Eigen::VectorXd& variances,
                              const Eigen::VectorXd& means, double demand) {
  const auto n = means.size();
  if (n == 0 || variances.size() != n) {
    throw std::invalid_argument("solve_uncorrelated: size mismatch");
  }
  if (!means.allFinite() || !variances.allFinite() || !std::isfinite(demand)) {
    throw std::invalid_argument("solve_uncorrelated: non-finite input");
  }
  if (variances.minCoeff() <= 0.0) {
    throw std::invalid_argument("solve_uncorrelated: variances must be > 0");
  }
  if (demand > means.maxCoeff()) {
    throw infeasible_error("solve_uncorrelated: demand exceeds best mean");
  }

  const Eigen::MatrixXd covariance = variances.asDiagonal();

  // Interior candidate: inverse-variance weights.
  const double inv_sum = (1.0 / variances.array()).sum();
  const Eigen::VectorXd ep = (1.0 / variances.array()) / inv_sum;
  if (means.dot(ep) > demand) {
    return finish(covariance, means, ep, SolutionKind::excess_production, 0.0,
                  -1.0 / inv_sum);
  }

  // Demand constraint active: mean(gamma) = mu' w(gamma, delta(gamma)) is
  // nondecreasing, so bracket and bisect the demand multiplier.
  const auto mean_at_gamma = [&](double gamma, double& delta_out) {
    delta_out = water_fill_delta(variances, means, gamma);
    return means.dot(cp_weights(variances, means, gamma, delta_out));
  };

  double delta = 0.0;
  double gamma_lo = 0.0;
  if (mean_at_gamma(0.0, delta) >= demand - kResidualTol) {
    return finish(covariance, means, cp_weights(variances, means, 0.0, delta),
                  SolutionKind::critical_production, 0.0, delta);
  }
  double gamma_hi = 1.0;
  int expansions = 0;
  while (mean_at_gamma(gamma_hi, delta) < demand) {
    gamma_hi *= 2.0;
    if (++expansions > kMaxBisectIter) {
      throw numerical_error("solve_uncorrelated: demand bracket failed");
    }
  }

  double gamma = gamma_hi;
  for (int it = 0; it < kMaxBisectIter; ++it) {
    gamma = 0.5 * (gamma_lo + gamma_hi);
    const double mean = mean_at_gamma(gamma, delta);
    if (std::abs(mean - demand) <= kResidualTol) {
      break;
    }
    if (mean < demand) {
      gamma_lo = gamma;
    } else {
      gamma_hi = gamma;
    }
  }
  // Land on the upper end so the achieved mean does not undershoot.
  if (means.dot(cp_weights(variances, means, gamma, delta)) <
      demand - kResidualTol) {
    gamma = gamma_hi;
    delta = water_fill_delta(variances, means, gamma);
  }
  return finish(covariance, means, cp_weights(variances, means, gamma, delta),
                SolutionKind::critical_production, gamma, delta);
}

Allocation solve_correlated(const ReguEnsemble& ensemble) {
  ensemble.validate();
  const auto n = ensemble.means.size();
  const Eigen::VectorXd& mu = ensemble.means;
  const double demand = ensemble.demand;

  Eigen::Index best = 0;
  const double mu_max = mu.maxCoeff(&best);
  if (demand > mu_max) {
    throw infeasible_error("solve_correlated: demand exceeds best mean");
  }

  Eigen::MatrixXd R =
      0.5 * (ensemble.covariance + ensemble.covariance.transpose());
  R.diagonal().array() += kDiagReg;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

  // Start at the highest-mean vertex, which is always feasible.
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  a[best] = 1.0;
  std::vector<bool> at_zero(n, true);
  at_zero[best] = false;
  bool demand_active = false;
  double delta = 0.0;
  double gamma = 0.0;

  const int max_iter = 100 * static_cast<int>(n) + 100;
  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<int> free_idx;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!at_zero[i]) {
        free_idx.push_back(static_cast<int>(i));
      }
    }
    const int f = static_cast<int>(free_idx.size());
    const int m = demand_active ? 2 : 1;

    // Equality-constrained subproblem on the free coordinates:
    // [ R_FF  1  -mu_F ] [a_F  ]   [ 0 ]
    // [ 1'    0    0   ] [delta] = [ 1 ]
    // [-mu_F' 0    0   ] [gamma]   [-D ]
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(f + m, f + m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(f + m);
    for (int r = 0; r < f; ++r) {
      for (int c = 0; c < f; ++c) {
        kkt(r, c) = R(free_idx[r], free_idx[c]);
      }
      kkt(r, f) = 1.0;
      kkt(f, r) = 1.0;
    }
    rhs[f] = 1.0;
    if (demand_active) {
      for (int r = 0; r < f; ++r) {
        kkt(r, f + 1) = -mu[free_idx[r]];
        kkt(f + 1, r) = -mu[free_idx[r]];
      }
      rhs[f + 1] = -demand;
    }

    const Eigen::VectorXd sol =
        kkt.completeOrthogonalDecomposition().solve(rhs);
    if ((kkt * sol - rhs).cwiseAbs().maxCoeff() > 1e-8) {
      throw numerical_error("solve_correlated: degenerate working set");
    }

    Eigen::VectorXd target = Eigen::VectorXd::Zero(n);
    for (int r = 0; r < f; ++r) {
      target[free_idx[r]] = sol[r];
    }
    delta = sol[f];
    gamma = demand_active ? sol[f + 1] : 0.0;

    const Eigen::VectorXd step = target - a;
    if (step.cwiseAbs().maxCoeff() <= 1e-13) {
      // Stationary for this working set; check the blocked multipliers.
      const Eigen::VectorXd lambda = R * a + delta * ones - gamma * mu;
      double worst = -1e-11;
      int worst_bound = -1;
      bool drop_demand = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (at_zero[i] && lambda[i] < worst) {
          worst = lambda[i];
          worst_bound = static_cast<int>(i);
        }
      }
      if (demand_active && gamma < worst) {
        worst = gamma;
        drop_demand = true;
        worst_bound = -1;
      }
      if (worst_bound < 0 && !drop_demand) {
        break;  // optimal
      }
      if (drop_demand) {
        demand_active = false;
      } else {
        at_zero[worst_bound] = false;
      }
      continue;
    }

    // Step toward the subproblem optimum, stopping at the first blocking
    // constraint.
    double beta = 1.0;
    int blocking_bound = -1;
    bool blocking_demand = false;
    for (int r = 0; r < f; ++r) {
      const int i = free_idx[r];
      if (step[i] < -1e-15) {
        const double cap = a[i] / (-step[i]);
        if (cap < beta) {
          beta = cap;
          blocking_bound = i;
          blocking_demand = false;
        }
      }
    }
    if (!demand_active) {
      const double along = mu.dot(step);
      if (along < -1e-15) {
        const double cap = (mu.dot(a) - demand) / (-along);
        if (cap < beta) {
          beta = cap;
          blocking_bound = -1;
          blocking_demand = true;
        }
      }
    }
    beta = std::clamp(beta, 0.0, 1.0);
    a += beta * step;
    if (beta < 1.0) {
      if (blocking_demand) {
        demand_active = true;
      } else {
        at_zero[blocking_bound] = true;
        a[blocking_bound] = 0.0;
      }
    }
    if (iter + 1 == max_iter) {
      throw numerical_error("solve_correlated: active-set iteration cap");
    }
  }

  const SolutionKind kind = (mu.dot(a) > demand + 1e-8)
                                ? SolutionKind::excess_production
                                : SolutionKind::critical_production;
  return finish(ensemble.covariance, mu, a, kind, gamma, delta);
}

KktReport verify_kkt(const ReguEnsemble& ensemble, const Allocation& alloc,
                     double tol) {
  const auto n = ensemble.means.size();
  if (alloc.weights.size() != n) {
    throw std::invalid_argument("verify_kkt: allocation dimension mismatch");
  }
  const Eigen::VectorXd& a = alloc.weights;
  const Eigen::VectorXd lambda = ensemble.covariance * a +
                                 alloc.delta * Eigen::VectorXd::Ones(n) -
                                 alloc.gamma * ensemble.means;

  KktReport rep{};
  rep.max_support_stationarity = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a[i] > tol) {
      rep.max_support_stationarity =
          std::max(rep.max_support_stationarity, std::abs(lambda[i]));
    }
  }
  rep.min_lambda = lambda.minCoeff();
  rep.max_complementarity = (lambda.array() * a.array()).abs().maxCoeff();
  rep.demand_slack_product =
      std::abs(alloc.gamma * (ensemble.demand - ensemble.means.dot(a)));
  rep.budget_residual = std::abs(a.sum() - 1.0);
  rep.min_weight = a.minCoeff();
  rep.demand_margin = ensemble.means.dot(a) - ensemble.demand;

  rep.stationarity_ok = rep.max_support_stationarity <= tol;
  rep.dual_feasible_ok = rep.min_lambda >= -tol && alloc.gamma >= -tol;
  rep.complementary_ok =
      rep.max_complementarity <= tol && rep.demand_slack_product <= tol;
  rep.primal_feasible_ok = rep.budget_residual <= tol &&
                           rep.min_weight >= -tol && rep.demand_margin >= -tol;
  return rep;
}

}  // namespace gridrisk::alloc
