#pragma once

#include <Eigen/Core>

namespace gridrisk::alloc {

/// A pool of n renewable generation units with jointly normal output.
struct ReguEnsemble {
  Eigen::VectorXd means;       // per-unit mean output [kW]
  Eigen::MatrixXd covariance;  // symmetric PSD [kW^2]
  double demand = 0.0;         // required mean power D [kW]

  /// Throws std::invalid_argument on dimension mismatch, non-finite
  /// entries, asymmetric or non-PSD covariance, or negative demand.
  void validate() const;
};

enum class SolutionKind {
  excess_production,   // demand constraint slack, gamma = 0
  critical_production  // demand constraint active, gamma >= 0
};

/// Minimum-variance weights over the unit simplex meeting the demand,
/// together with the multipliers of the budget (delta) and demand (gamma)
/// constraints. The bound multipliers lambda_i are not stored; they are
/// reconstructible as lambda = R a + delta 1 - gamma mu.
struct Allocation {
  Eigen::VectorXd weights;
  SolutionKind kind = SolutionKind::excess_production;
  double gamma = 0.0;
  double delta = 0.0;
  double achieved_mean = 0.0;  // mu' a [kW]
  double objective = 0.0;      // 0.5 a' R a [kW^2]
};

/// Closed-form solver for mutually uncorrelated units (diagonal covariance,
/// entries of `variances`). First tries the interior inverse-variance
/// weights a_i = (1/s_i) / sum_j (1/s_j); if their mean clears the demand
/// the result is an excess-production solution. Otherwise the demand
/// constraint is active and the weights a_i = max(0, (gamma mu_i - delta)/s_i)
/// are found by water filling: nested bisection, delta on the unit budget
/// for fixed gamma, gamma on the achieved mean.
///
/// Throws std::invalid_argument if any variance is <= 0 and
/// infeasible_error if demand > max_i mu_i.
Allocation solve_uncorrelated(const Eigen::VectorXd& variances,
                              const Eigen::VectorXd& means, double demand);

/// General-covariance solver: primal active-set iteration on the quadratic
/// program  min 0.5 a' R a  s.t.  1'a = 1, mu'a >= D, a >= 0, with a 1e-12
/// diagonal regularization for semidefinite R. Reproduces
/// solve_uncorrelated on diagonal inputs.
Allocation solve_correlated(const ReguEnsemble& ensemble);

/// Outcome of checking an allocation against the first-order optimality
/// system. `pass()` requires every condition to hold within the tolerance
/// handed to verify_kkt.
struct KktReport {
  bool stationarity_ok;    // lambda_i ~ 0 on the support of a
  bool dual_feasible_ok;   // lambda >= 0, gamma >= 0
  bool complementary_ok;   // lambda_i a_i = 0 and gamma (D - mu'a) = 0
  bool primal_feasible_ok; // 1'a = 1, a >= 0, mu'a >= D

  double max_support_stationarity;  // max_i |lambda_i| over a_i > tol
  double min_lambda;
  double max_complementarity;       // max_i |lambda_i a_i|
  double demand_slack_product;      // |gamma (D - mu'a)|
  double budget_residual;           // |1'a - 1|
  double min_weight;
  double demand_margin;             // mu'a - D

  bool pass() const {
    return stationarity_ok && dual_feasible_ok && complementary_ok &&
           primal_feasible_ok;
  }
};

/// Reconstructs the bound multipliers lambda = R a + delta 1 - gamma mu
/// from the stored (gamma, delta) and reports each optimality condition
/// separately. Diagnostic only; never throws on a failed condition.
KktReport verify_kkt(const ReguEnsemble& ensemble, const Allocation& alloc,
                     double tol);

}  // namespace gridrisk::alloc
