#include "gridrisk/hedge.hpp"

#include <cmath>
#include <stdexcept>

#include "gridrisk/normal.hpp"

namespace gridrisk::hedge {

namespace {

// Below this sigma*sqrt(tau) the CDF arguments saturate; use the pointwise
// limits instead of dividing by a vanishing scale.
constexpr double kDegenerateScale = 1e-9;

struct CdfArgs {
  bool degenerate;
  double d_plus;
  double d_minus;
};

CdfArgs cdf_args(const HedgeProblem& problem, double p_g, double t) {
  const double tau = problem.maturity - t;
  const double scale = problem.gbm.sigma_g * std::sqrt(tau);
  if (scale < kDegenerateScale) {
    return {true, 0.0, 0.0};
  }
  const double log_moneyness = std::log(problem.demand / p_g);
  const double half_var = 0.5 * scale * scale;
  return {false, (log_moneyness + half_var) / scale,
          (log_moneyness - half_var) / scale};
}

void check_args(const HedgeProblem& problem, double p_g, double t) {
  problem.validate();
  if (!(p_g > 0.0)) {
    throw std::invalid_argument("hedge: p_g must be > 0");
  }
  if (!(t >= 0.0) || t >= problem.maturity) {
    throw std::invalid_argument(
        "hedge: t must lie in [0, maturity); use terminal_payoff at maturity");
  }
}

}  // namespace

void HedgeProblem::validate() const {
  gbm.validate();
  if (!std::isfinite(demand) || demand <= 0.0) {
    throw std::invalid_argument("HedgeProblem: demand must be > 0");
  }
  if (!std::isfinite(block_power) || block_power <= 0.0) {
    throw std::invalid_argument("HedgeProblem: block_power must be > 0");
  }
  if (!std::isfinite(maturity) || maturity <= 0.0) {
    throw std::invalid_argument("HedgeProblem: maturity must be > 0");
  }
}

double portfolio_value(const HedgeProblem& problem, double p_g, double t) {
  check_args(problem, p_g, t);
  const CdfArgs d = cdf_args(problem, p_g, t);
  if (d.degenerate) {
    return std::max(problem.demand - p_g, 0.0);
  }
  return problem.demand * norm_cdf(d.d_plus) - p_g * norm_cdf(d.d_minus);
}

Holdings policy(const HedgeProblem& problem, double p_g, double t) {
  check_args(problem, p_g, t);
  const CdfArgs d = cdf_args(problem, p_g, t);
  if (d.degenerate) {
    if (p_g < problem.demand) {
      return {-1.0, problem.demand / problem.block_power};
    }
    return {0.0, 0.0};
  }
  return {-norm_cdf(d.d_minus),
          problem.demand / problem.block_power * norm_cdf(d.d_plus)};
}

double terminal_payoff(const HedgeProblem& problem, double p_g_final) {
  problem.validate();
  if (!(p_g_final > 0.0)) {
    throw std::invalid_argument("terminal_payoff: p_g_final must be > 0");
  }
  return std::max(problem.demand - p_g_final, 0.0);
}

double noncritical_capacity(const HedgeProblem& problem, double p_g,
                            double t) {
  const Holdings h = policy(problem, p_g, t);
  return (1.0 + std::abs(h.a)) * p_g;
}

double pde_residual(const HedgeProblem& problem, double p_g, double t,
                    double h_p, double h_t) {
  check_args(problem, p_g, t);
  if (!(h_p > 0.0) || !(h_t > 0.0) || p_g - h_p <= 0.0 || t - h_t < 0.0 ||
      t + h_t >= problem.maturity) {
    throw std::invalid_argument("pde_residual: invalid finite-difference steps");
  }
  const double v_t = (portfolio_value(problem, p_g, t + h_t) -
                      portfolio_value(problem, p_g, t - h_t)) /
                     (2.0 * h_t);
  const double v_pp = (portfolio_value(problem, p_g + h_p, t) -
                       2.0 * portfolio_value(problem, p_g, t) +
                       portfolio_value(problem, p_g - h_p, t)) /
                      (h_p * h_p);
  const double sig = problem.gbm.sigma_g;
  return v_t + 0.5 * sig * sig * p_g * p_g * v_pp;
}

HedgeTrace replay_hedge(const HedgeProblem& problem, const gbm::GbmPath& path,
                        std::size_t rebalance_every) {
  problem.validate();
  if (rebalance_every == 0) {
    throw std::invalid_argument("replay_hedge: rebalance_every must be >= 1");
  }
  if (path.times.size() < 2 || path.times.front() != 0.0 ||
      path.times.back() < problem.maturity - 1e-12) {
    throw std::invalid_argument("replay_hedge: path does not cover maturity");
  }

  HedgeTrace trace;
  trace.states.reserve(path.times.size());

  const double p0 = path.values.front();
  double v = portfolio_value(problem, p0, 0.0);
  Holdings h = policy(problem, p0, 0.0);
  trace.states.push_back({0.0, p0, h.a, h.b, v});

  for (std::size_t k = 1; k < path.times.size(); ++k) {
    const double t = path.times[k];
    const double p = path.values[k];
    // Self-financed accrual with frozen holdings.
    v += h.a * (p - path.values[k - 1]);

    const bool at_maturity = t >= problem.maturity - 1e-12;
    if (at_maturity) {
      // Terminal step policy; the exchange keeps the value unchanged.
      h.a = (p < problem.demand) ? -1.0 : 0.0;
      h.b = (v - h.a * p) / problem.block_power;
      trace.states.push_back({t, p, h.a, h.b, v});
      break;
    }
    if (k % rebalance_every == 0) {
      h.a = policy(problem, p, t).a;
      h.b = (v - h.a * p) / problem.block_power;
    }
    trace.states.push_back({t, p, h.a, h.b, v});
  }

  const HedgeState& last = trace.states.back();
  trace.payoff = terminal_payoff(problem, last.p_g);
  trace.terminal_error = std::abs(last.v - trace.payoff);
  return trace;
}

}  // namespace gridrisk::hedge
