#include "gridrisk/reserve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridrisk::reserve {

namespace {

constexpr int kMaxBisectIter = 200;
constexpr double kFloorDivisor = 1e4;  // dt floor = horizon / 1e4

double expm1_over(double x) {
  if (std::abs(x) < 1e-8) {
    return 1.0 + 0.5 * x + x * x / 6.0;
  }
  return std::expm1(x) / x;
}

// Expected squared mismatch at the per-interval optimal block count.
double mismatch_at_optimum(const ReserveProblem& problem, double p_obs,
                           double dt, double t_obs) {
  const double k = optimal_blocks(problem, p_obs, dt, t_obs);
  return expected_sq_mismatch(problem, p_obs, k, dt);
}

// Simpson integral of the squared mismatch of a linear segment; exact
// because the integrand is quadratic.
double segment_sq_mismatch(double m_lo, double m_hi, double width) {
  const double m_mid = 0.5 * (m_lo + m_hi);
  return width / 6.0 * (m_lo * m_lo + 4.0 * m_mid * m_mid + m_hi * m_hi);
}

}  // namespace

void ReserveProblem::validate() const {
  gbm.validate();
  if (!std::isfinite(demand) || demand < 0.0) {
    throw std::invalid_argument("ReserveProblem: demand must be >= 0");
  }
  if (!std::isfinite(block_power) || block_power <= 0.0) {
    throw std::invalid_argument("ReserveProblem: block_power must be > 0");
  }
  if (!std::isfinite(horizon) || horizon <= 0.0) {
    throw std::invalid_argument("ReserveProblem: horizon must be > 0");
  }
  if (!std::isfinite(tolerance) || tolerance <= 0.0) {
    throw std::invalid_argument("ReserveProblem: tolerance must be > 0");
  }
}

double optimal_blocks(const ReserveProblem& problem, double p_obs, double dt,
                      double t_obs) {
  problem.validate();
  if (!(p_obs > 0.0)) {
    throw std::invalid_argument("optimal_blocks: p_obs must be > 0");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("optimal_blocks: dt must be > 0");
  }
  const double avg_mean = gbm::conditional_mean_integral(
      problem.gbm, p_obs, dt, problem.convention, t_obs);
  return std::max(0.0, (problem.demand - avg_mean) / problem.block_power);
}

double expected_sq_mismatch(const ReserveProblem& problem, double p_obs,
                            double k, double dt) {
  problem.validate();
  if (!(p_obs > 0.0)) {
    throw std::invalid_argument("expected_sq_mismatch: p_obs must be > 0");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("expected_sq_mismatch: dt must be > 0");
  }
  if (!(k >= 0.0)) {
    throw std::invalid_argument("expected_sq_mismatch: k must be >= 0");
  }
  const double mu = problem.gbm.mu_g;
  const double sig2 = problem.gbm.sigma_g * problem.gbm.sigma_g;
  const double c = k * problem.block_power - problem.demand;
  // (1/dt) integral of  p^2 e^{(2mu+sig^2)s} + 2 c p e^{mu s} + c^2.
  const double second = p_obs * p_obs * expm1_over((2.0 * mu + sig2) * dt);
  const double first = 2.0 * c * p_obs * expm1_over(mu * dt);
  return second + first + c * c;
}

IntervalChoice interval_length(const ReserveProblem& problem, double p_obs,
                               double remaining, double t_obs) {
  problem.validate();
  if (!(p_obs > 0.0)) {
    throw std::invalid_argument("interval_length: p_obs must be > 0");
  }
  if (!(remaining > 0.0)) {
    throw std::invalid_argument("interval_length: remaining must be > 0");
  }

  const double eps = problem.tolerance;
  const double floor_dt = problem.horizon / kFloorDivisor;
  if (remaining <= floor_dt) {
    return {remaining,
            mismatch_at_optimum(problem, p_obs, remaining, t_obs) <= eps};
  }
  if (mismatch_at_optimum(problem, p_obs, remaining, t_obs) <= eps) {
    return {remaining, true};
  }
  if (mismatch_at_optimum(problem, p_obs, floor_dt, t_obs) > eps) {
    return {floor_dt, false};  // tolerance unattainable even at the floor
  }

  // Bracket [floor, remaining] holds a crossing; keep the feasible end.
  double lo = floor_dt;
  double hi = remaining;
  for (int it = 0; it < kMaxBisectIter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mismatch_at_optimum(problem, p_obs, mid, t_obs) <= eps) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-12 * problem.horizon) {
      break;
    }
  }
  return {lo, true};
}

IntervalChoice interval_length(const ReserveProblem& problem, double p_obs) {
  return interval_length(problem, p_obs, problem.horizon, 0.0);
}

ReservePlan plan_horizon(const ReserveProblem& problem,
                         const gbm::GbmPath& path) {
  problem.validate();
  if (path.times.empty() || path.times.back() < problem.horizon - 1e-12) {
    throw std::invalid_argument("plan_horizon: path does not cover horizon");
  }

  ReservePlan plan;
  double t = 0.0;
  while (t < problem.horizon - 1e-12) {
    const double remaining = problem.horizon - t;
    const double p_obs = path.value_at_or_before(t);
    const IntervalChoice choice = interval_length(problem, p_obs, remaining, t);

    ReserveInterval iv;
    iv.t_start = t;
    iv.t_end = (choice.dt >= remaining - 1e-15) ? problem.horizon
                                                : t + choice.dt;
    iv.p_obs = p_obs;
    iv.tolerance_met = choice.tolerance_met;
    iv.k_blocks = optimal_blocks(problem, p_obs, choice.dt, t);
    if (problem.integer_blocks) {
      const double rounded = std::ceil(iv.k_blocks);
      iv.rounding_penalty =
          expected_sq_mismatch(problem, p_obs, rounded, choice.dt) -
          expected_sq_mismatch(problem, p_obs, iv.k_blocks, choice.dt);
      iv.k_blocks = rounded;
    }

    // Realized time-averaged squared mismatch along the driving path,
    // integrating the piecewise-linear realization exactly.
    {
      const double offset = iv.k_blocks * problem.block_power - problem.demand;
      const double width = iv.t_end - iv.t_start;
      auto value_at = [&](double s) {
        auto it = std::upper_bound(path.times.begin(), path.times.end(),
                                   s + 1e-12);
        const auto hi_idx =
            std::min<std::size_t>(it - path.times.begin(), path.times.size() - 1);
        if (hi_idx == 0) {
          return path.values.front();
        }
        const std::size_t lo_idx = hi_idx - 1;
        const double span = path.times[hi_idx] - path.times[lo_idx];
        const double w = (s - path.times[lo_idx]) / span;
        return (1.0 - w) * path.values[lo_idx] + w * path.values[hi_idx];
      };
      double integral = 0.0;
      double s_prev = iv.t_start;
      double m_prev = value_at(s_prev) + offset;
      for (std::size_t j = 0; j < path.times.size(); ++j) {
        const double s = path.times[j];
        if (s <= iv.t_start + 1e-12 || s >= iv.t_end - 1e-12) {
          continue;
        }
        const double m = path.values[j] + offset;
        integral += segment_sq_mismatch(m_prev, m, s - s_prev);
        s_prev = s;
        m_prev = m;
      }
      integral +=
          segment_sq_mismatch(m_prev, value_at(iv.t_end) + offset,
                              iv.t_end - s_prev);
      iv.realized_avg_sq_mismatch = integral / width;
    }

    plan.intervals.push_back(iv);
    plan.total_covered += iv.t_end - iv.t_start;
    t = iv.t_end;
  }
  return plan;
}

}  // namespace gridrisk::reserve
