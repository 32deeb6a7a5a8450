#pragma once

#include <cstddef>
#include <vector>

#include "gridrisk/gbm.hpp"

namespace gridrisk::reserve {

/// Battery-reserve sizing problem: sustain a constant power demand over a
/// horizon from one stochastic generation unit plus K battery blocks of
/// block_power each, keeping the time-averaged expected squared mismatch
/// of each planning sub-interval below `tolerance`.
struct ReserveProblem {
  gbm::GbmParams gbm;
  double demand = 0.0;       // D_e [kW]
  double block_power = 1.0;  // P_b [kW per block]
  double horizon = 1.0;      // T [h]
  double tolerance = 1.0;    // eps [kW^2], time-averaged squared mismatch

  gbm::MeanConvention convention = gbm::MeanConvention::markov;
  // Round block counts up to whole blocks. The plan then reports the extra
  // expected mismatch the rounding induces per interval.
  bool integer_blocks = false;

  void validate() const;
};

/// Optimal (real-valued) battery block count for a sub-interval of length
/// dt that starts with observed generation p_obs:
///   K = max{0, (D_e - avg conditional mean) / P_b}.
/// t_obs is the absolute start time of the sub-interval; it only matters
/// under MeanConvention::literal_printed.
double optimal_blocks(const ReserveProblem& problem, double p_obs, double dt,
                      double t_obs = 0.0);

/// Time-averaged expected squared mismatch over a window of length dt,
///   (1/dt) * integral_0^dt E[(P(s) + k P_b - D_e)^2 | P(0)=p_obs] ds,
/// evaluated in closed form from the conditional first and second moments
/// E[P(s)|p] = p e^{mu s}, E[P(s)^2|p] = p^2 e^{(2 mu + sigma^2) s}.
double expected_sq_mismatch(const ReserveProblem& problem, double p_obs,
                            double k, double dt);

struct IntervalChoice {
  double dt = 0.0;
  // False when even the minimum step floor (horizon / 1e4) exceeds the
  // mismatch tolerance and dt was clamped to the floor.
  bool tolerance_met = true;
};

/// Largest dt <= remaining such that the expected squared mismatch at the
/// optimal block count stays within problem.tolerance, found by bracketing
/// and bisection. dt is clamped to [horizon/1e4, remaining].
IntervalChoice interval_length(const ReserveProblem& problem, double p_obs,
                               double remaining, double t_obs = 0.0);

/// Convenience overload with the full horizon remaining.
IntervalChoice interval_length(const ReserveProblem& problem, double p_obs);

struct ReserveInterval {
  double t_start = 0.0;
  double t_end = 0.0;
  double k_blocks = 0.0;
  double p_obs = 0.0;          // generation observed at t_start
  bool tolerance_met = true;
  double rounding_penalty = 0.0;  // extra expected mismatch from integer_blocks
  // Realized (1/dt) * integral (P(t) + k P_b - D_e)^2 dt over the interval,
  // computed from the driving path. Diagnostic.
  double realized_avg_sq_mismatch = 0.0;
};

struct ReservePlan {
  std::vector<ReserveInterval> intervals;  // contiguous, first starts at 0
  double total_covered = 0.0;              // sum of interval lengths, >= T
};

/// Rolling plan over [0, T]: observe generation at the interval start
/// (most recent path sample at or before it, no look-ahead), size the
/// interval, pick the block count, advance. The path must cover the
/// horizon.
ReservePlan plan_horizon(const ReserveProblem& problem,
                         const gbm::GbmPath& path);

}  // namespace gridrisk::reserve
