#pragma once

#include <cstddef>
#include <vector>

#include "gridrisk/gbm.hpp"

namespace gridrisk::hedge {

/// Future-time power demand contract: the portfolio of a(t) generation
/// units and b(t) battery blocks must be worth max(D_c - P(T_f), 0) at
/// maturity, almost surely, under self-financed rebalancing.
struct HedgeProblem {
  gbm::GbmParams gbm;
  double demand = 0.0;       // critical demand D_c at maturity [kW]
  double block_power = 1.0;  // P_b [kW per block]
  double maturity = 1.0;     // T_f [h]

  void validate() const;
};

/// Closed-form portfolio power V(p, t) for 0 <= t < maturity:
///   V = D_c F(d+) - p F(d-),   d+- = (ln(D_c/p) +- sigma^2 tau / 2) / (sigma sqrt(tau))
/// with tau = T_f - t and F the standard normal CDF. For sigma*sqrt(tau)
/// below 1e-9 the pointwise limit max(D_c - p, 0) is used.
double portfolio_value(const HedgeProblem& problem, double p_g, double t);

struct Holdings {
  double a = 0.0;  // generation units, in [-1, 0]
  double b = 0.0;  // battery blocks, in [0, D_c / P_b]
};

/// Replication policy a(t) = -F(d-), b(t) = (D_c/P_b) F(d+). Satisfies
/// a p + b P_b == portfolio_value(p, t) identically.
Holdings policy(const HedgeProblem& problem, double p_g, double t);

/// Contract payoff at maturity: max(D_c - p, 0).
double terminal_payoff(const HedgeProblem& problem, double p_g_final);

/// Generation that can serve non-critical loads while the hedge is on:
/// (1 + |a(t)|) * p_g.
double noncritical_capacity(const HedgeProblem& problem, double p_g, double t);

/// Central-difference estimate of dV/dt + 0.5 sigma^2 p^2 d2V/dp2 on the
/// closed form; the exact value solves the PDE, so the estimate must
/// vanish at O(h^2) under step refinement. Verification aid.
double pde_residual(const HedgeProblem& problem, double p_g, double t,
                    double h_p, double h_t);

struct HedgeState {
  double t = 0.0;
  double p_g = 0.0;
  double a = 0.0;
  double b = 0.0;
  double v = 0.0;  // a p_g + b P_b
};

struct HedgeTrace {
  std::vector<HedgeState> states;  // one per path grid point
  double payoff = 0.0;             // max(D_c - P(T_f), 0)
  double terminal_error = 0.0;     // |v(T_f) - payoff|
};

/// Discrete self-financed replay along a realized path. The value evolves
/// with frozen holdings, v_k = v_{k-1} + a_{k-1} (p_k - p_{k-1}); every
/// `rebalance_every` grid steps the holdings reset to the policy a and
/// b = (v - a p) / P_b, which leaves the value unchanged. At maturity the
/// trace records the replication error against the contract payoff.
HedgeTrace replay_hedge(const HedgeProblem& problem, const gbm::GbmPath& path,
                        std::size_t rebalance_every);

}  // namespace gridrisk::hedge
