#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gridrisk::gbm {

/// Geometric Brownian motion dP = mu_g*P dt + sigma_g*P dW describing a
/// renewable generation unit's power output.
struct GbmParams {
  double p0;       // initial generation P(0) [kW], > 0
  double mu_g;     // percentage drift [1/h]
  double sigma_g;  // percentage volatility [1/sqrt(h)], >= 0

  /// Throws std::invalid_argument if p0 <= 0 or sigma_g < 0 or any field
  /// is not finite.
  void validate() const;
};

/// One realized generation trajectory on a time grid starting at 0.
struct GbmPath {
  std::vector<double> times;   // hours, strictly increasing, times[0] == 0
  std::vector<double> values;  // kW, values[0] == p0, all > 0
  std::uint64_t seed = 0;      // stream seed that produced the path

  /// Most recent sampled value at or before time t (causal lookup).
  double value_at_or_before(double t) const;
};

/// Samples a path on a uniform grid of n_steps+1 points over [0, horizon]
/// using the exact lognormal transition
///   P_{k+1} = P_k * exp((mu_g - sigma_g^2/2) dt + sigma_g sqrt(dt) Z_k),
/// so there is no discretization bias at the grid points. Deterministic
/// for a fixed seed.
GbmPath simulate_path(const GbmParams& params, double horizon,
                      std::size_t n_steps, std::uint64_t seed);

/// E[P(t)] = p0 * exp(mu_g * t).
double mean_at(const GbmParams& params, double t);

/// Var[P(t)] = p0^2 * exp(2 mu_g t) * (exp(sigma_g^2 t) - 1).
/// Grows exponentially from zero, which is what limits usable horizons
/// downstream.
double variance_at(const GbmParams& params, double t);

/// Convention for the conditional mean integral below. `markov` applies
/// E[P(t)|P(s)] = P(s) e^{mu_g (t-s)}; `literal_printed` keeps an extra
/// e^{mu_g * t_obs} factor on the observed value, matching a published
/// variant of the battery-block formula (see conditional_mean_integral).
enum class MeanConvention { markov, literal_printed };

/// Time average of the conditional mean over a lookahead window:
///   (1/dt) * integral_0^dt E[P(s) | P(0) = p_obs] ds
///     = p_obs * (e^{mu_g dt} - 1) / (mu_g dt),
/// evaluated by series expansion near mu_g*dt = 0. Under
/// MeanConvention::literal_printed the result is additionally scaled by
/// e^{mu_g * t_obs}, where t_obs is the absolute observation time; the two
/// conventions coincide at t_obs = 0 and for mu_g = 0.
double conditional_mean_integral(const GbmParams& params, double p_obs,
                                 double dt,
                                 MeanConvention convention = MeanConvention::markov,
                                 double t_obs = 0.0);

}  // namespace gridrisk::gbm
