#include "gridrisk/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gridrisk/rng.hpp"

namespace gridrisk::gbm {

namespace {

// (e^x - 1) / x, continuous through x = 0.
double expm1_over(double x) {
  if (std::abs(x) < 1e-8) {
    return 1.0 + 0.5 * x + x * x / 6.0;
  }
  return std::expm1(x) / x;
}

}  // namespace

void GbmParams::validate() const {
  if (!std::isfinite(p0) || p0 <= 0.0) {
    throw std::invalid_argument("GbmParams: p0 must be positive");
  }
  if (!std::isfinite(mu_g)) {
    throw std::invalid_argument("GbmParams: mu_g must be finite");
  }
  if (!std::isfinite(sigma_g) || sigma_g < 0.0) {
    throw std::invalid_argument("GbmParams: sigma_g must be >= 0");
  }
}

double GbmPath::value_at_or_before(double t) const {
  if (times.empty() || t < times.front() - 1e-12) {
    throw std::invalid_argument("GbmPath: lookup before path start");
  }
  // Last grid point at or before t (small slack for grid arithmetic).
  auto it = std::upper_bound(times.begin(), times.end(), t + 1e-12);
  const auto idx = static_cast<std::size_t>(it - times.begin()) - 1;
  return values[idx];
}

GbmPath simulate_path(const GbmParams& params, double horizon,
                      std::size_t n_steps, std::uint64_t seed) {
  params.validate();
  if (!std::isfinite(horizon) || horizon <= 0.0) {
    throw std::invalid_argument("simulate_path: horizon must be positive");
  }
  if (n_steps == 0) {
    throw std::invalid_argument("simulate_path: need at least one step");
  }

  const double dt = horizon / static_cast<double>(n_steps);
  const double drift = (params.mu_g - 0.5 * params.sigma_g * params.sigma_g) * dt;
  const double vol = params.sigma_g * std::sqrt(dt);

  GbmPath path;
  path.seed = seed;
  path.times.resize(n_steps + 1);
  path.values.resize(n_steps + 1);
  path.times[0] = 0.0;
  path.values[0] = params.p0;

  rng::NormalSampler normal(seed);
  for (std::size_t k = 0; k < n_steps; ++k) {
    path.times[k + 1] = dt * static_cast<double>(k + 1);
    path.values[k + 1] = path.values[k] * std::exp(drift + vol * normal());
  }
  path.times[n_steps] = horizon;
  return path;
}

double mean_at(const GbmParams& params, double t) {
  params.validate();
  if (!(t >= 0.0)) {
    throw std::invalid_argument("mean_at: t must be >= 0");
  }
  return params.p0 * std::exp(params.mu_g * t);
}

double variance_at(const GbmParams& params, double t) {
  params.validate();
  if (!(t >= 0.0)) {
    throw std::invalid_argument("variance_at: t must be >= 0");
  }
  const double s2t = params.sigma_g * params.sigma_g * t;
  return params.p0 * params.p0 * std::exp(2.0 * params.mu_g * t) *
         std::expm1(s2t);
}

double conditional_mean_integral(const GbmParams& params, double p_obs,
                                 double dt, MeanConvention convention,
                                 double t_obs) {
  params.validate();
  if (!(p_obs > 0.0)) {
    throw std::invalid_argument("conditional_mean_integral: p_obs must be > 0");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("conditional_mean_integral: dt must be > 0");
  }
  double scale = p_obs;
  if (convention == MeanConvention::literal_printed) {
    scale *= std::exp(params.mu_g * t_obs);
  }
  return scale * expm1_over(params.mu_g * dt);
}

}  // namespace gridrisk::gbm
