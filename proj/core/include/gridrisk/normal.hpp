#pragma once

namespace gridrisk {

/// Standard normal cumulative distribution function.
double norm_cdf(double x);

}  // namespace gridrisk
