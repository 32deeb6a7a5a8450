#include "gridrisk/normal.hpp"

#include <cmath>
#include <numbers>

namespace gridrisk {

double norm_cdf(double x) {
  // erfc keeps full relative accuracy in the left tail, where
  // 0.5 * (1 + erf(.)) would cancel.
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

}  // namespace gridrisk
