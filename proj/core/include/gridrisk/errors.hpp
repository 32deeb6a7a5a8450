#pragma once

#include <stdexcept>

namespace gridrisk {

/// Demand exceeds what the source ensemble can deliver.
class infeasible_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative routine exhausted its budget without converging.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gridrisk
