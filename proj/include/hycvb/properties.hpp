#pragma once

// Monte Carlo checks of the hybrid update's statistical guarantees, runnable
// standalone from the command line.

#include <cstdint>
#include <string>
#include <vector>

namespace hycvb {

struct PropertyCheck {
  std::string name;
  bool passed = false;
  /// Largest observed deviation in units of its standard error.
  double worst_z = 0.0;
  std::string detail;
};

struct PropertySuiteConfig {
  std::uint64_t seed = 1;
  std::size_t draws = 100000;
  std::size_t expectation_vectors = 50;
  std::size_t new_component_vectors = 20;
  std::size_t max_components = 20;
  double z_limit = 3.0;
};

/// Expectation preservation (realized K+1 vector averages to phi), the
/// Bernoulli(phi_{K+1}) law of the new-component event, and the exact
/// identity xi_2 == phi_{K+1}.
std::vector<PropertyCheck> run_hybrid_property_suite(const PropertySuiteConfig& config);

}  // namespace hycvb
