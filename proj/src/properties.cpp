#include "hycvb/properties.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hycvb/hybrid.hpp"
#include "hycvb/rng.hpp"

namespace hycvb {

namespace {

ResponsibilityVector random_phi(Rng& rng, std::size_t max_components) {
  const std::size_t k = 1 + rng.below(max_components);
  return ResponsibilityVector{rng.dirichlet(k + 1, 1.0)};
}

}  // namespace

std::vector<PropertyCheck> run_hybrid_property_suite(const PropertySuiteConfig& config) {
  std::vector<PropertyCheck> checks;
  Rng setup(derive_seed(config.seed, 0));
  Rng draws(derive_seed(config.seed, 1));
  const double m = static_cast<double>(config.draws);

  // Realized vector mean vs phi. Coordinate k <= K takes zeta_1k with
  // probability xi_1, so its standard error is zeta_1k sqrt(xi_1 xi_2 / M);
  // the new slot's is sqrt(xi_1 xi_2 / M).
  PropertyCheck expectation{"expectation preservation", true, 0.0, {}};
  for (std::size_t v = 0; v < config.expectation_vectors; ++v) {
    ResponsibilityVector phi = random_phi(setup, config.max_components);
    const std::size_t k = phi.instantiated();
    std::vector<double> sum(k + 1, 0.0);
    for (std::size_t d = 0; d < config.draws; ++d) {
      HybridUpdate u = hybrid_update(phi, draws);
      if (u.is_new()) {
        sum[k] += 1.0;
      } else {
        for (std::size_t j = 0; j < k; ++j) sum[j] += u.truncated[j];
      }
    }
    const double xi_new = phi.values[k];
    const double xi_old = 1.0 - xi_new;
    const double base_se = std::sqrt(xi_old * xi_new / m);
    for (std::size_t j = 0; j <= k; ++j) {
      const double scale = j < k ? phi.values[j] / xi_old : 1.0;
      const double se = base_se * scale;
      const double dev = std::abs(sum[j] / m - phi.values[j]);
      const double z = se > 0.0 ? dev / se : (dev > 1e-12 ? INFINITY : 0.0);
      expectation.worst_z = std::max(expectation.worst_z, z);
      if (z > config.z_limit) expectation.passed = false;
    }
  }
  checks.push_back(expectation);

  PropertyCheck law{"new-component frequency", true, 0.0, {}};
  PropertyCheck identity{"xi_2 == phi_{K+1}", true, 0.0, {}};
  for (std::size_t v = 0; v < config.new_component_vectors; ++v) {
    ResponsibilityVector phi = random_phi(setup, config.max_components);
    const double p = phi.new_component_mass();
    std::size_t hits = 0;
    for (std::size_t d = 0; d < config.draws; ++d) {
      HybridUpdate u = hybrid_update(phi, draws);
      if (u.xi_new != p) identity.passed = false;
      hits += u.is_new();
    }
    const double se = std::sqrt(p * (1.0 - p) / m);
    const double z = std::abs(static_cast<double>(hits) / m - p) / se;
    law.worst_z = std::max(law.worst_z, z);
    if (z > config.z_limit) law.passed = false;
  }
  checks.push_back(law);
  checks.push_back(identity);

  for (PropertyCheck& c : checks) {
    std::ostringstream os;
    os << "worst deviation " << c.worst_z << " standard errors (limit " << config.z_limit << ")";
    c.detail = os.str();
  }
  return checks;
}

}  // namespace hycvb
