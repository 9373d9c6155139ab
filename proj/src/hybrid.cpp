#include "hycvb/hybrid.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace hycvb {

double log_sum_exp(std::span<const double> values) {
  assert(!values.empty());
  const double hi = *std::max_element(values.begin(), values.end());
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

void normalize_log_weights(std::span<double> values) {
  assert(!values.empty());
  const double hi = *std::max_element(values.begin(), values.end());
  assert(hi > -std::numeric_limits<double>::infinity());
  double sum = 0.0;
  for (double& v : values) {
    v = std::exp(v - hi);
    sum += v;
  }
  for (double& v : values) v /= sum;
}

std::vector<double> HybridUpdate::realized(std::size_t num_existing) const {
  std::vector<double> out(num_existing + 1, 0.0);
  if (is_new()) {
    out.back() = 1.0;
  } else {
    std::copy(truncated.begin(), truncated.end(), out.begin());
  }
  return out;
}

HybridUpdate hybrid_update(const ResponsibilityVector& phi, Rng& rng) {
  assert(!phi.values.empty());
  const std::size_t k = phi.instantiated();

  HybridUpdate out;
  double xi_existing = 0.0;
  for (std::size_t j = 0; j < k; ++j) xi_existing += phi.values[j];
  out.xi_existing = xi_existing;
  out.xi_new = phi.values[k];

  const double u = rng.uniform();
  bool pick_new;
  if (xi_existing <= 0.0) {
    pick_new = true;
  } else if (out.xi_new <= 0.0) {
    pick_new = false;
  } else {
    pick_new = u * (xi_existing + out.xi_new) >= xi_existing;
  }

  if (pick_new) {
    out.kind = HybridUpdate::Kind::NewComponent;
    return out;
  }
  out.kind = HybridUpdate::Kind::Truncated;
  out.truncated.assign(phi.values.begin(), phi.values.begin() + static_cast<std::ptrdiff_t>(k));
  for (double& v : out.truncated) v /= xi_existing;
  return out;
}

}  // namespace hycvb
