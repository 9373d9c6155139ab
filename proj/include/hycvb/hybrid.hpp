#pragma once

// Hybrid truncated/new-component update shared by the DPMM and HDP-LDA
// engines.
//
// Given the (K+1)-dimensional zero-order responsibility vector phi, with
// the last slot holding the mass of the not-yet-instantiated components:
//
//   xi_1 = sum_{k<=K} phi_k    (explanatory power of existing components)
//   xi_2 = phi_{K+1}           (mass of the new component)
//
// One categorical draw c ~ Cat(xi) selects either the renormalized truncated
// vector phi_{1:K} / xi_1 or a one-hot vector on a fresh component. The
// realized K+1 vector has expectation phi in every coordinate, and the
// new-component event is Bernoulli(phi_{K+1}).

#include <span>
#include <vector>

#include "hycvb/rng.hpp"

namespace hycvb {

/// Normalizes log-weights in place to a probability vector (max-shifted).
void normalize_log_weights(std::span<double> values);

double log_sum_exp(std::span<const double> values);

/// K+1 probabilities; the last entry belongs to the uninstantiated component.
struct ResponsibilityVector {
  std::vector<double> values;

  std::size_t instantiated() const { return values.size() - 1; }
  double new_component_mass() const { return values.back(); }
};

struct HybridUpdate {
  enum class Kind { Truncated, NewComponent };

  Kind kind = Kind::Truncated;
  /// Renormalized phi_{1:K}; empty for NewComponent.
  std::vector<double> truncated;
  double xi_existing = 0.0;
  double xi_new = 0.0;

  bool is_new() const { return kind == Kind::NewComponent; }

  /// The K+1 vector this update stands for (truncated vector padded with a
  /// zero, or the one-hot on the new slot).
  std::vector<double> realized(std::size_t num_existing) const;
};

/// Consumes exactly one uniform draw, including in the degenerate branches
/// where xi_1 or xi_2 is zero.
HybridUpdate hybrid_update(const ResponsibilityVector& phi, Rng& rng);

}  // namespace hycvb
