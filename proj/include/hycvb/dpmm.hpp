#pragma once

// Single-membership Dirichlet-process mixture of Polya components.
//
// Three engines share one state representation:
//   hcvb0_sweep  zero-order collapsed variational updates with the hybrid
//                truncated/new-component step (truncation-free)
//   cgs_sweep    collapsed Gibbs sampling over hard assignments
//   tcvb0_sweep  zero-order collapsed variational updates at a fixed
//                truncation T
//
// Component "document mass" (sum of responsibilities) drives the CRP prior
// ratio; token-level ComponentStats drive the Polya predictive.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "hycvb/corpus.hpp"
#include "hycvb/dcm.hpp"
#include "hycvb/hybrid.hpp"
#include "hycvb/rng.hpp"

namespace hycvb {

struct DpmmHyper {
  double alpha = 1.0;
  DcmHyper dcm;

  void validate() const;
};

struct GammaEntry {
  std::uint32_t component;
  double weight;

  friend bool operator==(const GammaEntry&, const GammaEntry&) = default;
};

/// Sparse responsibility row: strictly positive weights summing to one.
/// An empty row marks a document that has not been assigned yet.
using GammaRow = std::vector<GammaEntry>;

struct DpmmState {
  std::shared_ptr<const Corpus> corpus;
  std::vector<double> doc_mass;          // sum_i gamma_ik per component
  std::vector<ComponentStats> stats;     // expected token counts per component
  std::vector<GammaRow> gamma;           // one row per document
  std::optional<std::vector<std::uint32_t>> assignments;  // hard mode only

  /// K = 0, every row unassigned. `hard` selects the Gibbs representation.
  static DpmmState empty(std::shared_ptr<const Corpus> corpus, bool hard = false);

  /// Exactly T components with Dirichlet(1)-perturbed rows.
  static DpmmState truncated(std::shared_ptr<const Corpus> corpus, std::size_t T, Rng& rng);

  std::size_t num_components() const { return doc_mass.size(); }
  std::size_t num_docs() const { return gamma.size(); }
  const Document& doc(std::size_t i) const { return corpus->docs[i]; }
};

/// Removes document i's current fractional contribution from the component
/// statistics and clears its row.
void remove_contribution(DpmmState& state, std::size_t i);

/// Zero-order responsibilities of document i over the K instantiated
/// components plus the new-component slot. Document i must already be
/// removed. With K = 0 the result is the one-vector on the new slot.
ResponsibilityVector cvb0_responsibilities(const DpmmState& state, std::size_t i,
                                           const DpmmHyper& hyper);

/// Writes the update into row i and adds the document back with the row's
/// weights. NewComponent creates component K and assigns the document to it.
void apply_update(DpmmState& state, std::size_t i, const HybridUpdate& update);

/// Deletes components whose document mass is below `threshold`, renormalizes
/// the affected rows, relabels the survivors, and recomputes statistics.
/// Never empties a populated model: the heaviest component always survives.
std::size_t prune_components(DpmmState& state, double threshold);

/// Rebuilds doc_mass and stats from the gamma rows.
void recompute_statistics(DpmmState& state);

struct SweepOptions {
  double prune_threshold = 1e-3;
  /// Rebuild statistics from gamma at the end of the sweep.
  bool recompute = true;
};

struct SweepReport {
  std::size_t k_before = 0;
  std::size_t k_after = 0;
  std::size_t new_components = 0;
  std::size_t pruned = 0;
  std::size_t updates = 0;
  /// Updates with xi_1 > xi_2 (existing components outweigh a new one).
  std::size_t existing_dominant = 0;
  double seconds = 0.0;
};

SweepReport hcvb0_sweep(DpmmState& state, const DpmmHyper& hyper, Rng& rng,
                        const SweepOptions& options = {});

/// Requires hard mode (see DpmmState::empty).
SweepReport cgs_sweep(DpmmState& state, const DpmmHyper& hyper, Rng& rng,
                      const SweepOptions& options = {});

/// Fixed-truncation sweep in document order; K never changes. The prior
/// term is the finite symmetric Dirichlet(alpha / T) collapsed ratio.
SweepReport tcvb0_sweep(DpmmState& state, const DpmmHyper& hyper,
                        const SweepOptions& options = {});

/// Hard label per document: argmax of its gamma row.
std::vector<std::uint32_t> map_labels(const DpmmState& state);

struct SyntheticCorpus {
  Corpus corpus;
  std::vector<std::uint32_t> labels;
  std::vector<double> mixture_weights;
};

/// theta ~ Dir(alpha / K), phi_k ~ Dir(beta), z_i ~ Cat(theta),
/// x_i ~ Multinomial(doc_length, phi_{z_i}).
SyntheticCorpus generate_synthetic(std::size_t num_components, std::size_t num_docs,
                                   std::size_t vocab_size, std::size_t doc_length, double alpha,
                                   double beta, std::uint64_t seed);

/// Component statistics without responsibilities: what evaluation and the
/// snapshot file need.
struct DpmmModel {
  DpmmHyper hyper;
  std::vector<double> doc_mass;
  std::vector<ComponentStats> stats;

  std::size_t num_components() const { return doc_mass.size(); }
};

DpmmModel snapshot(const DpmmState& state, const DpmmHyper& hyper);

}  // namespace hycvb
