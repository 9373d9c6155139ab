#pragma once

// Held-out evaluation. Every test document is split at the token level into
// an estimation part (latent variables are inferred from it with the model
// frozen) and a scoring part whose per-token predictive gives the perplexity.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hycvb/corpus.hpp"
#include "hycvb/dpmm.hpp"
#include "hycvb/hdplda.hpp"

namespace hycvb {

struct HeldOutDoc {
  Document estimate;
  Document score;
};

struct HeldOutSet {
  std::vector<HeldOutDoc> docs;
  /// Test documents too short to split.
  std::size_t skipped = 0;
};

/// Splits every test document with split_document; document i uses a seed
/// derived from (seed, i). Documents with fewer than two tokens are skipped.
HeldOutSet make_heldout_set(const Corpus& test, double estimation_fraction, std::uint64_t seed);

struct PerplexityResult {
  double perplexity = 0.0;
  double log_likelihood = 0.0;
  std::uint64_t tokens = 0;
  std::size_t docs = 0;
  std::size_t skipped = 0;
};

/// q(k) is proportional to the CRP mass times the Polya predictive of the
/// estimation part, including the prior-predictive new-component slot; each
/// scored token has probability sum_k q(k) (n_kw + b) / (n_k + V b), with
/// 1/V for the new slot.
PerplexityResult heldout_single_membership(const DpmmModel& model, const HeldOutSet& heldout);

/// Topic proportions theta_dk proportional to n_dk + a pi_k from fold_in on
/// the estimation part; scored tokens use sum_k theta_dk (N_kw + b) / (N_k + V b).
PerplexityResult heldout_mixed_membership(const HdpState& state, const HdpHyper& hyper,
                                          const HeldOutSet& heldout);

struct MetricsRecord {
  std::string run_id;
  std::string algorithm;
  std::uint64_t iteration = 0;
  std::uint64_t docs_processed = 0;
  double wall_clock_s = 0.0;
  std::uint64_t num_components = 0;
  double heldout_perplexity = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

inline constexpr const char* kMetricsHeader =
    "run_id,algorithm,iteration,docs_processed,wall_clock_s,K,heldout_perplexity,seed";

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

void write_metrics_csv(std::span<const MetricsRecord> records, std::ostream& out);
std::vector<MetricsRecord> parse_metrics_csv(std::istream& in);

}  // namespace hycvb
