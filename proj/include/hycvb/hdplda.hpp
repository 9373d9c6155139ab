#pragma once

// Mixed-membership HDP-LDA with stochastic zero-order collapsed inference.
//
// Global state holds expected topic-word counts N_kw, per-topic usage mass
// m_k, and stick weights pi (plus the unbroken remainder pi_rest). Each
// minibatch runs local passes over the tokens of every document, then blends
// the batch statistics into the globals with step size rho_t.
//
// Modes:
//   HCSVB0  truncation-free: every token update carries a new-topic slot and
//           goes through hybrid_update; births happen on the committing pass
//   PCSVB0  the same scheme at a fixed number of topics (no new-topic slot)
//   SCVB0   fixed-K LDA with a symmetric document prior (pi_k = 1/K)

#include <cstdint>
#include <string_view>
#include <vector>

#include "hycvb/corpus.hpp"
#include "hycvb/hybrid.hpp"
#include "hycvb/rng.hpp"

namespace hycvb {

struct HdpHyper {
  double a = 1.0;       // document-level concentration
  double alpha0 = 1.0;  // top-level stick concentration
  double beta = 0.01;   // topic-word smoothing
  double tau0 = 64.0;
  double kappa = 0.6;
  std::size_t batch_size = 60;
  /// Uncommitted local passes run before the committing pass.
  std::size_t burn_in_passes = 5;
  double prune_threshold = 1e-3;

  void validate() const;
};

enum class HdpMode { HCSVB0, PCSVB0, SCVB0 };

std::string_view to_string(HdpMode mode);

struct HdpState {
  std::size_t vocab_size = 0;
  /// Number of training documents D (batch statistics are scaled by D/|B|).
  std::size_t corpus_docs = 0;
  std::vector<std::vector<double>> topic_word;  // N_kw, K x V
  std::vector<double> topic_total;              // N_k
  std::vector<double> usage;                    // m_k
  std::vector<double> pi;                       // stick weights of instantiated topics
  double pi_rest = 1.0;
  std::uint64_t t = 0;

  std::size_t num_topics() const { return topic_total.size(); }

  /// K = 0, pi_rest = 1.
  static HdpState empty(std::size_t vocab_size, std::size_t corpus_docs);

  /// Fixed K topics with Gamma(1)-distributed pseudo-counts and equal usage.
  /// Stick weights follow the mode (uniform for SCVB0).
  static HdpState with_topics(std::size_t vocab_size, std::size_t corpus_docs, std::size_t num_topics,
                              HdpMode mode, const HdpHyper& hyper, Rng& rng);

  /// Appends a zero-statistics topic.
  void add_topic();
};

/// rho_t = (tau0 + t)^(-kappa), capped at 1.
double step_size(std::uint64_t t, const HdpHyper& hyper);

/// Orders topics by descending usage, then sets
///   v_k = (1 + m_k) / (1 + alpha0 + sum_{l>=k} m_l)
///   pi_k = v_k prod_{l<k} (1 - v_l),  pi_rest = prod_{l<=K} (1 - v_l)
/// i.e. the posterior means of Beta(1 + m_k, alpha0 + sum_{l>k} m_l) sticks.
void update_stick_weights(HdpState& state, const HdpHyper& hyper);

/// Uniform weights 1/K with no remainder (the SCVB0 document prior).
void set_uniform_weights(HdpState& state);

/// Zero-order responsibilities of one token over K topics plus the new-topic
/// slot. `doc_counts` excludes the token itself.
ResponsibilityVector token_responsibilities(WordId w, std::span<const double> doc_counts,
                                            const HdpState& state, const HdpHyper& hyper);

/// Deletes topics with usage below threshold, keeping at least one.
std::size_t prune_topics(HdpState& state, double threshold);

struct StepReport {
  double rho = 0.0;
  std::size_t k_before = 0;
  std::size_t k_after = 0;
  std::size_t births = 0;
  std::size_t pruned = 0;
  std::size_t docs = 0;
  std::uint64_t tokens = 0;
  double seconds = 0.0;
  /// Filled when requested: committed per-token responsibilities for each
  /// batch document, tokens in Document::tokens() order.
  std::vector<std::vector<std::vector<double>>> token_gamma;
};

struct StepOptions {
  bool record_responsibilities = false;
};

/// One stochastic step over a minibatch. Throws ArgumentError on an empty batch.
StepReport minibatch_step(HdpState& state, std::span<const Document> batch, const HdpHyper& hyper,
                          HdpMode mode, Rng& rng, const StepOptions& options = {});

/// Topic-frozen local inference used for held-out fold-in: zero-order
/// updates without a new-topic slot until the document counts move by less
/// than `tolerance` or `max_passes` is reached. Returns n_dk.
std::vector<double> fold_in(const Document& doc, const HdpState& state, const HdpHyper& hyper,
                            double tolerance = 1e-6, std::size_t max_passes = 100);

struct LdaSynthetic {
  Corpus corpus;
  std::vector<std::vector<double>> topics;
};

/// phi_k ~ Dir(beta), theta_d ~ Dir(doc_alpha), tokens ~ Cat(theta_d . phi).
LdaSynthetic generate_lda_synthetic(std::size_t num_topics, std::size_t num_docs,
                                    std::size_t vocab_size, std::size_t doc_length,
                                    double doc_alpha, double beta, std::uint64_t seed);

}  // namespace hycvb
