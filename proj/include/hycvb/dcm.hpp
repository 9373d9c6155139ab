#pragma once

// Dirichlet-multinomial (Polya) component model. Statistics hold expected,
// possibly fractional, token counts; predictives are evaluated in log space.

#include <cstdint>
#include <utility>
#include <vector>

#include "hycvb/corpus.hpp"

namespace hycvb {

/// Symmetric Dirichlet(beta) prior over a vocabulary of size V.
struct DcmHyper {
  double beta = 0.1;
  std::size_t vocab_size = 1;

  void validate() const;
};

/// Expected token counts of one component. Dense over the vocabulary.
class ComponentStats {
 public:
  ComponentStats() = default;
  explicit ComponentStats(std::size_t vocab_size) : word_counts_(vocab_size, 0.0) {}
  ComponentStats(std::vector<double> counts, double total)
      : word_counts_(std::move(counts)), total_(total) {}

  double count(WordId w) const { return word_counts_[w]; }
  double total() const { return total_; }
  std::size_t vocab_size() const { return word_counts_.size(); }
  const std::vector<double>& counts() const { return word_counts_; }

  /// n_kw += weight * x_w for each entry; n_k += weight * length.
  void add_doc(const Document& doc, double weight);

  /// Inverse of add_doc. Results in [-1e-6, 0) are clamped to zero; anything
  /// more negative throws AccountingError.
  void remove_doc(const Document& doc, double weight);

  /// Adds mass to a single word.
  void add_word(WordId w, double mass);

  /// Re-derives the cached total from the per-word counts.
  void recompute_total();

  void clear();

 private:
  std::vector<double> word_counts_;
  double total_ = 0.0;
};

/// log Gamma(x + m) - log Gamma(x) for x > 0 and integer m >= 0.
double log_rising(double x, std::uint64_t m);

/// Log Polya predictive of a whole document under a component:
///   log G(n_k + V b) - log G(n_k + L + V b) + sum_w [log G(n_kw + x_w + b) - log G(n_kw + b)]
double log_predictive_doc(const Document& doc, const ComponentStats& stats, const DcmHyper& hyper);

/// Prior predictive: log_predictive_doc against all-zero statistics.
double log_predictive_empty(const Document& doc, const DcmHyper& hyper);

/// Single-token predictive (n_kw + b) / (n_k + V b).
inline double token_predictive(WordId w, const ComponentStats& stats, const DcmHyper& hyper) {
  return (stats.count(w) + hyper.beta) /
         (stats.total() + static_cast<double>(hyper.vocab_size) * hyper.beta);
}

}  // namespace hycvb
