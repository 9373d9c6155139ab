#include "hycvb/dcm.hpp"

#include <cassert>
#include <cmath>
#include <string>

#include "hycvb/error.hpp"

namespace hycvb {

namespace {

constexpr double kClampTolerance = 1e-6;

// Short rising factorials are summed term by term; lgamma differences lose
// digits when x is large and m small.
constexpr std::uint64_t kDirectRisingLimit = 24;

double checked_subtract(double value, double mass, const char* what) {
  double out = value - mass;
  if (out < 0.0) {
    if (out < -kClampTolerance) {
      throw AccountingError(std::string("removal drove ") + what + " to " + std::to_string(out));
    }
    out = 0.0;
  }
  return out;
}

}  // namespace

void DcmHyper::validate() const {
  if (!(beta > 0.0)) throw ArgumentError("beta must be positive");
  if (vocab_size < 1) throw ArgumentError("vocabulary size must be at least 1");
}

void ComponentStats::add_doc(const Document& doc, double weight) {
  if (weight == 0.0) return;
  for (const Entry& e : doc.entries) word_counts_[e.word] += weight * e.count;
  total_ += weight * static_cast<double>(doc.length);
}

void ComponentStats::remove_doc(const Document& doc, double weight) {
  if (weight == 0.0) return;
  for (const Entry& e : doc.entries) {
    word_counts_[e.word] = checked_subtract(word_counts_[e.word], weight * e.count, "a word count");
  }
  total_ = checked_subtract(total_, weight * static_cast<double>(doc.length), "a component total");
}

void ComponentStats::add_word(WordId w, double mass) {
  word_counts_[w] += mass;
  total_ += mass;
}

void ComponentStats::recompute_total() {
  double t = 0.0;
  for (double c : word_counts_) t += c;
  total_ = t;
}

void ComponentStats::clear() {
  std::fill(word_counts_.begin(), word_counts_.end(), 0.0);
  total_ = 0.0;
}

double log_rising(double x, std::uint64_t m) {
  assert(x > 0.0);
  if (m == 0) return 0.0;
  if (m <= kDirectRisingLimit) {
    // Product in blocks of 8 keeps the intermediate far from overflow.
    double log_sum = 0.0;
    double prod = 1.0;
    for (std::uint64_t t = 0; t < m; ++t) {
      prod *= x + static_cast<double>(t);
      if ((t & 7) == 7) {
        log_sum += std::log(prod);
        prod = 1.0;
      }
    }
    return log_sum + std::log(prod);
  }
  return std::lgamma(x + static_cast<double>(m)) - std::lgamma(x);
}

double log_predictive_doc(const Document& doc, const ComponentStats& stats, const DcmHyper& hyper) {
  const double beta = hyper.beta;
  const double vb = static_cast<double>(hyper.vocab_size) * beta;
  double lp = -log_rising(stats.total() + vb, doc.length);
  for (const Entry& e : doc.entries) lp += log_rising(stats.count(e.word) + beta, e.count);
  return lp;
}

double log_predictive_empty(const Document& doc, const DcmHyper& hyper) {
  const double beta = hyper.beta;
  const double vb = static_cast<double>(hyper.vocab_size) * beta;
  double lp = -log_rising(vb, doc.length);
  for (const Entry& e : doc.entries) lp += log_rising(beta, e.count);
  return lp;
}

}  // namespace hycvb
