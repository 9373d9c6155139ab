#pragma once

// Reference computations for the tests. They deliberately avoid the library's
// numeric paths: 50-digit arithmetic, linear-space products, statistics
// rebuilt from responsibilities rather than read from engine state.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <vector>

#include "hycvb/corpus.hpp"
#include "hycvb/dpmm.hpp"
#include "hycvb/hdplda.hpp"

namespace oracle {

using Real = boost::multiprecision::cpp_bin_float_50;

/// Sequential Polya urn: tokens drawn one at a time, each with probability
/// (n_w + b + seen_w) / (n + V b + seen). Works for fractional n_w.
inline Real polya_urn_predictive(const hycvb::Document& doc, const std::vector<double>& counts,
                                 double total, double beta, std::size_t vocab) {
  Real p = 1;
  Real seen_total = 0;
  const Real b(beta);
  const Real vb = Real(beta) * Real(vocab);
  for (const hycvb::Entry& e : doc.entries) {
    for (std::uint32_t t = 0; t < e.count; ++t) {
      p *= (Real(counts[e.word]) + b + t) / (Real(total) + vb + seen_total);
      seen_total += 1;
    }
  }
  return p;
}

inline double log_polya_urn(const hycvb::Document& doc, const std::vector<double>& counts,
                            double total, double beta, std::size_t vocab) {
  return static_cast<double>(log(polya_urn_predictive(doc, counts, total, beta, vocab)));
}

/// Zero-order responsibilities of document i written straight from the
/// definition: statistics excluding i are rebuilt from gamma in 50 digits and
/// each slot is (n_k / (n + alpha)) p(x_i | k) in linear space.
inline std::vector<double> eq4_responsibilities(const hycvb::Corpus& corpus,
                                                const std::vector<hycvb::GammaRow>& gamma,
                                                std::size_t num_components, std::size_t i,
                                                double alpha, double beta) {
  const std::size_t vocab = corpus.vocab_size;
  std::vector<Real> mass(num_components, Real(0));
  std::vector<std::vector<Real>> word(num_components, std::vector<Real>(vocab, Real(0)));
  std::vector<Real> total(num_components, Real(0));
  Real docs = 0;
  for (std::size_t j = 0; j < gamma.size(); ++j) {
    if (j == i) continue;
    for (const hycvb::GammaEntry& g : gamma[j]) {
      mass[g.component] += Real(g.weight);
      docs += Real(g.weight);
      for (const hycvb::Entry& e : corpus.docs[j].entries) {
        word[g.component][e.word] += Real(g.weight) * e.count;
        total[g.component] += Real(g.weight) * e.count;
      }
    }
  }
  const hycvb::Document& doc = corpus.docs[i];
  auto predictive = [&](const std::vector<Real>& n_w, const Real& n) {
    Real p = 1;
    Real seen = 0;
    for (const hycvb::Entry& e : doc.entries) {
      for (std::uint32_t t = 0; t < e.count; ++t) {
        p *= (n_w[e.word] + Real(beta) + t) / (n + Real(beta) * vocab + seen);
        seen += 1;
      }
    }
    return p;
  };
  std::vector<Real> w(num_components + 1);
  Real sum = 0;
  const Real denom = docs + Real(alpha);
  for (std::size_t k = 0; k < num_components; ++k) {
    w[k] = mass[k] / denom * predictive(word[k], total[k]);
    sum += w[k];
  }
  w[num_components] = Real(alpha) / denom *
                      predictive(std::vector<Real>(vocab, Real(0)), Real(0));
  sum += w[num_components];
  std::vector<double> out;
  for (const Real& x : w) out.push_back(static_cast<double>(x / sum));
  return out;
}

/// Expected topic-word counts of one full-corpus pass of fixed-topic
/// zero-order LDA: each document starts unassigned, runs `passes` sweeps over
/// its tokens with weights (n_dk + a pi_k)(N_kw + b)/(N_k + V b) against the
/// frozen globals, and the final responsibilities are summed per word.
inline std::vector<std::vector<double>> batch_expected_counts(const hycvb::Corpus& corpus,
                                                              const hycvb::HdpState& global,
                                                              const hycvb::HdpHyper& hyper,
                                                              std::size_t passes) {
  const std::size_t k_count = global.num_topics();
  const std::size_t vocab = global.vocab_size;
  std::vector<std::vector<double>> out(k_count, std::vector<double>(vocab, 0.0));
  for (const hycvb::Document& doc : corpus.docs) {
    std::vector<hycvb::WordId> tokens;
    for (const hycvb::Entry& e : doc.entries) tokens.insert(tokens.end(), e.count, e.word);
    std::vector<std::vector<double>> g(tokens.size());
    for (std::size_t pass = 0; pass < passes; ++pass) {
      for (std::size_t j = 0; j < tokens.size(); ++j) {
        std::vector<double> n(k_count, 0.0);
        for (std::size_t i = 0; i < tokens.size(); ++i) {
          if (i == j) continue;
          for (std::size_t k = 0; k < g[i].size(); ++k) n[k] += g[i][k];
        }
        std::vector<double> w(k_count);
        double sum = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
          w[k] = (n[k] + hyper.a * global.pi[k]) * (global.topic_word[k][tokens[j]] + hyper.beta) /
                 (global.topic_total[k] + static_cast<double>(vocab) * hyper.beta);
          sum += w[k];
        }
        for (double& x : w) x /= sum;
        g[j] = w;
      }
    }
    for (std::size_t j = 0; j < tokens.size(); ++j) {
      for (std::size_t k = 0; k < k_count; ++k) out[k][tokens[j]] += g[j][k];
    }
  }
  return out;
}

inline double rel_error(double got, double want) {
  if (want == 0.0) return std::abs(got);
  return std::abs(got - want) / std::abs(want);
}

}  // namespace oracle
