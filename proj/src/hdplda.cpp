#include "hycvb/hdplda.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <numeric>

#include "hycvb/error.hpp"

namespace hycvb {

namespace {

using Clock = std::chrono::steady_clock;

// Per-document local state during a minibatch or a fold-in.
struct LocalDoc {
  std::vector<WordId> tokens;
  std::vector<std::vector<double>> gamma;  // per token, may be shorter than K
  std::vector<double> counts;              // n_dk

  explicit LocalDoc(const Document& doc, std::size_t num_topics)
      : tokens(doc.tokens()), gamma(tokens.size()), counts(num_topics, 0.0) {}

  void remove(std::size_t j) {
    for (std::size_t k = 0; k < gamma[j].size(); ++k) {
      counts[k] -= gamma[j][k];
      if (counts[k] < 0.0) counts[k] = 0.0;
    }
  }

  void add(std::size_t j) {
    for (std::size_t k = 0; k < gamma[j].size(); ++k) counts[k] += gamma[j][k];
  }
};

double word_likelihood(const HdpState& state, std::size_t k, WordId w, double beta) {
  return (state.topic_word[k][w] + beta) /
         (state.topic_total[k] + static_cast<double>(state.vocab_size) * beta);
}

// Normalized zero-order weights over the K instantiated topics only.
void fixed_topic_weights(WordId w, std::span<const double> doc_counts, const HdpState& state,
                         const HdpHyper& hyper, std::vector<double>& out) {
  const std::size_t k_count = state.num_topics();
  out.resize(k_count);
  double sum = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    out[k] = (doc_counts[k] + hyper.a * state.pi[k]) * word_likelihood(state, k, w, hyper.beta);
    sum += out[k];
  }
  for (double& v : out) v /= sum;
}

void permute_topics(HdpState& state, const std::vector<std::size_t>& order) {
  std::vector<std::vector<double>> topic_word;
  std::vector<double> topic_total, usage;
  topic_word.reserve(order.size());
  for (std::size_t k : order) {
    topic_word.push_back(std::move(state.topic_word[k]));
    topic_total.push_back(state.topic_total[k]);
    usage.push_back(state.usage[k]);
  }
  state.topic_word = std::move(topic_word);
  state.topic_total = std::move(topic_total);
  state.usage = std::move(usage);
}

}  // namespace

void HdpHyper::validate() const {
  if (!(a > 0.0)) throw ArgumentError("document concentration a must be positive");
  if (!(alpha0 > 0.0)) throw ArgumentError("stick concentration alpha0 must be positive");
  if (!(beta > 0.0)) throw ArgumentError("beta must be positive");
  if (!(tau0 >= 0.0)) throw ArgumentError("tau0 must be nonnegative");
  if (!(kappa > 0.5 && kappa <= 1.0)) throw ArgumentError("kappa must lie in (0.5, 1]");
  if (batch_size < 1) throw ArgumentError("batch size must be at least 1");
}

std::string_view to_string(HdpMode mode) {
  switch (mode) {
    case HdpMode::HCSVB0: return "hcsvb0";
    case HdpMode::PCSVB0: return "pcsvb0";
    case HdpMode::SCVB0: return "scvb0";
  }
  return "?";
}

HdpState HdpState::empty(std::size_t vocab_size, std::size_t corpus_docs) {
  HdpState state;
  state.vocab_size = vocab_size;
  state.corpus_docs = corpus_docs;
  return state;
}

HdpState HdpState::with_topics(std::size_t vocab_size, std::size_t corpus_docs,
                               std::size_t num_topics, HdpMode mode, const HdpHyper& hyper,
                               Rng& rng) {
  if (num_topics == 0) throw ArgumentError("number of topics must be at least 1");
  HdpState state = empty(vocab_size, corpus_docs);
  for (std::size_t k = 0; k < num_topics; ++k) {
    state.add_topic();
    for (double& c : state.topic_word[k]) c = rng.gamma(1.0);
    state.topic_total[k] = std::accumulate(state.topic_word[k].begin(), state.topic_word[k].end(), 0.0);
    state.usage[k] = static_cast<double>(corpus_docs) / static_cast<double>(num_topics);
  }
  if (mode == HdpMode::SCVB0) {
    set_uniform_weights(state);
  } else {
    update_stick_weights(state, hyper);
  }
  return state;
}

void HdpState::add_topic() {
  topic_word.emplace_back(vocab_size, 0.0);
  topic_total.push_back(0.0);
  usage.push_back(0.0);
  pi.push_back(0.0);
}

double step_size(std::uint64_t t, const HdpHyper& hyper) {
  return std::min(1.0, std::pow(hyper.tau0 + static_cast<double>(t), -hyper.kappa));
}

void update_stick_weights(HdpState& state, const HdpHyper& hyper) {
  const std::size_t k_count = state.num_topics();
  std::vector<std::size_t> order(k_count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return state.usage[x] > state.usage[y]; });
  permute_topics(state, order);

  // tail[k] = sum_{l>=k} m_l
  std::vector<double> tail(k_count + 1, 0.0);
  for (std::size_t k = k_count; k-- > 0;) tail[k] = tail[k + 1] + state.usage[k];

  state.pi.assign(k_count, 0.0);
  double remaining = 1.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    const double v = (1.0 + state.usage[k]) / (1.0 + hyper.alpha0 + tail[k]);
    state.pi[k] = v * remaining;
    remaining *= 1.0 - v;
  }
  state.pi_rest = remaining;
}

void set_uniform_weights(HdpState& state) {
  const std::size_t k_count = state.num_topics();
  state.pi.assign(k_count, 1.0 / static_cast<double>(k_count));
  state.pi_rest = 0.0;
}

ResponsibilityVector token_responsibilities(WordId w, std::span<const double> doc_counts,
                                            const HdpState& state, const HdpHyper& hyper) {
  const std::size_t k_count = state.num_topics();
  ResponsibilityVector phi;
  phi.values.resize(k_count + 1);
  double sum = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    phi.values[k] = (doc_counts[k] + hyper.a * state.pi[k]) * word_likelihood(state, k, w, hyper.beta);
    sum += phi.values[k];
  }
  // A fresh topic predicts every word with probability 1/V.
  phi.values[k_count] = hyper.a * state.pi_rest / static_cast<double>(state.vocab_size);
  sum += phi.values[k_count];
  if (sum <= 0.0) {
    // pi_rest == 0 and no topics: nothing can explain the token but a new topic.
    std::fill(phi.values.begin(), phi.values.end(), 0.0);
    phi.values.back() = 1.0;
    return phi;
  }
  for (double& v : phi.values) v /= sum;
  return phi;
}

std::size_t prune_topics(HdpState& state, double threshold) {
  const std::size_t k_count = state.num_topics();
  if (k_count == 0) return 0;
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < k_count; ++k) {
    if (state.usage[k] >= threshold) keep.push_back(k);
  }
  if (keep.size() == k_count) return 0;
  if (keep.empty()) {
    keep.push_back(static_cast<std::size_t>(
        std::max_element(state.usage.begin(), state.usage.end()) - state.usage.begin()));
  }
  std::vector<double> pi;
  for (std::size_t k : keep) pi.push_back(state.pi[k]);
  permute_topics(state, keep);
  // Removed sticks return to the remainder so the weights still sum to one.
  double dropped = 1.0 - state.pi_rest;
  for (double p : pi) dropped -= p;
  state.pi = std::move(pi);
  state.pi_rest += std::max(0.0, dropped);
  return k_count - keep.size();
}

StepReport minibatch_step(HdpState& state, std::span<const Document> batch, const HdpHyper& hyper,
                          HdpMode mode, Rng& rng, const StepOptions& options) {
  if (batch.empty()) throw ArgumentError("minibatch is empty");
  const auto start = Clock::now();
  StepReport report;
  report.k_before = state.num_topics();
  report.rho = step_size(state.t, hyper);
  report.docs = batch.size();

  const std::size_t vocab = state.vocab_size;
  std::vector<std::vector<double>> batch_word(state.num_topics(), std::vector<double>(vocab, 0.0));
  std::vector<double> batch_usage(state.num_topics(), 0.0);
  const double stick_split = 1.0 / (1.0 + hyper.alpha0);

  std::vector<double> weights;
  for (const Document& doc : batch) {
    LocalDoc local(doc, state.num_topics());
    report.tokens += local.tokens.size();
    const std::size_t passes = hyper.burn_in_passes + 1;
    for (std::size_t pass = 0; pass < passes; ++pass) {
      const bool committing = pass + 1 == passes;
      for (std::size_t j = 0; j < local.tokens.size(); ++j) {
        const WordId w = local.tokens[j];
        local.remove(j);
        if (mode != HdpMode::HCSVB0) {
          fixed_topic_weights(w, local.counts, state, hyper, weights);
          local.gamma[j] = weights;
          local.add(j);
          continue;
        }
        ResponsibilityVector phi = token_responsibilities(w, local.counts, state, hyper);
        HybridUpdate update = hybrid_update(phi, rng);
        if (!update.is_new()) {
          local.gamma[j] = std::move(update.truncated);
        } else if (committing) {
          // Birth: the new topic takes the expected Beta(1, alpha0) share of
          // the remaining stick until the next stick update.
          state.add_topic();
          state.pi.back() = state.pi_rest * stick_split;
          state.pi_rest -= state.pi.back();
          local.counts.push_back(0.0);
          batch_word.emplace_back(vocab, 0.0);
          batch_usage.push_back(0.0);
          local.gamma[j].assign(state.num_topics(), 0.0);
          local.gamma[j].back() = 1.0;
          ++report.births;
        } else {
          local.gamma[j].clear();
        }
        local.add(j);
      }
    }

    const double length = static_cast<double>(local.tokens.size());
    for (std::size_t j = 0; j < local.tokens.size(); ++j) {
      const std::vector<double>& g = local.gamma[j];
      for (std::size_t k = 0; k < g.size(); ++k) batch_word[k][local.tokens[j]] += g[k];
    }
    for (std::size_t k = 0; k < local.counts.size(); ++k) batch_usage[k] += local.counts[k] / length;
    if (options.record_responsibilities) report.token_gamma.push_back(std::move(local.gamma));
  }

  const double rho = report.rho;
  const double scale = static_cast<double>(state.corpus_docs) / static_cast<double>(batch.size());
  for (std::size_t k = 0; k < state.num_topics(); ++k) {
    std::vector<double>& row = state.topic_word[k];
    double total = 0.0;
    for (std::size_t w = 0; w < vocab; ++w) {
      row[w] = (1.0 - rho) * row[w] + rho * scale * batch_word[k][w];
      total += row[w];
    }
    state.topic_total[k] = total;
    state.usage[k] = (1.0 - rho) * state.usage[k] + rho * scale * batch_usage[k];
  }

  if (mode == HdpMode::HCSVB0) report.pruned = prune_topics(state, hyper.prune_threshold);
  if (mode == HdpMode::SCVB0) {
    set_uniform_weights(state);
  } else {
    update_stick_weights(state, hyper);
  }
  ++state.t;
  report.k_after = state.num_topics();
  report.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

std::vector<double> fold_in(const Document& doc, const HdpState& state, const HdpHyper& hyper,
                            double tolerance, std::size_t max_passes) {
  LocalDoc local(doc, state.num_topics());
  std::vector<double> weights;
  std::vector<double> previous;
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    previous = local.counts;
    for (std::size_t j = 0; j < local.tokens.size(); ++j) {
      local.remove(j);
      fixed_topic_weights(local.tokens[j], local.counts, state, hyper, weights);
      local.gamma[j] = weights;
      local.add(j);
    }
    double change = 0.0;
    for (std::size_t k = 0; k < local.counts.size(); ++k) {
      change = std::max(change, std::abs(local.counts[k] - previous[k]));
    }
    if (change < tolerance) break;
  }
  return local.counts;
}

LdaSynthetic generate_lda_synthetic(std::size_t num_topics, std::size_t num_docs,
                                    std::size_t vocab_size, std::size_t doc_length,
                                    double doc_alpha, double beta, std::uint64_t seed) {
  if (num_topics == 0 || num_docs == 0 || vocab_size == 0 || doc_length == 0 ||
      !(doc_alpha > 0.0) || !(beta > 0.0)) {
    throw ArgumentError("synthetic corpus parameters must all be positive");
  }
  Rng rng(seed);
  LdaSynthetic out;
  for (std::size_t k = 0; k < num_topics; ++k) out.topics.push_back(rng.dirichlet(vocab_size, beta));
  out.corpus.vocab_size = vocab_size;
  std::vector<double> mix(vocab_size);
  for (std::size_t d = 0; d < num_docs; ++d) {
    std::vector<double> theta = rng.dirichlet(num_topics, doc_alpha);
    std::fill(mix.begin(), mix.end(), 0.0);
    for (std::size_t k = 0; k < num_topics; ++k) {
      for (std::size_t w = 0; w < vocab_size; ++w) mix[w] += theta[k] * out.topics[k][w];
    }
    std::vector<std::uint32_t> counts = rng.multinomial(mix, doc_length);
    std::vector<Entry> entries;
    for (std::size_t w = 0; w < vocab_size; ++w) {
      if (counts[w] > 0) entries.push_back({static_cast<WordId>(w), counts[w]});
    }
    out.corpus.docs.push_back(Document::from_counts(d, std::move(entries)));
  }
  return out;
}

}  // namespace hycvb
