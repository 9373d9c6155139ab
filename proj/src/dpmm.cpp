#include "hycvb/dpmm.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "hycvb/error.hpp"

namespace hycvb {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void add_component(DpmmState& state) {
  state.doc_mass.push_back(0.0);
  state.stats.emplace_back(state.corpus->vocab_size);
}

// Mass of document i goes back into the statistics according to its row.
void add_row(DpmmState& state, std::size_t i) {
  const Document& doc = state.doc(i);
  for (const GammaEntry& g : state.gamma[i]) {
    state.stats[g.component].add_doc(doc, g.weight);
    state.doc_mass[g.component] += g.weight;
  }
}

std::vector<std::size_t> shuffled_order(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  return order;
}

void finish_sweep(DpmmState& state, const SweepOptions& options, SweepReport& report) {
  report.pruned = prune_components(state, options.prune_threshold);
  if (options.recompute && report.pruned == 0) recompute_statistics(state);
  report.k_after = state.num_components();
}

}  // namespace

void DpmmHyper::validate() const {
  if (!(alpha > 0.0)) throw ArgumentError("alpha must be positive");
  dcm.validate();
}

DpmmState DpmmState::empty(std::shared_ptr<const Corpus> corpus, bool hard) {
  DpmmState state;
  state.gamma.resize(corpus->docs.size());
  if (hard) {
    state.assignments.emplace(corpus->docs.size(), std::numeric_limits<std::uint32_t>::max());
  }
  state.corpus = std::move(corpus);
  return state;
}

DpmmState DpmmState::truncated(std::shared_ptr<const Corpus> corpus, std::size_t T, Rng& rng) {
  if (T == 0) throw ArgumentError("truncation level must be at least 1");
  DpmmState state = empty(std::move(corpus));
  for (std::size_t k = 0; k < T; ++k) add_component(state);
  for (std::size_t i = 0; i < state.num_docs(); ++i) {
    std::vector<double> row = rng.dirichlet(T, 1.0);
    for (std::size_t k = 0; k < T; ++k) {
      if (row[k] > 0.0) state.gamma[i].push_back({static_cast<std::uint32_t>(k), row[k]});
    }
  }
  recompute_statistics(state);
  return state;
}

void remove_contribution(DpmmState& state, std::size_t i) {
  const Document& doc = state.doc(i);
  for (const GammaEntry& g : state.gamma[i]) {
    state.stats[g.component].remove_doc(doc, g.weight);
    double& mass = state.doc_mass[g.component];
    mass -= g.weight;
    if (mass < 0.0) {
      if (mass < -1e-6) throw AccountingError("component document mass went negative");
      mass = 0.0;
    }
  }
  state.gamma[i].clear();
}

ResponsibilityVector cvb0_responsibilities(const DpmmState& state, std::size_t i,
                                           const DpmmHyper& hyper) {
  const std::size_t k_count = state.num_components();
  const Document& doc = state.doc(i);
  ResponsibilityVector phi;
  phi.values.resize(k_count + 1);
  // log(n_.^{-i} + alpha) is shared by every slot and cancels on normalization.
  for (std::size_t k = 0; k < k_count; ++k) {
    const double mass = state.doc_mass[k];
    phi.values[k] = mass > 0.0 ? std::log(mass) + log_predictive_doc(doc, state.stats[k], hyper.dcm)
                               : -std::numeric_limits<double>::infinity();
  }
  phi.values[k_count] = std::log(hyper.alpha) + log_predictive_empty(doc, hyper.dcm);
  normalize_log_weights(phi.values);
  return phi;
}

void apply_update(DpmmState& state, std::size_t i, const HybridUpdate& update) {
  GammaRow& row = state.gamma[i];
  row.clear();
  if (update.is_new()) {
    add_component(state);
    row.push_back({static_cast<std::uint32_t>(state.num_components() - 1), 1.0});
  } else {
    assert(update.truncated.size() == state.num_components());
    for (std::size_t k = 0; k < update.truncated.size(); ++k) {
      if (update.truncated[k] > 0.0) row.push_back({static_cast<std::uint32_t>(k), update.truncated[k]});
    }
  }
  add_row(state, i);
  if (state.assignments) {
    (*state.assignments)[i] = row.size() == 1 ? row.front().component
                                              : std::numeric_limits<std::uint32_t>::max();
  }
}

void recompute_statistics(DpmmState& state) {
  std::fill(state.doc_mass.begin(), state.doc_mass.end(), 0.0);
  for (ComponentStats& s : state.stats) s.clear();
  for (std::size_t i = 0; i < state.num_docs(); ++i) add_row(state, i);
}

std::size_t prune_components(DpmmState& state, double threshold) {
  const std::size_t k_count = state.num_components();
  if (k_count == 0) return 0;

  std::vector<bool> keep(k_count);
  std::size_t survivors = 0;
  for (std::size_t k = 0; k < k_count; ++k) {
    keep[k] = state.doc_mass[k] >= threshold;
    survivors += keep[k];
  }
  if (survivors == k_count) return 0;
  if (survivors == 0) {
    // Only reachable with an unassigned state or an extreme threshold.
    auto heaviest = std::max_element(state.doc_mass.begin(), state.doc_mass.end());
    if (*heaviest > 0.0) {
      keep[static_cast<std::size_t>(heaviest - state.doc_mass.begin())] = true;
      survivors = 1;
    }
  }

  std::vector<std::uint32_t> relabel(k_count, std::numeric_limits<std::uint32_t>::max());
  std::uint32_t next = 0;
  std::uint32_t heaviest_survivor = 0;
  double heaviest_mass = -1.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    if (!keep[k]) continue;
    if (state.doc_mass[k] > heaviest_mass) {
      heaviest_mass = state.doc_mass[k];
      heaviest_survivor = next;
    }
    relabel[k] = next++;
  }

  for (std::size_t i = 0; i < state.num_docs(); ++i) {
    GammaRow& row = state.gamma[i];
    if (row.empty()) continue;
    GammaRow kept;
    double sum = 0.0;
    for (const GammaEntry& g : row) {
      if (!keep[g.component]) continue;
      kept.push_back({relabel[g.component], g.weight});
      sum += g.weight;
    }
    if (kept.empty()) {
      kept.push_back({heaviest_survivor, 1.0});
    } else if (kept.size() != row.size()) {
      for (GammaEntry& g : kept) g.weight /= sum;
    }
    row = std::move(kept);
    if (state.assignments) {
      (*state.assignments)[i] = row.size() == 1 ? row.front().component
                                                : std::numeric_limits<std::uint32_t>::max();
    }
  }

  std::vector<double> mass;
  std::vector<ComponentStats> stats;
  for (std::size_t k = 0; k < k_count; ++k) {
    if (!keep[k]) continue;
    mass.push_back(state.doc_mass[k]);
    stats.push_back(std::move(state.stats[k]));
  }
  state.doc_mass = std::move(mass);
  state.stats = std::move(stats);
  recompute_statistics(state);
  return k_count - survivors;
}

SweepReport hcvb0_sweep(DpmmState& state, const DpmmHyper& hyper, Rng& rng,
                        const SweepOptions& options) {
  const auto start = Clock::now();
  SweepReport report;
  report.k_before = state.num_components();
  for (std::size_t i : shuffled_order(state.num_docs(), rng)) {
    remove_contribution(state, i);
    ResponsibilityVector phi = cvb0_responsibilities(state, i, hyper);
    HybridUpdate update = hybrid_update(phi, rng);
    report.existing_dominant += update.xi_existing > update.xi_new;
    report.new_components += update.is_new();
    ++report.updates;
    apply_update(state, i, update);
  }
  finish_sweep(state, options, report);
  report.seconds = elapsed(start);
  return report;
}

SweepReport cgs_sweep(DpmmState& state, const DpmmHyper& hyper, Rng& rng,
                      const SweepOptions& options) {
  if (!state.assignments) throw ArgumentError("collapsed Gibbs sampling needs a hard-assignment state");
  const auto start = Clock::now();
  SweepReport report;
  report.k_before = state.num_components();
  for (std::size_t i : shuffled_order(state.num_docs(), rng)) {
    remove_contribution(state, i);
    ResponsibilityVector phi = cvb0_responsibilities(state, i, hyper);
    const std::size_t z = rng.categorical(phi.values);
    const double xi_new = phi.new_component_mass();
    report.existing_dominant += (1.0 - xi_new) > xi_new;
    ++report.updates;

    HybridUpdate update;
    update.xi_new = xi_new;
    update.xi_existing = 1.0 - xi_new;
    if (z == state.num_components()) {
      update.kind = HybridUpdate::Kind::NewComponent;
      ++report.new_components;
    } else {
      update.truncated.assign(state.num_components(), 0.0);
      update.truncated[z] = 1.0;
    }
    apply_update(state, i, update);
  }
  finish_sweep(state, options, report);
  report.seconds = elapsed(start);
  return report;
}

SweepReport tcvb0_sweep(DpmmState& state, const DpmmHyper& hyper, const SweepOptions& options) {
  const auto start = Clock::now();
  SweepReport report;
  const std::size_t k_count = state.num_components();
  report.k_before = k_count;
  const double prior = hyper.alpha / static_cast<double>(k_count);
  std::vector<double> logw(k_count);
  for (std::size_t i = 0; i < state.num_docs(); ++i) {
    remove_contribution(state, i);
    const Document& doc = state.doc(i);
    for (std::size_t k = 0; k < k_count; ++k) {
      logw[k] = std::log(state.doc_mass[k] + prior) +
                log_predictive_doc(doc, state.stats[k], hyper.dcm);
    }
    normalize_log_weights(logw);
    HybridUpdate update;
    update.truncated = logw;
    update.xi_existing = 1.0;
    apply_update(state, i, update);
    ++report.updates;
    ++report.existing_dominant;
  }
  // Fixed truncation: no pruning, only the drift guard.
  if (options.recompute) recompute_statistics(state);
  report.k_after = state.num_components();
  report.seconds = elapsed(start);
  return report;
}

std::vector<std::uint32_t> map_labels(const DpmmState& state) {
  std::vector<std::uint32_t> labels(state.num_docs(), std::numeric_limits<std::uint32_t>::max());
  for (std::size_t i = 0; i < state.num_docs(); ++i) {
    double best = -1.0;
    for (const GammaEntry& g : state.gamma[i]) {
      if (g.weight > best) {
        best = g.weight;
        labels[i] = g.component;
      }
    }
  }
  return labels;
}

SyntheticCorpus generate_synthetic(std::size_t num_components, std::size_t num_docs,
                                   std::size_t vocab_size, std::size_t doc_length, double alpha,
                                   double beta, std::uint64_t seed) {
  if (num_components == 0 || num_docs == 0 || vocab_size == 0 || doc_length == 0 ||
      !(alpha > 0.0) || !(beta > 0.0)) {
    throw ArgumentError("synthetic corpus parameters must all be positive");
  }
  Rng rng(seed);
  SyntheticCorpus out;
  out.mixture_weights = rng.dirichlet(num_components, alpha / static_cast<double>(num_components));
  std::vector<std::vector<double>> topics;
  topics.reserve(num_components);
  for (std::size_t k = 0; k < num_components; ++k) topics.push_back(rng.dirichlet(vocab_size, beta));

  out.corpus.vocab_size = vocab_size;
  out.corpus.docs.reserve(num_docs);
  out.labels.reserve(num_docs);
  for (std::size_t i = 0; i < num_docs; ++i) {
    const auto z = static_cast<std::uint32_t>(rng.categorical(out.mixture_weights));
    std::vector<std::uint32_t> counts = rng.multinomial(topics[z], doc_length);
    std::vector<Entry> entries;
    for (std::size_t w = 0; w < vocab_size; ++w) {
      if (counts[w] > 0) entries.push_back({static_cast<WordId>(w), counts[w]});
    }
    out.corpus.docs.push_back(Document::from_counts(i, std::move(entries)));
    out.labels.push_back(z);
  }
  return out;
}

DpmmModel snapshot(const DpmmState& state, const DpmmHyper& hyper) {
  return DpmmModel{hyper, state.doc_mass, state.stats};
}

}  // namespace hycvb
