#include <cmath>
#include <memory>
#include <numeric>

#include "doctest.h"
#include "hycvb/dpmm.hpp"
#include "hycvb/error.hpp"
#include "oracles.hpp"

using namespace hycvb;

namespace {

std::shared_ptr<Corpus> random_corpus(Rng& rng, std::size_t docs, std::size_t vocab, std::uint32_t max_count) {
  auto c = std::make_shared<Corpus>();
  c->vocab_size = vocab;
  for (std::size_t d = 0; d < docs; ++d) {
    std::vector<Entry> entries;
    const std::size_t n = 1 + rng.below(3);
    for (std::size_t j = 0; j < n; ++j) {
      entries.push_back({static_cast<WordId>(rng.below(vocab)), static_cast<std::uint32_t>(1 + rng.below(max_count))});
    }
    c->docs.push_back(Document::from_counts(d, entries));
  }
  return c;
}

double mass_sum(const DpmmState& s) { return std::accumulate(s.doc_mass.begin(), s.doc_mass.end(), 0.0); }

double token_sum(const DpmmState& s) {
  double t = 0.0;
  for (const ComponentStats& st : s.stats) t += st.total();
  return t;
}

void check_rows(const DpmmState& s) {
  for (const GammaRow& row : s.gamma) {
    double sum = 0.0;
    for (const GammaEntry& g : row) {
      CHECK(g.weight > 0.0);
      CHECK(g.component < s.num_components());
      sum += g.weight;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

}  // namespace

TEST_CASE("K = 0 responsibilities put all mass on the new slot") {
  Rng rng(1);
  auto corpus = random_corpus(rng, 4, 6, 3);
  DpmmState state = DpmmState::empty(corpus);
  ResponsibilityVector phi = cvb0_responsibilities(state, 0, DpmmHyper{1.0, DcmHyper{0.1, 6}});
  CHECK(phi.values == std::vector<double>{1.0});
}

TEST_CASE("first hybrid update on an empty model instantiates one component") {
  Rng rng(2);
  auto corpus = random_corpus(rng, 3, 5, 3);
  DpmmHyper hyper{1.0, DcmHyper{0.1, 5}};
  DpmmState state = DpmmState::empty(corpus);
  ResponsibilityVector phi = cvb0_responsibilities(state, 0, hyper);
  HybridUpdate u = hybrid_update(phi, rng);
  apply_update(state, 0, u);
  CHECK(state.num_components() == 1);
  CHECK(state.doc_mass[0] == 1.0);
  CHECK(state.stats[0].total() == static_cast<double>(corpus->docs[0].length));
  CHECK(state.gamma[0] == GammaRow{{0, 1.0}});
}

TEST_CASE("cvb0 responsibilities match the high-precision transcription") {
  Rng rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t v = 2 + rng.below(8);
    auto corpus = random_corpus(rng, 2 + rng.below(6), v, 6);
    const std::size_t k = 1 + rng.below(5);
    DpmmHyper hyper{0.1 + 3.0 * rng.uniform(), DcmHyper{0.05 + rng.uniform(), v}};
    DpmmState state = DpmmState::truncated(corpus, k, rng);
    const std::size_t i = rng.below(corpus->docs.size());
    const std::vector<GammaRow> gamma = state.gamma;
    remove_contribution(state, i);
    ResponsibilityVector phi = cvb0_responsibilities(state, i, hyper);
    std::vector<double> want = oracle::eq4_responsibilities(*corpus, gamma, k, i, hyper.alpha, hyper.dcm.beta);
    REQUIRE(phi.values.size() == want.size());
    for (std::size_t j = 0; j < want.size(); ++j) CHECK(oracle::rel_error(phi.values[j], want[j]) < 1e-10);
  }
}

TEST_CASE("hybrid sweeps conserve document and token mass") {
  SyntheticCorpus syn = generate_synthetic(4, 120, 30, 20, 10.0, 0.05, 9);
  auto corpus = std::make_shared<Corpus>(syn.corpus);
  DpmmHyper hyper{1.0, DcmHyper{0.1, 30}};
  DpmmState state = DpmmState::empty(corpus);
  Rng rng(4);
  for (int s = 0; s < 10; ++s) {
    SweepReport r = hcvb0_sweep(state, hyper, rng);
    CHECK(std::abs(mass_sum(state) - 120.0) < 1e-6);
    CHECK(std::abs(token_sum(state) - static_cast<double>(corpus->total_tokens())) < 1e-6);
    CHECK(r.updates == 120);
    CHECK(r.k_after == state.num_components());
    check_rows(state);
  }
}

TEST_CASE("tcvb0 keeps its truncation and conserves mass") {
  SyntheticCorpus syn = generate_synthetic(3, 80, 20, 15, 10.0, 0.05, 10);
  auto corpus = std::make_shared<Corpus>(syn.corpus);
  DpmmHyper hyper{1.0, DcmHyper{0.1, 20}};
  Rng rng(5);
  DpmmState state = DpmmState::truncated(corpus, 12, rng);
  for (int s = 0; s < 5; ++s) {
    tcvb0_sweep(state, hyper, SweepOptions{0.0, true});
    CHECK(state.num_components() == 12);
    CHECK(std::abs(mass_sum(state) - 80.0) < 1e-6);
    CHECK(std::abs(token_sum(state) - static_cast<double>(corpus->total_tokens())) < 1e-6);
  }
}

TEST_CASE("tcvb0 is deterministic given the initial state") {
  SyntheticCorpus syn = generate_synthetic(3, 40, 20, 15, 10.0, 0.05, 10);
  auto corpus = std::make_shared<Corpus>(syn.corpus);
  DpmmHyper hyper{1.0, DcmHyper{0.1, 20}};
  Rng r1(6), r2(6);
  DpmmState a = DpmmState::truncated(corpus, 5, r1);
  DpmmState b = DpmmState::truncated(corpus, 5, r2);
  for (int s = 0; s < 3; ++s) {
    tcvb0_sweep(a, hyper);
    tcvb0_sweep(b, hyper);
  }
  CHECK(a.gamma == b.gamma);
}

TEST_CASE("prune drops light components and renormalizes rows") {
  auto corpus = std::make_shared<Corpus>();
  corpus->vocab_size = 3;
  corpus->docs = {Document::from_counts(0, {{0, 2}}), Document::from_counts(1, {{1, 2}}),
                  Document::from_counts(2, {{2, 1}})};
  DpmmState state = DpmmState::empty(corpus);
  state.gamma = {{{0, 0.9995}, {2, 0.0005}}, {{1, 1.0}}, {{0, 0.5}, {1, 0.5}}};
  state.doc_mass.assign(3, 0.0);
  state.stats.assign(3, ComponentStats(3));
  recompute_statistics(state);
  CHECK(state.doc_mass[2] == doctest::Approx(0.0005));
  CHECK(prune_components(state, 1e-3) == 1);
  CHECK(state.num_components() == 2);
  CHECK(state.gamma[0] == GammaRow{{0, 1.0}});
  CHECK(std::abs(mass_sum(state) - 3.0) < 1e-12);
  check_rows(state);
}

TEST_CASE("prune keeps the heaviest component") {
  auto corpus = std::make_shared<Corpus>();
  corpus->vocab_size = 2;
  corpus->docs = {Document::from_counts(0, {{0, 1}})};
  DpmmState state = DpmmState::empty(corpus);
  state.gamma = {{{0, 1.0}}};
  state.doc_mass.assign(1, 0.0);
  state.stats.assign(1, ComponentStats(2));
  recompute_statistics(state);
  CHECK(prune_components(state, 10.0) == 0);
  CHECK(state.num_components() == 1);
}

TEST_CASE("cgs requires hard assignments") {
  Rng rng(1);
  auto corpus = random_corpus(rng, 3, 4, 2);
  DpmmState soft = DpmmState::empty(corpus);
  CHECK_THROWS(cgs_sweep(soft, DpmmHyper{1.0, DcmHyper{0.1, 4}}, rng));
}

TEST_CASE("cgs on two documents samples the exact partition posterior") {
  auto corpus = std::make_shared<Corpus>();
  corpus->vocab_size = 3;
  corpus->docs = {Document::from_counts(0, {{0, 2}, {1, 1}}), Document::from_counts(1, {{0, 1}, {2, 1}})};
  DpmmHyper hyper{1.3, DcmHyper{0.5, 3}};

  // Enumerate both partitions: CRP prior times marginal likelihood.
  const Document& x1 = corpus->docs[0];
  const Document& x2 = corpus->docs[1];
  ComponentStats with_x1(3);
  with_x1.add_doc(x1, 1.0);
  const double log_separate = std::log(hyper.alpha) + log_predictive_empty(x1, hyper.dcm) + log_predictive_empty(x2, hyper.dcm);
  const double log_together = log_predictive_empty(x1, hyper.dcm) + log_predictive_doc(x2, with_x1, hyper.dcm);
  const double p_together = 1.0 / (1.0 + std::exp(log_separate - log_together));

  DpmmState state = DpmmState::empty(corpus, true);
  Rng rng(77);
  const int burn = 100, sweeps = 40000;
  int together = 0;
  for (int s = 0; s < burn + sweeps; ++s) {
    cgs_sweep(state, hyper, rng);
    CHECK(std::abs(mass_sum(state) - 2.0) < 1e-12);
    if (s >= burn && (*state.assignments)[0] == (*state.assignments)[1]) ++together;
  }
  const double freq = static_cast<double>(together) / sweeps;
  // Consecutive sweeps are correlated; 0.015 is about 5 naive standard errors.
  CHECK(std::abs(freq - p_together) < 0.015);
}

TEST_CASE("synthetic generator") {
  SyntheticCorpus a = generate_synthetic(5, 100, 40, 30, 50.0, 0.01, 3);
  SyntheticCorpus b = generate_synthetic(5, 100, 40, 30, 50.0, 0.01, 3);
  CHECK(a.corpus == b.corpus);
  CHECK(a.labels == b.labels);
  CHECK(a.corpus.docs.size() == 100);
  for (const Document& d : a.corpus.docs) CHECK(d.length == 30);
  for (std::uint32_t l : a.labels) CHECK(l < 5);
  CHECK(std::abs(std::accumulate(a.mixture_weights.begin(), a.mixture_weights.end(), 0.0) - 1.0) < 1e-12);
}

TEST_CASE("hyperparameter validation") {
  CHECK_THROWS_AS((DpmmHyper{0.0, DcmHyper{0.1, 3}}.validate()), ArgumentError);
  CHECK_THROWS_AS((DpmmHyper{1.0, DcmHyper{-1.0, 3}}.validate()), ArgumentError);
  CHECK_NOTHROW((DpmmHyper{1.0, DcmHyper{0.1, 3}}.validate()));
}
