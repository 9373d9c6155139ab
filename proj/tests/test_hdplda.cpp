#include <cmath>
#include <numeric>

#include "doctest.h"
#include "hycvb/error.hpp"
#include "hycvb/hdplda.hpp"
#include "oracles.hpp"

using namespace hycvb;

namespace {

double stick_sum(const HdpState& s) {
  return std::accumulate(s.pi.begin(), s.pi.end(), 0.0) + s.pi_rest;
}

}  // namespace

TEST_CASE("step size closed form") {
  HdpHyper h;
  h.tau0 = 64.0;
  h.kappa = 0.6;
  CHECK(step_size(0, h) == std::pow(64.0, -0.6));
  CHECK(step_size(36, h) == std::pow(100.0, -0.6));
  h.tau0 = 0.0;
  CHECK(step_size(0, h) == 1.0);  // capped
  h.tau0 = 1.0;
  CHECK(step_size(0, h) == 1.0);
  for (std::uint64_t t = 1; t < 100; ++t) CHECK(step_size(t, h) < step_size(t - 1, h));
}

TEST_CASE("stick weights from usage") {
  HdpHyper h;
  h.alpha0 = 1.0;
  HdpState s = HdpState::empty(4, 10);
  s.add_topic();
  s.add_topic();
  s.usage = {2.0, 6.0};
  update_stick_weights(s, h);
  // Reordered by usage: 6 then 2.
  CHECK(s.usage == std::vector<double>{6.0, 2.0});
  const double v1 = 7.0 / 10.0, v2 = 3.0 / 4.0;
  CHECK(s.pi[0] == doctest::Approx(v1).epsilon(1e-15));
  CHECK(s.pi[1] == doctest::Approx((1 - v1) * v2).epsilon(1e-15));
  CHECK(s.pi_rest == doctest::Approx((1 - v1) * (1 - v2)).epsilon(1e-15));
  CHECK(std::abs(stick_sum(s) - 1.0) < 1e-15);
}

TEST_CASE("sticks sum to one for random usage") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    HdpHyper h;
    h.alpha0 = 0.1 + 5.0 * rng.uniform();
    HdpState s = HdpState::empty(3, 10);
    const std::size_t k = rng.below(40);
    for (std::size_t j = 0; j < k; ++j) {
      s.add_topic();
      s.usage.back() = 100.0 * rng.uniform();
    }
    update_stick_weights(s, h);
    CHECK(std::abs(stick_sum(s) - 1.0) < 1e-12);
    for (std::size_t j = 1; j < k; ++j) CHECK(s.usage[j - 1] >= s.usage[j]);
  }
}

TEST_CASE("token responsibilities on an empty model pick the new topic") {
  HdpState s = HdpState::empty(5, 10);
  HdpHyper h;
  ResponsibilityVector phi = token_responsibilities(2, {}, s, h);
  CHECK(phi.values == std::vector<double>{1.0});
}

TEST_CASE("token responsibilities by hand") {
  HdpHyper h;
  h.a = 2.0;
  h.beta = 0.5;
  HdpState s = HdpState::empty(2, 10);
  s.add_topic();
  s.topic_word[0] = {3.0, 1.0};
  s.topic_total[0] = 4.0;
  s.pi = {0.6};
  s.pi_rest = 0.4;
  std::vector<double> counts{1.0};
  ResponsibilityVector phi = token_responsibilities(0, counts, s, h);
  const double existing = (1.0 + 2.0 * 0.6) * (3.5 / 5.0);
  const double fresh = 2.0 * 0.4 / 2.0;
  CHECK(phi.values[0] == doctest::Approx(existing / (existing + fresh)).epsilon(1e-15));
  CHECK(phi.values[1] == doctest::Approx(fresh / (existing + fresh)).epsilon(1e-15));
}

TEST_CASE("scvb0 with full batch and unit step reproduces batch expected counts") {
  LdaSynthetic syn = generate_lda_synthetic(4, 30, 25, 12, 0.3, 0.1, 8);
  HdpHyper h;
  h.tau0 = 1.0;
  h.burn_in_passes = 3;
  Rng rng(2);
  HdpState s = HdpState::with_topics(25, 30, 4, HdpMode::SCVB0, h, rng);
  const HdpState before = s;
  REQUIRE(step_size(s.t, h) == 1.0);
  minibatch_step(s, syn.corpus.docs, h, HdpMode::SCVB0, rng);
  auto want = oracle::batch_expected_counts(syn.corpus, before, h, h.burn_in_passes + 1);
  double worst = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t w = 0; w < 25; ++w) worst = std::max(worst, std::abs(s.topic_word[k][w] - want[k][w]));
  }
  CHECK(worst < 1e-9);
  CHECK(s.t == 1);
}

TEST_CASE("scvb0 steps do not consume randomness") {
  LdaSynthetic syn = generate_lda_synthetic(3, 20, 15, 10, 0.3, 0.1, 8);
  HdpHyper h;
  Rng init(1);
  HdpState a = HdpState::with_topics(15, 20, 3, HdpMode::SCVB0, h, init);
  HdpState b = a;
  Rng r1(5), r2(999);
  minibatch_step(a, syn.corpus.docs, h, HdpMode::SCVB0, r1);
  minibatch_step(b, syn.corpus.docs, h, HdpMode::SCVB0, r2);
  CHECK(a.topic_word == b.topic_word);
}

TEST_CASE("global update blends with the step size") {
  LdaSynthetic syn = generate_lda_synthetic(3, 20, 15, 10, 0.3, 0.1, 8);
  HdpHyper h;
  Rng rng(1);
  HdpState s = HdpState::with_topics(15, 200, 3, HdpMode::SCVB0, h, rng);
  const HdpState before = s;
  StepReport r = minibatch_step(s, syn.corpus.docs, h, HdpMode::SCVB0, rng, {true});
  // Rebuild the scaled batch statistic from the recorded responsibilities.
  std::vector<std::vector<double>> batch(3, std::vector<double>(15, 0.0));
  for (std::size_t d = 0; d < syn.corpus.docs.size(); ++d) {
    std::vector<WordId> tokens = syn.corpus.docs[d].tokens();
    for (std::size_t j = 0; j < tokens.size(); ++j) {
      for (std::size_t k = 0; k < 3; ++k) batch[k][tokens[j]] += r.token_gamma[d][j][k];
    }
  }
  const double scale = 200.0 / 20.0;
  for (std::size_t k = 0; k < 3; ++k) {
    double total = 0.0;
    for (std::size_t w = 0; w < 15; ++w) {
      const double want = (1 - r.rho) * before.topic_word[k][w] + r.rho * scale * batch[k][w];
      CHECK(s.topic_word[k][w] == doctest::Approx(want).epsilon(1e-12));
      total += s.topic_word[k][w];
    }
    CHECK(s.topic_total[k] == doctest::Approx(total).epsilon(1e-12));
  }
  CHECK(r.tokens == syn.corpus.total_tokens());
}

TEST_CASE("hcsvb0 grows from zero topics and keeps sticks normalized") {
  LdaSynthetic syn = generate_lda_synthetic(5, 200, 40, 40, 0.2, 0.05, 4);
  HdpHyper h;
  h.batch_size = 20;
  HdpState s = HdpState::empty(40, 200);
  Rng rng(7);
  std::size_t births = 0;
  for (std::size_t step = 0; step < 30; ++step) {
    const std::size_t start = (step * h.batch_size) % 200;
    std::span<const Document> batch(syn.corpus.docs.data() + start, h.batch_size);
    StepReport r = minibatch_step(s, batch, h, HdpMode::HCSVB0, rng);
    births += r.births;
    CHECK(std::abs(stick_sum(s) - 1.0) < 1e-12);
    CHECK(s.pi.size() == s.num_topics());
    CHECK(r.k_after == s.num_topics());
    for (std::size_t k = 1; k < s.num_topics(); ++k) CHECK(s.usage[k - 1] >= s.usage[k]);
  }
  CHECK(births > 0);
  CHECK(s.num_topics() >= 3);
  CHECK(s.t == 30);
}

TEST_CASE("hcsvb0 is reproducible under a seed") {
  LdaSynthetic syn = generate_lda_synthetic(3, 40, 20, 15, 0.3, 0.1, 2);
  HdpHyper h;
  auto run = [&](std::uint64_t seed) {
    HdpState s = HdpState::empty(20, 40);
    Rng rng(seed);
    for (int i = 0; i < 5; ++i) minibatch_step(s, syn.corpus.docs, h, HdpMode::HCSVB0, rng);
    return s.topic_word;
  };
  CHECK(run(11) == run(11));
}

TEST_CASE("pcsvb0 keeps the number of topics fixed") {
  LdaSynthetic syn = generate_lda_synthetic(3, 40, 20, 15, 0.3, 0.1, 2);
  HdpHyper h;
  Rng rng(3);
  HdpState s = HdpState::with_topics(20, 40, 6, HdpMode::PCSVB0, h, rng);
  for (int i = 0; i < 5; ++i) {
    StepReport r = minibatch_step(s, syn.corpus.docs, h, HdpMode::PCSVB0, rng);
    CHECK(r.births == 0);
    CHECK(s.num_topics() == 6);
    CHECK(std::abs(stick_sum(s) - 1.0) < 1e-12);
  }
}

TEST_CASE("prune returns dropped sticks to the remainder") {
  HdpHyper h;
  HdpState s = HdpState::empty(3, 10);
  for (int k = 0; k < 3; ++k) s.add_topic();
  s.usage = {5.0, 1e-4, 2.0};
  update_stick_weights(s, h);
  CHECK(prune_topics(s, 1e-3) == 1);
  CHECK(s.num_topics() == 2);
  CHECK(std::abs(stick_sum(s) - 1.0) < 1e-12);
}

TEST_CASE("fold_in conserves the document length") {
  LdaSynthetic syn = generate_lda_synthetic(3, 10, 20, 25, 0.3, 0.1, 2);
  HdpHyper h;
  Rng rng(3);
  HdpState s = HdpState::with_topics(20, 10, 3, HdpMode::SCVB0, h, rng);
  for (const Document& d : syn.corpus.docs) {
    std::vector<double> n = fold_in(d, s, h);
    CHECK(std::accumulate(n.begin(), n.end(), 0.0) == doctest::Approx(static_cast<double>(d.length)));
  }
}

TEST_CASE("empty minibatch and bad hyperparameters") {
  HdpHyper h;
  HdpState s = HdpState::empty(3, 10);
  Rng rng(1);
  CHECK_THROWS_AS(minibatch_step(s, std::span<const Document>(), h, HdpMode::HCSVB0, rng), ArgumentError);
  h.kappa = 0.4;
  CHECK_THROWS_AS(h.validate(), ArgumentError);
  CHECK_THROWS_AS(HdpState::with_topics(3, 10, 0, HdpMode::SCVB0, HdpHyper{}, rng), ArgumentError);
}
