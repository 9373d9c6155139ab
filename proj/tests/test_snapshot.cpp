#include <memory>
#include <sstream>

#include "doctest.h"
#include "hycvb/error.hpp"
#include "hycvb/snapshot.hpp"

using namespace hycvb;

TEST_CASE("dpmm snapshot round trip is exact") {
  SyntheticCorpus syn = generate_synthetic(3, 60, 20, 15, 10.0, 0.05, 1);
  auto corpus = std::make_shared<Corpus>(syn.corpus);
  DpmmHyper hyper{0.7, DcmHyper{0.1, 20}};
  DpmmState state = DpmmState::empty(corpus);
  Rng rng(2);
  for (int i = 0; i < 3; ++i) hcvb0_sweep(state, hyper, rng);
  DpmmModel model = snapshot(state, hyper);

  std::stringstream buf;
  save_snapshot(model, buf);
  ModelSnapshot back = load_snapshot(buf);
  REQUIRE(std::holds_alternative<DpmmModel>(back));
  const DpmmModel& m = std::get<DpmmModel>(back);
  CHECK(m.hyper.alpha == hyper.alpha);
  CHECK(m.hyper.dcm.beta == hyper.dcm.beta);
  CHECK(m.doc_mass == model.doc_mass);
  REQUIRE(m.stats.size() == model.stats.size());
  for (std::size_t k = 0; k < m.stats.size(); ++k) {
    CHECK(m.stats[k].counts() == model.stats[k].counts());
    CHECK(m.stats[k].total() == model.stats[k].total());
  }

  std::stringstream again;
  save_snapshot(m, again);
  std::stringstream first;
  save_snapshot(model, first);
  CHECK(again.str() == first.str());
}

TEST_CASE("hdp snapshot round trip is exact") {
  LdaSynthetic syn = generate_lda_synthetic(3, 40, 20, 15, 0.3, 0.1, 2);
  HdpHyper h;
  h.a = 0.8;
  h.burn_in_passes = 2;
  HdpState s = HdpState::empty(20, 40);
  Rng rng(4);
  for (int i = 0; i < 4; ++i) minibatch_step(s, syn.corpus.docs, h, HdpMode::HCSVB0, rng);

  std::stringstream buf;
  save_snapshot(HdpModel{h, HdpMode::HCSVB0, s}, buf);
  ModelSnapshot back = load_snapshot(buf);
  REQUIRE(std::holds_alternative<HdpModel>(back));
  const HdpModel& m = std::get<HdpModel>(back);
  CHECK(m.mode == HdpMode::HCSVB0);
  CHECK(m.hyper.a == 0.8);
  CHECK(m.hyper.burn_in_passes == 2);
  CHECK(m.state.topic_word == s.topic_word);
  CHECK(m.state.topic_total == s.topic_total);
  CHECK(m.state.usage == s.usage);
  CHECK(m.state.pi == s.pi);
  CHECK(m.state.pi_rest == s.pi_rest);
  CHECK(m.state.t == s.t);
  CHECK(m.state.corpus_docs == 40);
}

TEST_CASE("malformed snapshots are rejected") {
  for (const char* text : {"", "hycvb-snapshot 2\nmodel dpmm\n", "hycvb-snapshot 1\nmodel other\n",
                           "hycvb-snapshot 1\nmodel dpmm\nvocab_size 3\nalpha 1\nbeta 0.1\ncomponents 1\n",
                           "hycvb-snapshot 1\nmodel dpmm\nvocab_size 3\nalpha x\n"}) {
    std::istringstream in(text);
    CHECK_THROWS_AS(load_snapshot(in), ParseError);
  }
}
