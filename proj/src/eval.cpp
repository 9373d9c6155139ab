#include "hycvb/eval.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string_view>

#include "hycvb/error.hpp"

namespace hycvb {

namespace {

PerplexityResult finish(double log_likelihood, std::uint64_t tokens, std::size_t docs,
                        std::size_t skipped) {
  if (docs == 0 || tokens == 0) throw EvaluationError("no evaluable held-out tokens");
  PerplexityResult r;
  r.log_likelihood = log_likelihood;
  r.tokens = tokens;
  r.docs = docs;
  r.skipped = skipped;
  r.perplexity = std::exp(-log_likelihood / static_cast<double>(tokens));
  return r;
}

template <class T>
T parse_number(std::string_view field, std::size_t line) {
  T value{};
  auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || end != field.data() + field.size()) {
    throw ParseError("bad numeric field '" + std::string(field) + "'", line);
  }
  return value;
}

}  // namespace

HeldOutSet make_heldout_set(const Corpus& test, double estimation_fraction, std::uint64_t seed) {
  HeldOutSet out;
  for (std::size_t i = 0; i < test.docs.size(); ++i) {
    const Document& doc = test.docs[i];
    if (doc.length < 2) {
      ++out.skipped;
      continue;
    }
    auto [a, b] = split_document(doc, estimation_fraction, derive_seed(seed, i));
    out.docs.push_back({std::move(a), std::move(b)});
  }
  return out;
}

PerplexityResult heldout_single_membership(const DpmmModel& model, const HeldOutSet& heldout) {
  const std::size_t k_count = model.num_components();
  if (k_count == 0) throw ArgumentError("model has no instantiated components");
  const DcmHyper& dcm = model.hyper.dcm;
  const double uniform = 1.0 / static_cast<double>(dcm.vocab_size);

  double log_likelihood = 0.0;
  std::uint64_t tokens = 0;
  std::size_t docs = 0;
  std::vector<double> q(k_count + 1);
  for (const HeldOutDoc& d : heldout.docs) {
    if (d.score.length == 0) continue;
    for (std::size_t k = 0; k < k_count; ++k) {
      q[k] = model.doc_mass[k] > 0.0
                 ? std::log(model.doc_mass[k]) + log_predictive_doc(d.estimate, model.stats[k], dcm)
                 : -INFINITY;
    }
    q[k_count] = std::log(model.hyper.alpha) + log_predictive_empty(d.estimate, dcm);
    normalize_log_weights(q);
    for (const Entry& e : d.score.entries) {
      double p = q[k_count] * uniform;
      for (std::size_t k = 0; k < k_count; ++k) p += q[k] * token_predictive(e.word, model.stats[k], dcm);
      log_likelihood += static_cast<double>(e.count) * std::log(p);
    }
    tokens += d.score.length;
    ++docs;
  }
  return finish(log_likelihood, tokens, docs, heldout.skipped);
}

PerplexityResult heldout_mixed_membership(const HdpState& state, const HdpHyper& hyper,
                                          const HeldOutSet& heldout) {
  const std::size_t k_count = state.num_topics();
  if (k_count == 0) throw ArgumentError("model has no instantiated topics");
  const double vb = static_cast<double>(state.vocab_size) * hyper.beta;

  double log_likelihood = 0.0;
  std::uint64_t tokens = 0;
  std::size_t docs = 0;
  std::vector<double> theta(k_count);
  for (const HeldOutDoc& d : heldout.docs) {
    if (d.score.length == 0) continue;
    std::vector<double> counts = fold_in(d.estimate, state, hyper);
    double norm = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      theta[k] = counts[k] + hyper.a * state.pi[k];
      norm += theta[k];
    }
    for (double& v : theta) v /= norm;
    for (const Entry& e : d.score.entries) {
      double p = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) {
        p += theta[k] * (state.topic_word[k][e.word] + hyper.beta) / (state.topic_total[k] + vb);
      }
      log_likelihood += static_cast<double>(e.count) * std::log(p);
    }
    tokens += d.score.length;
    ++docs;
  }
  return finish(log_likelihood, tokens, docs, heldout.skipped);
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

void write_metrics_csv(std::span<const MetricsRecord> records, std::ostream& out) {
  out << kMetricsHeader << '\n';
  for (const MetricsRecord& r : records) {
    out << r.run_id << ',' << r.algorithm << ',' << r.iteration << ',' << r.docs_processed << ','
        << format_double(r.wall_clock_s) << ',' << r.num_components << ','
        << format_double(r.heldout_perplexity) << ',' << r.seed << '\n';
  }
}

std::vector<MetricsRecord> parse_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw ParseError("missing or unexpected metrics header", 1);
  }
  std::vector<MetricsRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
      fields.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    fields.push_back(rest);
    if (fields.size() != 8) throw ParseError("expected 8 fields", line_no);
    MetricsRecord r;
    r.run_id = fields[0];
    r.algorithm = fields[1];
    r.iteration = parse_number<std::uint64_t>(fields[2], line_no);
    r.docs_processed = parse_number<std::uint64_t>(fields[3], line_no);
    r.wall_clock_s = parse_number<double>(fields[4], line_no);
    r.num_components = parse_number<std::uint64_t>(fields[5], line_no);
    r.heldout_perplexity = parse_number<double>(fields[6], line_no);
    r.seed = parse_number<std::uint64_t>(fields[7], line_no);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace hycvb
