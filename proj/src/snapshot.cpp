#include "hycvb/snapshot.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "hycvb/error.hpp"
#include "hycvb/eval.hpp"

namespace hycvb {

namespace {

void write_sparse_row(const std::vector<double>& row, std::ostream& out) {
  for (std::size_t w = 0; w < row.size(); ++w) {
    if (row[w] != 0.0) out << w << ' ' << format_double(row[w]) << '\n';
  }
}

std::size_t count_nonzero(const std::vector<double>& row) {
  std::size_t n = 0;
  for (double v : row) n += v != 0.0;
  return n;
}

// Token reader with line tracking for error messages.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::istringstream next_line() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty()) return std::istringstream(line);
    }
    fail("unexpected end of snapshot");
  }

  /// Reads a "key value" line and returns the value text.
  std::string expect(const std::string& key) {
    auto line = next_line();
    std::string k, v;
    line >> k >> v;
    if (k != key || v.empty()) fail("expected '" + key + " <value>'");
    return v;
  }

  double real(const std::string& key) { return to_real(expect(key)); }
  std::uint64_t integer(const std::string& key) { return to_integer(expect(key)); }

  double to_real(const std::string& s) {
    double v{};
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) fail("bad real '" + s + "'");
    return v;
  }

  std::uint64_t to_integer(const std::string& s) {
    std::uint64_t v{};
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) fail("bad integer '" + s + "'");
    return v;
  }

  /// Reads nnz "word value" lines into a dense row.
  std::vector<double> sparse_row(std::size_t nnz, std::size_t vocab) {
    std::vector<double> row(vocab, 0.0);
    for (std::size_t j = 0; j < nnz; ++j) {
      auto line = next_line();
      std::string w, v;
      line >> w >> v;
      const std::uint64_t word = to_integer(w);
      if (word >= vocab) fail("word id out of range");
      row[word] = to_real(v);
    }
    return row;
  }

  [[noreturn]] void fail(const std::string& what) { throw ParseError(what, line_no_); }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

// "name a v1 b v2 ..." line split into its fields after the leading tag.
std::vector<std::string> fields_after(std::istringstream line, const std::string& tag, Reader& r) {
  std::string first;
  line >> first;
  if (first != tag) r.fail("expected '" + tag + "' record");
  std::vector<std::string> out;
  for (std::string f; line >> f;) out.push_back(f);
  return out;
}

HdpMode parse_mode(const std::string& s, Reader& r) {
  for (HdpMode m : {HdpMode::HCSVB0, HdpMode::PCSVB0, HdpMode::SCVB0}) {
    if (to_string(m) == s) return m;
  }
  r.fail("unknown mode '" + s + "'");
}

DpmmModel load_dpmm(Reader& r) {
  DpmmModel model;
  model.hyper.dcm.vocab_size = r.integer("vocab_size");
  model.hyper.alpha = r.real("alpha");
  model.hyper.dcm.beta = r.real("beta");
  const std::uint64_t k_count = r.integer("components");
  for (std::uint64_t k = 0; k < k_count; ++k) {
    // component <k> mass <m> total <n> nnz <c>
    auto f = fields_after(r.next_line(), "component", r);
    if (f.size() != 7 || f[1] != "mass" || f[3] != "total" || f[5] != "nnz" || r.to_integer(f[0]) != k) {
      r.fail("malformed component record");
    }
    model.doc_mass.push_back(r.to_real(f[2]));
    const double total = r.to_real(f[4]);
    model.stats.emplace_back(r.sparse_row(r.to_integer(f[6]), model.hyper.dcm.vocab_size), total);
  }
  return model;
}

HdpModel load_hdp(Reader& r) {
  HdpModel model;
  model.mode = parse_mode(r.expect("mode"), r);
  HdpState& s = model.state;
  s.vocab_size = r.integer("vocab_size");
  s.corpus_docs = r.integer("corpus_docs");
  HdpHyper& h = model.hyper;
  h.a = r.real("a");
  h.alpha0 = r.real("alpha0");
  h.beta = r.real("beta");
  h.tau0 = r.real("tau0");
  h.kappa = r.real("kappa");
  h.batch_size = r.integer("batch_size");
  h.burn_in_passes = r.integer("burn_in_passes");
  h.prune_threshold = r.real("prune_threshold");
  s.t = r.integer("t");
  s.pi_rest = r.real("pi_rest");
  const std::uint64_t k_count = r.integer("topics");
  for (std::uint64_t k = 0; k < k_count; ++k) {
    // topic <k> usage <m> pi <p> total <n> nnz <c>
    auto f = fields_after(r.next_line(), "topic", r);
    if (f.size() != 9 || f[1] != "usage" || f[3] != "pi" || f[5] != "total" || f[7] != "nnz" ||
        r.to_integer(f[0]) != k) {
      r.fail("malformed topic record");
    }
    s.usage.push_back(r.to_real(f[2]));
    s.pi.push_back(r.to_real(f[4]));
    s.topic_total.push_back(r.to_real(f[6]));
    s.topic_word.push_back(r.sparse_row(r.to_integer(f[8]), s.vocab_size));
  }
  return model;
}

}  // namespace

void save_snapshot(const DpmmModel& model, std::ostream& out) {
  out << "hycvb-snapshot " << kSnapshotVersion << '\n'
      << "model dpmm\n"
      << "vocab_size " << model.hyper.dcm.vocab_size << '\n'
      << "alpha " << format_double(model.hyper.alpha) << '\n'
      << "beta " << format_double(model.hyper.dcm.beta) << '\n'
      << "components " << model.num_components() << '\n';
  for (std::size_t k = 0; k < model.num_components(); ++k) {
    const ComponentStats& s = model.stats[k];
    out << "component " << k << " mass " << format_double(model.doc_mass[k]) << " total "
        << format_double(s.total()) << " nnz " << count_nonzero(s.counts()) << '\n';
    write_sparse_row(s.counts(), out);
  }
}

void save_snapshot(const HdpModel& model, std::ostream& out) {
  const HdpState& s = model.state;
  const HdpHyper& h = model.hyper;
  out << "hycvb-snapshot " << kSnapshotVersion << '\n'
      << "model hdplda\n"
      << "mode " << to_string(model.mode) << '\n'
      << "vocab_size " << s.vocab_size << '\n'
      << "corpus_docs " << s.corpus_docs << '\n'
      << "a " << format_double(h.a) << '\n'
      << "alpha0 " << format_double(h.alpha0) << '\n'
      << "beta " << format_double(h.beta) << '\n'
      << "tau0 " << format_double(h.tau0) << '\n'
      << "kappa " << format_double(h.kappa) << '\n'
      << "batch_size " << h.batch_size << '\n'
      << "burn_in_passes " << h.burn_in_passes << '\n'
      << "prune_threshold " << format_double(h.prune_threshold) << '\n'
      << "t " << s.t << '\n'
      << "pi_rest " << format_double(s.pi_rest) << '\n'
      << "topics " << s.num_topics() << '\n';
  for (std::size_t k = 0; k < s.num_topics(); ++k) {
    out << "topic " << k << " usage " << format_double(s.usage[k]) << " pi "
        << format_double(s.pi[k]) << " total " << format_double(s.topic_total[k]) << " nnz "
        << count_nonzero(s.topic_word[k]) << '\n';
    write_sparse_row(s.topic_word[k], out);
  }
}

ModelSnapshot load_snapshot(std::istream& in) {
  Reader r(in);
  const std::uint64_t version = r.integer("hycvb-snapshot");
  if (version != kSnapshotVersion) r.fail("unsupported snapshot version " + std::to_string(version));
  const std::string kind = r.expect("model");
  if (kind == "dpmm") return load_dpmm(r);
  if (kind == "hdplda") return load_hdp(r);
  r.fail("unknown model kind '" + kind + "'");
}

}  // namespace hycvb
