#include "hycvb/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <string_view>

#include "hycvb/error.hpp"
#include "hycvb/rng.hpp"

namespace hycvb {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

// Parses whitespace-separated unsigned integers; returns false on any junk.
bool parse_fields(std::string_view s, std::uint64_t* out, std::size_t n) {
  const char* p = s.data();
  const char* end = s.data() + s.size();
  for (std::size_t i = 0; i < n; ++i) {
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p == end) return false;
    auto [next, ec] = std::from_chars(p, end, out[i]);
    if (ec != std::errc{}) return false;
    p = next;
  }
  while (p < end && (*p == ' ' || *p == '\t')) ++p;
  return p == end;
}

bool is_negative_count(std::string_view s) {
  // "docID wordID -3" should be reported as a bad count, not as junk.
  auto pos = s.find_last_of(" \t");
  return pos != std::string_view::npos && pos + 1 < s.size() && s[pos + 1] == '-';
}

}  // namespace

Document Document::from_counts(std::size_t id, std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.word < b.word; });
  Document doc;
  doc.id = id;
  for (const Entry& e : entries) {
    if (e.count == 0) continue;
    if (!doc.entries.empty() && doc.entries.back().word == e.word) {
      doc.entries.back().count += e.count;
    } else {
      doc.entries.push_back(e);
    }
    doc.length += e.count;
  }
  return doc;
}

std::vector<WordId> Document::tokens() const {
  std::vector<WordId> out;
  out.reserve(length);
  for (const Entry& e : entries) out.insert(out.end(), e.count, e.word);
  return out;
}

std::uint64_t Corpus::total_tokens() const {
  std::uint64_t n = 0;
  for (const Document& d : docs) n += d.length;
  return n;
}

ParsedCorpus parse_uci_bagofwords(std::istream& docword, std::istream* vocab) {
  ParsedCorpus result;
  std::string line;
  std::size_t line_no = 0;

  std::uint64_t header[3];
  for (int h = 0; h < 3; ++h) {
    if (!std::getline(docword, line)) {
      throw ParseError("truncated header: expected D, W and NNZ lines", line_no + 1);
    }
    ++line_no;
    if (!parse_fields(trim(line), &header[h], 1)) {
      throw ParseError("malformed header value '" + line + "'", line_no);
    }
  }
  const std::uint64_t num_docs = header[0];
  const std::uint64_t vocab_size = header[1];
  const std::uint64_t nnz = header[2];
  if (vocab_size == 0) throw ParseError("vocabulary size W must be positive", 2);

  std::vector<std::vector<Entry>> per_doc(num_docs);
  std::uint64_t seen = 0;
  std::size_t duplicates = 0;
  while (std::getline(docword, line)) {
    ++line_no;
    std::string_view s = trim(line);
    if (s.empty()) continue;
    std::uint64_t f[3];
    if (!parse_fields(s, f, 3)) {
      if (is_negative_count(s)) throw ParseError("count must be positive", line_no);
      throw ParseError("expected 'docID wordID count', got '" + line + "'", line_no);
    }
    if (f[0] == 0 || f[0] > num_docs) {
      throw ParseError("docID " + std::to_string(f[0]) + " outside [1, " +
                           std::to_string(num_docs) + "]",
                       line_no);
    }
    if (f[1] == 0 || f[1] > vocab_size) {
      throw ParseError("wordID " + std::to_string(f[1]) + " outside [1, " +
                           std::to_string(vocab_size) + "]",
                       line_no);
    }
    if (f[2] == 0) throw ParseError("count must be positive", line_no);
    per_doc[f[0] - 1].push_back({static_cast<WordId>(f[1] - 1), static_cast<std::uint32_t>(f[2])});
    ++seen;
  }
  if (seen != nnz) {
    result.report.warnings.push_back("NNZ header says " + std::to_string(nnz) + " but " +
                                     std::to_string(seen) + " entries were read");
  }

  Corpus& corpus = result.corpus;
  corpus.vocab_size = vocab_size;
  corpus.docs.reserve(num_docs);
  for (auto& entries : per_doc) {
    if (entries.empty()) {
      ++result.report.dropped_empty;
      continue;
    }
    const std::size_t raw = entries.size();
    Document doc = Document::from_counts(corpus.docs.size(), std::move(entries));
    duplicates += raw - doc.entries.size();
    corpus.docs.push_back(std::move(doc));
  }
  if (result.report.dropped_empty > 0) {
    result.report.warnings.push_back("dropped " + std::to_string(result.report.dropped_empty) +
                                     " empty documents");
  }
  if (duplicates > 0) {
    result.report.warnings.push_back("merged " + std::to_string(duplicates) +
                                     " duplicate (docID, wordID) entries");
  }

  if (vocab) {
    std::vector<std::string> terms;
    while (std::getline(*vocab, line)) {
      std::string_view s = trim(line);
      terms.emplace_back(s);
    }
    while (!terms.empty() && terms.back().empty()) terms.pop_back();
    if (terms.size() != vocab_size) {
      throw ParseError("vocab file has " + std::to_string(terms.size()) + " terms, expected " +
                           std::to_string(vocab_size),
                       0);
    }
    corpus.vocab = std::move(terms);
  }
  return result;
}

ParsedCorpus load_uci_bagofwords(const std::string& docword_path, const std::string& vocab_path) {
  std::ifstream docword(docword_path);
  if (!docword) throw ParseError("cannot open " + docword_path, 0);
  if (vocab_path.empty()) return parse_uci_bagofwords(docword);
  std::ifstream vocab(vocab_path);
  if (!vocab) throw ParseError("cannot open " + vocab_path, 0);
  return parse_uci_bagofwords(docword, &vocab);
}

void write_uci(const Corpus& corpus, std::ostream& out) {
  std::size_t nnz = 0;
  for (const Document& d : corpus.docs) nnz += d.entries.size();
  out << corpus.docs.size() << '\n' << corpus.vocab_size << '\n' << nnz << '\n';
  for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
    for (const Entry& e : corpus.docs[i].entries) {
      out << (i + 1) << ' ' << (e.word + 1) << ' ' << e.count << '\n';
    }
  }
}

void write_vocab(const std::vector<std::string>& vocab, std::ostream& out) {
  for (const std::string& term : vocab) out << term << '\n';
}

std::pair<Corpus, Corpus> split_train_test(const Corpus& corpus, double test_fraction,
                                           std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ArgumentError("test fraction must lie in (0, 1)");
  }
  if (corpus.docs.empty()) throw ArgumentError("cannot split an empty corpus");

  const std::size_t n = corpus.docs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  const auto num_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  std::vector<bool> is_test(n, false);
  for (std::size_t i = 0; i < num_test; ++i) is_test[order[i]] = true;

  Corpus train{corpus.vocab_size, {}, corpus.vocab};
  Corpus test{corpus.vocab_size, {}, corpus.vocab};
  for (std::size_t i = 0; i < n; ++i) {
    (is_test[i] ? test : train).docs.push_back(corpus.docs[i]);
  }
  return {std::move(train), std::move(test)};
}

std::pair<Document, Document> split_document(const Document& doc, double estimation_fraction,
                                             std::uint64_t seed) {
  if (!(estimation_fraction > 0.0 && estimation_fraction < 1.0)) {
    throw ArgumentError("estimation fraction must lie in (0, 1)");
  }
  if (doc.length < 2) {
    throw SplitError("document " + std::to_string(doc.id) + " has fewer than two tokens");
  }
  std::vector<WordId> tokens = doc.tokens();
  Rng rng(seed);
  rng.shuffle(tokens);
  const auto cut = static_cast<std::size_t>(
      std::llround(static_cast<double>(doc.length) * estimation_fraction));

  std::map<WordId, std::uint32_t> a, b;
  for (std::size_t t = 0; t < tokens.size(); ++t) ++(t < cut ? a : b)[tokens[t]];
  auto compress = [&](const std::map<WordId, std::uint32_t>& counts) {
    std::vector<Entry> entries;
    entries.reserve(counts.size());
    for (auto [w, c] : counts) entries.push_back({w, c});
    return Document::from_counts(doc.id, std::move(entries));
  };
  return {compress(a), compress(b)};
}

Corpus subsample(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  if (n >= corpus.docs.size()) return corpus;
  std::vector<std::size_t> order(corpus.docs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  order.resize(n);
  std::sort(order.begin(), order.end());
  Corpus out{corpus.vocab_size, {}, corpus.vocab};
  out.docs.reserve(n);
  for (std::size_t i : order) out.docs.push_back(corpus.docs[i]);
  return out;
}

}  // namespace hycvb
