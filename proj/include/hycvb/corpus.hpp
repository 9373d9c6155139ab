#pragma once

// Bag-of-words corpora: the UCI docword format, train/test splitting, and
// the token-level estimation/evaluation split of a single document.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hycvb {

using WordId = std::uint32_t;

struct Entry {
  WordId word;
  std::uint32_t count;

  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Sparse term counts of one document. Entries are sorted by word id and
/// each word id appears at most once.
struct Document {
  std::size_t id = 0;
  std::vector<Entry> entries;
  std::uint64_t length = 0;

  /// Builds a document from (word, count) pairs, merging duplicates and
  /// dropping zero counts.
  static Document from_counts(std::size_t id, std::vector<Entry> entries);

  /// One word id per token, in entry order.
  std::vector<WordId> tokens() const;

  friend bool operator==(const Document&, const Document&) = default;
};

struct Corpus {
  std::size_t vocab_size = 0;
  std::vector<Document> docs;
  std::optional<std::vector<std::string>> vocab;

  std::uint64_t total_tokens() const;
  std::size_t size() const { return docs.size(); }

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct ParseReport {
  std::size_t dropped_empty = 0;
  std::vector<std::string> warnings;
};

struct ParsedCorpus {
  Corpus corpus;
  ParseReport report;
};

/// Reads a UCI docword stream (D, W, NNZ header lines, then 1-based
/// "docID wordID count" lines) and an optional vocab stream (one term per
/// line). Throws ParseError on malformed input.
ParsedCorpus parse_uci_bagofwords(std::istream& docword, std::istream* vocab = nullptr);

/// Opens and parses files by path. Throws ParseError if a file can't be read.
ParsedCorpus load_uci_bagofwords(const std::string& docword_path,
                                 const std::string& vocab_path = {});

/// Writes the corpus in UCI docword format with documents numbered by
/// position. Output is canonical: entries ascending by word id.
void write_uci(const Corpus& corpus, std::ostream& out);
void write_vocab(const std::vector<std::string>& vocab, std::ostream& out);

/// Seeded partition into (train, test); the test half holds
/// round(N * test_fraction) documents. Both halves keep the original
/// document order and ids.
std::pair<Corpus, Corpus> split_train_test(const Corpus& corpus, double test_fraction,
                                           std::uint64_t seed);

/// Token-level split: the multiset of tokens is shuffled and the first
/// round(length * estimation_fraction) tokens go to the first part.
/// Throws SplitError when doc.length < 2.
std::pair<Document, Document> split_document(const Document& doc, double estimation_fraction,
                                             std::uint64_t seed);

/// Seeded subsample of at most n documents, original order kept.
Corpus subsample(const Corpus& corpus, std::size_t n, std::uint64_t seed);

}  // namespace hycvb
