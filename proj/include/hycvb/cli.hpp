#pragma once

// Command implementations behind the `hycvb` executable. Settings arrive as
// key/value strings merged from (lowest to highest precedence) built-in
// defaults, an optional key=value config file, and command-line flags.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hycvb/eval.hpp"

namespace hycvb::cli {

enum class Algorithm { HCVB0, CGS, TCVB0, HCSVB0, SCVB0, PCSVB0 };

std::string_view to_string(Algorithm algo);
bool is_finite(Algorithm algo);
bool is_stochastic(Algorithm algo);

enum class ClockMode { Wall, None };

/// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitBadConfig = 2;
inline constexpr int kExitBadInput = 3;

/// Name of the environment variable that sets the default output root.
inline constexpr const char* kOutputRootEnv = "HYCVB_OUTPUT_ROOT";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Settings = std::map<std::string, std::string>;

struct SettingSpec {
  std::string key;
  std::string default_value;  // empty: no default
  std::string help;
};

/// Every train setting with its default and description.
const std::vector<SettingSpec>& train_settings();

/// Parses `key = value` lines; blank lines and lines starting with '#' are
/// ignored. Throws ConfigError on unknown keys or malformed lines.
Settings read_config_file(const std::string& path);

struct RunConfig {
  Algorithm algorithm = Algorithm::HCVB0;
  std::string corpus_path;
  std::string vocab_path;
  std::uint64_t seed = 42;
  std::uint64_t iterations = 100;  // sweeps or minibatch steps
  std::optional<std::size_t> truncation;
  std::uint64_t eval_every = 1;
  std::filesystem::path output_root;
  double test_fraction = 0.2;
  double estimation_fraction = 0.7;
  std::size_t subsample = 0;  // 0: use every document
  ClockMode clock = ClockMode::Wall;
  // DPMM
  double alpha = 1.0;
  double beta = 0.1;
  double prune_threshold = 1e-3;
  // HDP-LDA
  HdpHyper hdp;

  /// Canonical key=value rendering of everything that affects the results.
  std::string canonical() const;
};

/// Merges defaults, the config file named by "config" (if any), and the
/// explicitly given flags, then validates. Throws ConfigError.
RunConfig resolve_train_config(const Settings& flags);

/// Algorithm name plus a 64-bit FNV-1a hash of the canonical config.
std::string run_id(const RunConfig& config);

struct TrainResult {
  std::string run_id;
  std::filesystem::path run_dir;
  std::vector<MetricsRecord> metrics;
  std::size_t final_components = 0;
};

/// Runs training end to end and writes metrics.csv and model.snapshot into
/// <output_root>/<run_id>/. Throws ParseError for unreadable corpora.
TrainResult train(const RunConfig& config, std::ostream& log);

int cmd_train(const Settings& flags, std::ostream& out, std::ostream& err);

/// Keys: snapshot, corpus, vocab, seed, estimation-fraction.
int cmd_eval(const Settings& flags, std::ostream& out, std::ostream& err);

/// Keys: kind (dpmm|lda), components, docs, vocab-size, doc-length, alpha,
/// beta, seed, out (path prefix).
int cmd_synth(const Settings& flags, std::ostream& out, std::ostream& err);

/// Keys: seed, draws, vectors.
int cmd_properties(const Settings& flags, std::ostream& out, std::ostream& err);

}  // namespace hycvb::cli
