#include "hycvb/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "hycvb/dpmm.hpp"
#include "hycvb/error.hpp"
#include "hycvb/hdplda.hpp"
#include "hycvb/properties.hpp"
#include "hycvb/snapshot.hpp"

namespace hycvb::cli {

namespace {

using Clock = std::chrono::steady_clock;

// Seed streams derived from the run seed.
enum Stream : std::uint64_t { kSubsample = 1, kTrainTest, kHeldOut, kEngine, kInit };

const std::vector<SettingSpec> kTrainSettings = {
    {"algo", "hcvb0", "algorithm: hcvb0, cgs, tcvb0, hcsvb0, scvb0 or pcsvb0"},
    {"corpus", "", "UCI docword file (required)"},
    {"vocab", "", "optional vocab file, one term per line"},
    {"config", "", "optional key=value config file; flags override it"},
    {"seed", "42", "run seed"},
    {"sweeps", "100", "sweeps for the batch algorithms (hcvb0, cgs, tcvb0)"},
    {"steps", "200", "minibatch steps for the stochastic algorithms (hcsvb0, scvb0, pcsvb0)"},
    {"T", "", "truncation level; required by tcvb0, scvb0 and pcsvb0, rejected otherwise"},
    {"eval-every", "", "evaluation cadence in sweeps or steps (default 1 for batch, 25 for stochastic)"},
    {"out", "", "output root (default $HYCVB_OUTPUT_ROOT, else ./runs)"},
    {"test-fraction", "0.2", "fraction of documents held out"},
    {"estimation-fraction", "0.7", "token fraction of each test document used for fold-in"},
    {"subsample", "0", "train on a seeded subsample of this many documents (0 = all)"},
    {"clock", "wall", "wall: record training seconds; none: write 0 so output is reproducible"},
    {"alpha", "1.0", "DP concentration (single-membership)"},
    {"beta", "", "component/topic smoothing (default 0.1 single-membership, 0.01 HDP-LDA)"},
    {"prune-threshold", "1e-3", "delete components/topics with mass below this"},
    {"a", "1.0", "HDP document-level concentration"},
    {"alpha0", "1.0", "HDP top-level stick concentration"},
    {"tau0", "64", "step size offset: rho_t = (tau0 + t)^-kappa"},
    {"kappa", "0.6", "step size decay, in (0.5, 1]"},
    {"batch-size", "60", "documents per minibatch"},
    {"burn-in", "5", "uncommitted local passes per document before the committing pass"},
};

bool is_known_key(const std::string& key) {
  return std::any_of(kTrainSettings.begin(), kTrainSettings.end(),
                     [&](const SettingSpec& s) { return s.key == key; });
}

template <class T>
T parse_value(const Settings& s, const std::string& key) {
  const std::string& text = s.at(key);
  T value{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ConfigError("invalid value '" + text + "' for " + key);
  }
  return value;
}

std::string lookup(const Settings& s, const std::string& key, const std::string& fallback = {}) {
  auto it = s.find(key);
  return it == s.end() ? fallback : it->second;
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::HCVB0, Algorithm::CGS, Algorithm::TCVB0, Algorithm::HCSVB0,
                      Algorithm::SCVB0, Algorithm::PCSVB0}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown algorithm '" + name + "'");
}

HdpMode hdp_mode(Algorithm algo) {
  switch (algo) {
    case Algorithm::SCVB0: return HdpMode::SCVB0;
    case Algorithm::PCSVB0: return HdpMode::PCSVB0;
    default: return HdpMode::HCSVB0;
  }
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Sequential minibatches over epoch-wise seeded permutations.
class BatchStream {
 public:
  BatchStream(std::size_t num_docs, std::size_t batch_size, Rng& rng)
      : order_(num_docs), batch_size_(std::min(batch_size, num_docs)), rng_(rng) {
    std::iota(order_.begin(), order_.end(), 0);
    cursor_ = order_.size();
  }

  std::vector<std::size_t> next() {
    std::vector<std::size_t> batch;
    while (batch.size() < batch_size_) {
      if (cursor_ == order_.size()) {
        rng_.shuffle(order_);
        cursor_ = 0;
      }
      batch.push_back(order_[cursor_++]);
    }
    return batch;
  }

  std::size_t batch_size() const { return batch_size_; }

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_size_;
  std::size_t cursor_;
  Rng& rng_;
};

}  // namespace

std::string_view to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::HCVB0: return "hcvb0";
    case Algorithm::CGS: return "cgs";
    case Algorithm::TCVB0: return "tcvb0";
    case Algorithm::HCSVB0: return "hcsvb0";
    case Algorithm::SCVB0: return "scvb0";
    case Algorithm::PCSVB0: return "pcsvb0";
  }
  return "?";
}

bool is_finite(Algorithm algo) {
  return algo == Algorithm::TCVB0 || algo == Algorithm::SCVB0 || algo == Algorithm::PCSVB0;
}

bool is_stochastic(Algorithm algo) {
  return algo == Algorithm::HCSVB0 || algo == Algorithm::SCVB0 || algo == Algorithm::PCSVB0;
}

const std::vector<SettingSpec>& train_settings() { return kTrainSettings; }

Settings read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  Settings out;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    if (!is_known_key(key) || key == "config") {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os << "algo=" << to_string(algorithm) << '\n'
     << "corpus=" << corpus_path << '\n'
     << "vocab=" << vocab_path << '\n'
     << "seed=" << seed << '\n'
     << "iterations=" << iterations << '\n'
     << "T=" << (truncation ? std::to_string(*truncation) : std::string("-")) << '\n'
     << "eval-every=" << eval_every << '\n'
     << "test-fraction=" << format_double(test_fraction) << '\n'
     << "estimation-fraction=" << format_double(estimation_fraction) << '\n'
     << "subsample=" << subsample << '\n'
     << "clock=" << (clock == ClockMode::Wall ? "wall" : "none") << '\n';
  if (is_stochastic(algorithm)) {
    os << "a=" << format_double(hdp.a) << '\n'
       << "alpha0=" << format_double(hdp.alpha0) << '\n'
       << "beta=" << format_double(hdp.beta) << '\n'
       << "tau0=" << format_double(hdp.tau0) << '\n'
       << "kappa=" << format_double(hdp.kappa) << '\n'
       << "batch-size=" << hdp.batch_size << '\n'
       << "burn-in=" << hdp.burn_in_passes << '\n'
       << "prune-threshold=" << format_double(hdp.prune_threshold) << '\n';
  } else {
    os << "alpha=" << format_double(alpha) << '\n'
       << "beta=" << format_double(beta) << '\n'
       << "prune-threshold=" << format_double(prune_threshold) << '\n';
  }
  return os.str();
}

RunConfig resolve_train_config(const Settings& flags) {
  for (const auto& [key, value] : flags) {
    if (!is_known_key(key)) throw ConfigError("unknown setting '" + key + "'");
  }
  Settings explicit_settings;
  if (auto it = flags.find("config"); it != flags.end() && !it->second.empty()) {
    explicit_settings = read_config_file(it->second);
  }
  for (const auto& [key, value] : flags) explicit_settings[key] = value;

  Settings s;
  for (const SettingSpec& spec : kTrainSettings) {
    if (!spec.default_value.empty()) s[spec.key] = spec.default_value;
  }
  for (const auto& [key, value] : explicit_settings) s[key] = value;

  RunConfig c;
  c.algorithm = parse_algorithm(s.at("algo"));
  c.corpus_path = lookup(s, "corpus");
  if (c.corpus_path.empty()) throw ConfigError("--corpus is required");
  c.vocab_path = lookup(s, "vocab");
  c.seed = parse_value<std::uint64_t>(s, "seed");

  const bool stochastic = is_stochastic(c.algorithm);
  if (stochastic && explicit_settings.count("sweeps")) {
    throw ConfigError("--sweeps applies to batch algorithms; use --steps");
  }
  if (!stochastic && explicit_settings.count("steps")) {
    throw ConfigError("--steps applies to stochastic algorithms; use --sweeps");
  }
  c.iterations = parse_value<std::uint64_t>(s, stochastic ? "steps" : "sweeps");
  if (c.iterations == 0) throw ConfigError("iteration count must be positive");

  if (is_finite(c.algorithm)) {
    if (!s.count("T")) throw ConfigError(std::string(to_string(c.algorithm)) + " requires --T");
    c.truncation = parse_value<std::size_t>(s, "T");
    if (*c.truncation < 1) throw ConfigError("--T must be at least 1");
  } else if (s.count("T")) {
    throw ConfigError(std::string(to_string(c.algorithm)) + " is truncation-free and rejects --T");
  }

  c.eval_every = s.count("eval-every") ? parse_value<std::uint64_t>(s, "eval-every")
                                       : (stochastic ? 25 : 1);
  if (c.eval_every == 0) throw ConfigError("--eval-every must be positive");

  if (std::string out = lookup(s, "out"); !out.empty()) {
    c.output_root = out;
  } else if (const char* env = std::getenv(kOutputRootEnv); env && *env) {
    c.output_root = env;
  } else {
    c.output_root = "runs";
  }

  c.test_fraction = parse_value<double>(s, "test-fraction");
  c.estimation_fraction = parse_value<double>(s, "estimation-fraction");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) throw ConfigError("--test-fraction must lie in (0, 1)");
  if (!(c.estimation_fraction > 0.0 && c.estimation_fraction < 1.0)) {
    throw ConfigError("--estimation-fraction must lie in (0, 1)");
  }
  c.subsample = parse_value<std::size_t>(s, "subsample");
  const std::string clock = s.at("clock");
  if (clock == "wall") {
    c.clock = ClockMode::Wall;
  } else if (clock == "none") {
    c.clock = ClockMode::None;
  } else {
    throw ConfigError("--clock must be 'wall' or 'none'");
  }

  c.alpha = parse_value<double>(s, "alpha");
  c.prune_threshold = parse_value<double>(s, "prune-threshold");
  const bool beta_given = s.count("beta") > 0;
  c.beta = beta_given ? parse_value<double>(s, "beta") : 0.1;
  c.hdp.a = parse_value<double>(s, "a");
  c.hdp.alpha0 = parse_value<double>(s, "alpha0");
  c.hdp.beta = beta_given ? c.beta : 0.01;
  c.hdp.tau0 = parse_value<double>(s, "tau0");
  c.hdp.kappa = parse_value<double>(s, "kappa");
  c.hdp.batch_size = parse_value<std::size_t>(s, "batch-size");
  c.hdp.burn_in_passes = parse_value<std::size_t>(s, "burn-in");
  c.hdp.prune_threshold = c.prune_threshold;

  try {
    if (stochastic) {
      c.hdp.validate();
    } else {
      DpmmHyper{c.alpha, DcmHyper{c.beta, 1}}.validate();
    }
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  if (!(c.prune_threshold >= 0.0)) throw ConfigError("--prune-threshold must be nonnegative");
  return c;
}

std::string run_id(const RunConfig& config) {
  std::ostringstream os;
  os << to_string(config.algorithm) << '-' << std::hex << std::setw(16) << std::setfill('0')
     << fnv1a(config.canonical());
  return os.str();
}

TrainResult train(const RunConfig& config, std::ostream& log) {
  ParsedCorpus parsed = load_uci_bagofwords(config.corpus_path, config.vocab_path);
  for (const std::string& w : parsed.report.warnings) log << "warning: " << w << '\n';
  Corpus corpus = std::move(parsed.corpus);
  if (config.subsample > 0) corpus = subsample(corpus, config.subsample, derive_seed(config.seed, kSubsample));
  if (corpus.docs.size() < 2) throw ParseError("corpus needs at least two documents", 0);

  auto [train_docs, test_docs] = split_train_test(corpus, config.test_fraction, derive_seed(config.seed, kTrainTest));
  const HeldOutSet heldout = make_heldout_set(test_docs, config.estimation_fraction,
                                              derive_seed(config.seed, kHeldOut));
  auto train_corpus = std::make_shared<const Corpus>(std::move(train_docs));
  const std::size_t num_train = train_corpus->docs.size();

  TrainResult result;
  result.run_id = run_id(config);
  result.run_dir = config.output_root / result.run_id;
  std::filesystem::create_directories(result.run_dir);
  log << "run " << result.run_id << ": " << to_string(config.algorithm) << " on " << num_train
      << " training / " << heldout.docs.size() << " held-out documents, V=" << corpus.vocab_size << '\n';

  Rng rng(derive_seed(config.seed, kEngine));
  double train_seconds = 0.0;
  auto record = [&](std::uint64_t iteration, std::uint64_t docs_processed, std::size_t k,
                    double perplexity) {
    MetricsRecord r;
    r.run_id = result.run_id;
    r.algorithm = std::string(to_string(config.algorithm));
    r.iteration = iteration;
    r.docs_processed = docs_processed;
    r.wall_clock_s = config.clock == ClockMode::Wall ? train_seconds : 0.0;
    r.num_components = k;
    r.heldout_perplexity = perplexity;
    r.seed = config.seed;
    result.metrics.push_back(r);
    log << "iter " << iteration << " K=" << k << " perplexity=" << perplexity << '\n';
  };

  std::ostringstream snapshot_text;
  if (!is_stochastic(config.algorithm)) {
    DpmmHyper hyper{config.alpha, DcmHyper{config.beta, corpus.vocab_size}};
    SweepOptions options;
    options.prune_threshold = config.prune_threshold;
    DpmmState state;
    if (config.algorithm == Algorithm::TCVB0) {
      Rng init(derive_seed(config.seed, kInit));
      state = DpmmState::truncated(train_corpus, *config.truncation, init);
    } else {
      state = DpmmState::empty(train_corpus, config.algorithm == Algorithm::CGS);
    }
    for (std::uint64_t it = 1; it <= config.iterations; ++it) {
      const auto start = Clock::now();
      switch (config.algorithm) {
        case Algorithm::HCVB0: hcvb0_sweep(state, hyper, rng, options); break;
        case Algorithm::CGS: cgs_sweep(state, hyper, rng, options); break;
        default: tcvb0_sweep(state, hyper, options); break;
      }
      train_seconds += std::chrono::duration<double>(Clock::now() - start).count();
      if (it % config.eval_every == 0 || it == config.iterations) {
        const double ppl = heldout_single_membership(snapshot(state, hyper), heldout).perplexity;
        record(it, it * num_train, state.num_components(), ppl);
      }
    }
    result.final_components = state.num_components();
    save_snapshot(snapshot(state, hyper), snapshot_text);
  } else {
    const HdpMode mode = hdp_mode(config.algorithm);
    HdpHyper hyper = config.hdp;
    HdpState state = HdpState::empty(corpus.vocab_size, num_train);
    if (config.truncation) {
      Rng init(derive_seed(config.seed, kInit));
      state = HdpState::with_topics(corpus.vocab_size, num_train, *config.truncation, mode, hyper, init);
    }
    BatchStream batches(num_train, hyper.batch_size, rng);
    std::vector<Document> batch;
    for (std::uint64_t it = 1; it <= config.iterations; ++it) {
      batch.clear();
      for (std::size_t i : batches.next()) batch.push_back(train_corpus->docs[i]);
      const auto start = Clock::now();
      minibatch_step(state, batch, hyper, mode, rng);
      train_seconds += std::chrono::duration<double>(Clock::now() - start).count();
      if (it % config.eval_every == 0 || it == config.iterations) {
        const double ppl = heldout_mixed_membership(state, hyper, heldout).perplexity;
        record(it, it * batches.batch_size(), state.num_topics(), ppl);
      }
    }
    result.final_components = state.num_topics();
    save_snapshot(HdpModel{hyper, mode, state}, snapshot_text);
  }

  std::ostringstream csv;
  write_metrics_csv(result.metrics, csv);
  write_text_file(result.run_dir / "metrics.csv", csv.str());
  write_text_file(result.run_dir / "model.snapshot", snapshot_text.str());
  write_text_file(result.run_dir / "config.txt", config.canonical());
  std::ostringstream test_text;
  write_uci(test_docs, test_text);
  write_text_file(result.run_dir / "test.docword", test_text.str());
  return result;
}

int cmd_train(const Settings& flags, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = resolve_train_config(flags);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadConfig;
  }
  try {
    TrainResult r = train(config, out);
    out << "wrote " << (r.run_dir / "metrics.csv").string() << " and "
        << (r.run_dir / "model.snapshot").string() << '\n';
  } catch (const ParseError& e) {
    err << "error: corpus: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  return kExitOk;
}

int cmd_eval(const Settings& flags, std::ostream& out, std::ostream& err) {
  std::uint64_t seed = 42;
  double fraction = 0.7;
  try {
    for (const auto& [key, value] : flags) {
      static const std::set<std::string> known = {"snapshot", "corpus", "vocab", "seed", "estimation-fraction"};
      if (!known.count(key)) throw ConfigError("unknown setting '" + key + "'");
    }
    if (lookup(flags, "snapshot").empty()) throw ConfigError("--snapshot is required");
    if (lookup(flags, "corpus").empty()) throw ConfigError("--corpus is required");
    if (flags.count("seed")) seed = parse_value<std::uint64_t>(flags, "seed");
    if (flags.count("estimation-fraction")) fraction = parse_value<double>(flags, "estimation-fraction");
    if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("--estimation-fraction must lie in (0, 1)");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadConfig;
  }

  try {
    std::ifstream in(flags.at("snapshot"));
    if (!in) throw ParseError("cannot open " + flags.at("snapshot"), 0);
    const ModelSnapshot model = load_snapshot(in);
    const ParsedCorpus parsed = load_uci_bagofwords(flags.at("corpus"), lookup(flags, "vocab"));
    const HeldOutSet heldout = make_heldout_set(parsed.corpus, fraction, derive_seed(seed, kHeldOut));
    PerplexityResult r;
    std::size_t vocab = 0;
    if (const auto* dp = std::get_if<DpmmModel>(&model)) {
      vocab = dp->hyper.dcm.vocab_size;
      if (vocab != parsed.corpus.vocab_size) throw ParseError("corpus vocabulary size does not match the model", 0);
      r = heldout_single_membership(*dp, heldout);
    } else {
      const auto& hdp = std::get<HdpModel>(model);
      vocab = hdp.state.vocab_size;
      if (vocab != parsed.corpus.vocab_size) throw ParseError("corpus vocabulary size does not match the model", 0);
      r = heldout_mixed_membership(hdp.state, hdp.hyper, heldout);
    }
    out << "perplexity " << format_double(r.perplexity) << '\n'
        << "documents " << r.docs << '\n'
        << "tokens " << r.tokens << '\n'
        << "skipped " << r.skipped << '\n';
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  return kExitOk;
}

int cmd_synth(const Settings& flags, std::ostream& out, std::ostream& err) {
  Settings s = {{"kind", "dpmm"}, {"components", "5"}, {"docs", "500"}, {"vocab-size", "50"},
                {"doc-length", "50"}, {"alpha", "1.0"}, {"beta", "0.01"}, {"seed", "42"}};
  std::string prefix;
  try {
    for (const auto& [key, value] : flags) {
      if (key == "out") {
        prefix = value;
      } else if (s.count(key)) {
        s[key] = value;
      } else {
        throw ConfigError("unknown setting '" + key + "'");
      }
    }
    if (prefix.empty()) throw ConfigError("--out is required");
    const std::string kind = s.at("kind");
    if (kind != "dpmm" && kind != "lda") throw ConfigError("--kind must be 'dpmm' or 'lda'");
    const auto k = parse_value<std::size_t>(s, "components");
    const auto n = parse_value<std::size_t>(s, "docs");
    const auto v = parse_value<std::size_t>(s, "vocab-size");
    const auto len = parse_value<std::size_t>(s, "doc-length");
    const auto alpha = parse_value<double>(s, "alpha");
    const auto beta = parse_value<double>(s, "beta");
    const auto seed = parse_value<std::uint64_t>(s, "seed");

    Corpus corpus;
    std::ostringstream labels;
    try {
      if (kind == "dpmm") {
        SyntheticCorpus syn = generate_synthetic(k, n, v, len, alpha, beta, seed);
        corpus = std::move(syn.corpus);
        for (std::uint32_t z : syn.labels) labels << z << '\n';
      } else {
        corpus = generate_lda_synthetic(k, n, v, len, alpha, beta, seed).corpus;
      }
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
    std::ostringstream docword;
    write_uci(corpus, docword);
    write_text_file(prefix + ".docword", docword.str());
    if (kind == "dpmm") write_text_file(prefix + ".labels", labels.str());
    out << "wrote " << corpus.docs.size() << " documents to " << prefix << ".docword\n";
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  return kExitOk;
}

int cmd_properties(const Settings& flags, std::ostream& out, std::ostream& err) {
  PropertySuiteConfig config;
  try {
    for (const auto& [key, value] : flags) {
      if (key == "seed") {
        config.seed = parse_value<std::uint64_t>(flags, key);
      } else if (key == "draws") {
        config.draws = parse_value<std::size_t>(flags, key);
      } else if (key == "vectors") {
        config.expectation_vectors = parse_value<std::size_t>(flags, key);
      } else {
        throw ConfigError("unknown setting '" + key + "'");
      }
    }
    if (config.draws == 0) throw ConfigError("--draws must be positive");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadConfig;
  }
  bool all = true;
  for (const PropertyCheck& c : run_hybrid_property_suite(config)) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    all = all && c.passed;
  }
  return all ? kExitOk : kExitFailed;
}

}  // namespace hycvb::cli
