// hycvb: train, evaluate and inspect truncation-free hybrid mixture models.

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "hycvb/cli.hpp"

namespace {

using hycvb::cli::Settings;

// Binds each flag to a string slot; only flags the user actually passed are
// forwarded, so config-file values and defaults are resolved downstream.
struct FlagSet {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void add(CLI::App* app, const std::string& key, const std::string& help) {
    options[key] = app->add_option("--" + key, values[key], help);
  }

  Settings given() const {
    Settings out;
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) out[key] = values.at(key);
    }
    return out;
  }
};

std::string with_default(const hycvb::cli::SettingSpec& spec) {
  return spec.default_value.empty() ? spec.help : spec.help + " [default: " + spec.default_value + "]";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncation-free hybrid collapsed variational inference for DP mixtures and HDP-LDA"};
  app.require_subcommand(1);

  FlagSet train_flags, eval_flags, synth_flags, property_flags;

  CLI::App* train = app.add_subcommand("train", "train a model and write metrics.csv and model.snapshot");
  for (const auto& spec : hycvb::cli::train_settings()) train_flags.add(train, spec.key, with_default(spec));

  CLI::App* eval = app.add_subcommand("eval", "score a saved model on a corpus of held-out documents");
  eval_flags.add(eval, "snapshot", "model snapshot file (required)");
  eval_flags.add(eval, "corpus", "UCI docword file of test documents (required)");
  eval_flags.add(eval, "vocab", "optional vocab file");
  eval_flags.add(eval, "seed", "seed for the per-document 70/30 token split [default: 42]");
  eval_flags.add(eval, "estimation-fraction", "token fraction used for fold-in [default: 0.7]");

  CLI::App* synth = app.add_subcommand("synth", "write a synthetic corpus");
  synth_flags.add(synth, "kind", "dpmm (single-membership, writes labels) or lda [default: dpmm]");
  synth_flags.add(synth, "components", "number of true components/topics [default: 5]");
  synth_flags.add(synth, "docs", "number of documents [default: 500]");
  synth_flags.add(synth, "vocab-size", "vocabulary size [default: 50]");
  synth_flags.add(synth, "doc-length", "tokens per document [default: 50]");
  synth_flags.add(synth, "alpha", "mixture concentration (dpmm: Dir(alpha/K); lda: Dir(alpha)) [default: 1.0]");
  synth_flags.add(synth, "beta", "topic concentration [default: 0.01]");
  synth_flags.add(synth, "seed", "generator seed [default: 42]");
  synth_flags.add(synth, "out", "output path prefix (required)");

  CLI::App* props = app.add_subcommand("properties", "run the hybrid-update Monte Carlo property suite");
  property_flags.add(props, "seed", "suite seed [default: 1]");
  property_flags.add(props, "draws", "draws per probability vector [default: 100000]");
  property_flags.add(props, "vectors", "random vectors for the expectation check [default: 50]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hycvb::cli::kExitBadConfig;
  }

  if (*train) return hycvb::cli::cmd_train(train_flags.given(), std::cout, std::cerr);
  if (*eval) return hycvb::cli::cmd_eval(eval_flags.given(), std::cout, std::cerr);
  if (*synth) return hycvb::cli::cmd_synth(synth_flags.given(), std::cout, std::cerr);
  return hycvb::cli::cmd_properties(property_flags.given(), std::cout, std::cerr);
}
