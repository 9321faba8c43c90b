// codecal: calibration analysis for code-generation outputs.
//
//   codecal validate --input corpus.jsonl [--notion all-pass]
//   codecal analyze  --input corpus.jsonl --notion all-pass --out results/
//   codecal synth    --n 10000 --profile overconfident --seed 0 --out corpus.jsonl

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "codecal/cli.hpp"

using namespace codecal;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) items.push_back(item);
  return items;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibration metrics, Platt rescaling and reliability plots for generated code"};
  app.require_subcommand(1);

  std::vector<std::string> inputs;
  std::string notion_text;

  auto* validate = app.add_subcommand("validate", "Check a JSONL corpus against the record schema");
  validate->add_option("--input", inputs, "JSONL corpus (repeatable)")->required();
  validate->add_option("--notion", notion_text, "Also require the fields of this notion: exact-match|all-pass");

  cli::RunConfig config;
  std::string measures_text = "avg_prob,total_prob,verbalize,ask_tf,ask_tf_norm,length_baseline";
  std::string scheme_text = "equal";
  std::string format_text = "markdown";
  std::string feature_text = "ln_prob";
  std::string analyze_notion = "all-pass";
  std::string out_dir = "codecal-out";

  auto* analyze = app.add_subcommand("analyze", "Score, label, rescale and report a corpus");
  analyze->add_option("--input", inputs, "JSONL corpus (repeatable)")->required();
  analyze->add_option("--measures", measures_text, "Comma-separated confidence measures")->capture_default_str();
  analyze->add_option("--notion", analyze_notion, "exact-match|all-pass")->capture_default_str();
  analyze->add_option("--bins", config.bins, "Reliability bins")->capture_default_str();
  analyze->add_option("--scheme", scheme_text, "equal|quantile")->capture_default_str();
  analyze->add_option("--folds", config.folds, "Cross-fitting folds for Platt scaling")->capture_default_str();
  analyze->add_option("--seed", config.seed, "Seed for fold assignment")->capture_default_str();
  analyze->add_option("--collapse-threshold", config.collapse_threshold,
                      "Omit rescaled ECE when skill is below this")
      ->capture_default_str();
  analyze->add_option("--epsilon", config.epsilon, "Clamp for ln(p) in Platt scaling")->capture_default_str();
  analyze->add_option("--feature", feature_text, "Platt feature: ln_prob|logit")->capture_default_str();
  analyze->add_option("--out", out_dir, "Output directory")->capture_default_str();
  analyze->add_option("--format", format_text, "markdown|csv")->capture_default_str();
  analyze->add_flag("--full-precision", config.full_precision, "CSV values at full precision");

  cli::SynthOptions synth_opts;
  std::string profile_text = "calibrated";
  std::string synth_out = "synthetic.jsonl";
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus with a known calibration profile");
  synth->add_option("--n", synth_opts.n, "Number of records (>= 100)")->capture_default_str();
  synth->add_option("--seed", synth_opts.seed, "Generator seed")->capture_default_str();
  synth->add_option("--profile", profile_text, "calibrated|overconfident|uninformative")->capture_default_str();
  synth->add_option("--out", synth_out, "Output JSONL path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigError;
  }

  auto config_error = [](const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    return cli::kConfigError;
  };

  if (*validate) {
    cli::ValidateOptions opts;
    opts.inputs.assign(inputs.begin(), inputs.end());
    if (!notion_text.empty()) {
      opts.notion = parse_notion(notion_text);
      if (!opts.notion) return config_error("unknown notion '" + notion_text + "'");
    }
    return cli::cmd_validate(opts, std::cout, std::cerr);
  }

  if (*analyze) {
    config.inputs.assign(inputs.begin(), inputs.end());
    config.measures.clear();
    for (const auto& name : split_list(measures_text)) {
      auto m = parse_measure(name);
      if (!m) return config_error("unknown measure '" + name + "'");
      config.measures.push_back(*m);
    }
    auto notion = parse_notion(analyze_notion);
    if (!notion) return config_error("unknown notion '" + analyze_notion + "'");
    config.notion = *notion;
    auto scheme = parse_bin_scheme(scheme_text);
    if (!scheme) return config_error("unknown scheme '" + scheme_text + "'");
    config.scheme = *scheme;
    auto format = parse_table_format(format_text);
    if (!format) return config_error("unknown format '" + format_text + "'");
    config.format = *format;
    auto feature = parse_platt_feature(feature_text);
    if (!feature) return config_error("unknown feature '" + feature_text + "'");
    config.feature = *feature;
    config.out_dir = out_dir;
    return cli::cmd_analyze(config, std::cout, std::cerr);
  }

  auto profile = cli::parse_synth_profile(profile_text);
  if (!profile) return config_error("unknown profile '" + profile_text + "'");
  synth_opts.profile = *profile;
  return cli::cmd_synth(synth_opts, synth_out, std::cout, std::cerr);
}
