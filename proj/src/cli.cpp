#include "codecal/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <unordered_set>

#include "codecal/error.hpp"
#include "codecal/rng.hpp"

namespace codecal::cli {

namespace {

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

std::vector<GenerationRecord> load_all(const std::vector<std::filesystem::path>& inputs, std::ostream& err) {
  std::vector<GenerationRecord> corpus;
  std::unordered_set<std::string> ids;
  for (const auto& path : inputs) {
    RecordSet set = load_records(path);
    if (set.unknown_fields > 0)
      err << "warning: " << path.string() << ": ignored " << set.unknown_fields << " unknown field(s)\n";
    for (auto& r : set.records) {
      if (!ids.insert(r.record_id).second)
        throw DataError(path.string() + ": record_id '" + r.record_id + "' already loaded from another input");
      corpus.push_back(std::move(r));
    }
  }
  return corpus;
}

std::string plot_title(Measure measure, Notion notion, std::string_view variant) {
  return std::string(to_string(measure)) + " vs " + std::string(to_string(notion)) + " (" + std::string(variant) + ")";
}

void write_plot(const std::filesystem::path& path, std::span<const ScoredSample> samples,
                const CalibrationReport& report, const RunConfig& config, std::string title) {
  PlotSpec spec;
  spec.bins = bin_samples(samples, config.scheme, config.bins);
  spec.annotations = annotations_from(report);
  spec.quantile_overlay = bin_samples(samples, BinScheme::quantile, kDefaultQuantileBins);
  spec.title = std::move(title);
  emit_reliability_plot(spec, path);
}

std::string bands_table(const std::vector<std::pair<std::string, std::vector<ScoredSample>>>& scored) {
  const auto bands = DecisionBands::defaults();
  std::string s = "| Measure | Action | Lower | n | Fraction correct |\n|:---|:---|---:|---:|---:|\n";
  for (const auto& [name, samples] : scored) {
    for (const auto& band : bands.bands()) {
      std::size_t n = 0, correct = 0;
      for (const auto& smp : samples) {
        if (&apply_bands(bands, smp.confidence) != &band.action) continue;
        ++n;
        correct += smp.correct ? 1 : 0;
      }
      s += "| " + name + " | " + band.action + " | " + format_2dp(band.lower) + " | " + std::to_string(n) + " | " +
           (n ? format_2dp(static_cast<double>(correct) / static_cast<double>(n)) : std::string()) + " |\n";
    }
  }
  return s;
}

}  // namespace

void check_config(const RunConfig& config) {
  if (config.inputs.empty()) throw ConfigError("at least one --input is required");
  if (config.measures.empty()) throw ConfigError("--measures must name at least one measure");
  if (config.folds < 2) throw ConfigError("--folds must be at least 2");
  if (config.bins < 1) throw ConfigError("--bins must be at least 1");
  if (!(config.epsilon > 0.0 && config.epsilon < 0.5)) throw ConfigError("--epsilon must lie in (0, 0.5)");
  if (!std::isfinite(config.collapse_threshold)) throw ConfigError("--collapse-threshold must be finite");
}

int cmd_validate(const ValidateOptions& options, std::ostream& out, std::ostream& err) {
  if (options.inputs.empty()) {
    err << "error: at least one --input is required\n";
    return kConfigError;
  }
  std::size_t records = 0;
  std::size_t violations = 0;
  std::unordered_set<std::string> ids;
  ValidationOptions vopts;
  vopts.require_test_outcome = options.notion == Notion::all_pass;
  for (const auto& path : options.inputs) {
    RecordSet set;
    try {
      set = load_records(path);
    } catch (const IoError& e) {
      err << "error: " << e.what() << "\n";
      return kIoFailure;
    } catch (const DataError& e) {
      out << e.what() << "\n";
      ++violations;
      continue;
    }
    if (set.unknown_fields > 0)
      err << "warning: " << path.string() << ": ignored " << set.unknown_fields << " unknown field(s)\n";
    for (const auto& r : set.records) {
      ++records;
      std::vector<std::string> found = validate_record(r, vopts);
      if (!ids.insert(r.record_id).second) found.push_back("record_id: duplicate across inputs");
      if (options.notion == Notion::exact_match && !r.reference_text)
        found.push_back("reference_text: missing (required by exact_match)");
      if (options.notion == Notion::all_pass && !r.test_report)
        found.push_back("test_report: missing (required by all_pass)");
      for (const auto& v : found) out << path.string() << ": " << r.record_id << ": " << v << "\n";
      violations += found.size();
    }
  }
  out << records << " record(s), " << violations << " violation(s)\n";
  return violations == 0 ? kOk : kDataViolation;
}

int cmd_analyze(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    check_config(config);
    std::vector<GenerationRecord> corpus = load_all(config.inputs, err);
    if (corpus.empty()) throw DataError("the corpus is empty");

    ValidationOptions vopts;
    vopts.require_test_outcome = config.notion == Notion::all_pass;
    std::size_t violations = 0;
    for (const auto& r : corpus) {
      for (const auto& v : validate_record(r, vopts)) {
        err << "violation: " << r.record_id << ": " << v << "\n";
        ++violations;
      }
    }
    if (violations > 0) throw DataError(std::to_string(violations) + " validation violation(s); run validate");

    std::vector<bool> labels;
    labels.reserve(corpus.size());
    for (const auto& r : corpus) labels.push_back(label_record(r, config.notion).correct);

    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + config.out_dir.string() + "': " + ec.message());

    const CorpusLengthStats stats = corpus_length_stats(corpus);
    ReportOptions raw_opts{config.scheme, config.bins, false, config.collapse_threshold};
    ReportOptions scaled_opts{config.scheme, config.bins, true, config.collapse_threshold};
    PlattFitOptions fit_opts;
    fit_opts.epsilon = config.epsilon;
    fit_opts.feature = config.feature;

    const std::string notion(to_string(config.notion));
    std::vector<ReportRow> rows;
    std::vector<std::pair<std::string, std::vector<ScoredSample>>> banded;
    std::vector<ScoredSample> any_samples;
    std::size_t analyzed = 0;

    for (Measure measure : config.measures) {
      const std::string name(to_string(measure));
      std::vector<ScoredSample> samples;
      samples.reserve(corpus.size());
      std::size_t fallbacks = 0;
      try {
        for (std::size_t i = 0; i < corpus.size(); ++i) {
          const ConfidenceScore score = score_record(corpus[i], measure, stats);
          fallbacks += score.fallback_used ? 1 : 0;
          samples.push_back({score.value, labels[i]});
        }
      } catch (const DataError& e) {
        err << "warning: skipping measure " << name << ": " << e.what() << "\n";
        continue;
      }
      ++analyzed;
      if (fallbacks > 0) out << name << ": " << fallbacks << " record(s) used a fallback value\n";
      if (any_samples.empty()) any_samples = samples;

      const CalibrationReport raw = report(samples, raw_opts);
      rows.push_back({name, notion, "raw", raw});
      write_plot(config.out_dir / ("reliability_" + name + "_raw.svg"), samples, raw, config,
                 plot_title(measure, config.notion, "raw"));

      try {
        const std::vector<double> rescaled = cross_fold_rescale(samples, config.folds, config.seed, fit_opts);
        std::vector<ScoredSample> scaled_samples = samples;
        for (std::size_t i = 0; i < rescaled.size(); ++i) scaled_samples[i].confidence = rescaled[i];
        const CalibrationReport scaled = report(scaled_samples, scaled_opts);
        rows.push_back({name, notion, "scaled", scaled});
        write_plot(config.out_dir / ("reliability_" + name + "_scaled.svg"), scaled_samples, scaled, config,
                   plot_title(measure, config.notion, "scaled"));
        banded.emplace_back(name + " (scaled)", std::move(scaled_samples));
      } catch (const Error& e) {
        err << "warning: no rescaled results for " << name << ": " << e.what() << "\n";
        banded.emplace_back(name + " (raw)", std::move(samples));
      }
    }

    if (analyzed == 0) throw DataError("every requested measure was skipped");

    rows.push_back({"unskilled", notion, "baseline", unskilled_report(any_samples, raw_opts)});

    TableOptions table;
    table.format = config.format;
    table.full_precision = config.full_precision;
    const std::string table_name = config.format == TableFormat::csv ? "report.csv" : "report.md";
    const std::string rendered = render_report_table(rows, table);
    write_text(config.out_dir / table_name, rendered);
    write_text(config.out_dir / "bands.md", bands_table(banded));

    const bool both_labels = std::all_of(corpus.begin(), corpus.end(), [](const GenerationRecord& r) {
      return r.reference_text.has_value() && r.test_report.has_value();
    });
    if (both_labels) {
      const CrossTab tab = cross_tab(corpus);
      write_text(config.out_dir / "crosstab.md", tab.to_markdown());
      if (tab.possible_flakes() > 0)
        out << "cross-tab: " << tab.possible_flakes() << " exact match(es) with failing tests (possible flakes)\n";
    }

    out << rendered;
    return kOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataViolation;
  }
}

std::optional<SynthProfile> parse_synth_profile(std::string_view text) noexcept {
  if (text == "calibrated") return SynthProfile::calibrated;
  if (text == "overconfident") return SynthProfile::overconfident;
  if (text == "uninformative") return SynthProfile::uninformative;
  return std::nullopt;
}

std::vector<GenerationRecord> synthesize(const SynthOptions& options) {
  constexpr Task kTasks[] = {Task::function_synthesis, Task::line_completion, Task::program_repair};
  Rng rng(options.seed);
  std::vector<GenerationRecord> corpus;
  corpus.reserve(options.n);

  for (std::size_t i = 0; i < options.n; ++i) {
    const double p = 0.01 + 0.98 * rng.uniform();
    double p_correct = p;
    if (options.profile == SynthProfile::overconfident) p_correct = p * p;
    if (options.profile == SynthProfile::uninformative) p_correct = 0.5;
    const bool correct = rng.bernoulli(p_correct);

    GenerationRecord r;
    char id[32];
    std::snprintf(id, sizeof id, "synth-%06zu", i);
    r.record_id = id;
    r.task = kTasks[i % 3];

    const std::size_t tokens = 1 + static_cast<std::size_t>(rng.below(12));
    r.token_logprobs = std::vector<double>(tokens, std::log(p));

    // Length tracks the latent confidence, not the label, so it only carries
    // signal when the labels do.
    const std::size_t pad = static_cast<std::size_t>(rng.below(20)) + static_cast<std::size_t>(30.0 * (1.0 - p));
    r.generated_text = "result_" + std::to_string(i) + " = compute(" + std::string(pad, 'x') + ")";
    r.generated_length_chars = utf8_length(r.generated_text);
    r.reference_text = correct ? r.generated_text : "result_" + std::to_string(i) + " = expected()";

    TestReport tests;
    if (correct) {
      tests.passed = 1 + static_cast<std::int64_t>(rng.below(5));
    } else if (rng.bernoulli(0.3)) {
      tests.syntax_ok = false;
    } else {
      tests.passed = static_cast<std::int64_t>(rng.below(4));
      tests.failed = 1 + static_cast<std::int64_t>(rng.below(3));
    }
    r.test_report = tests;

    const double verbal = std::min(1.0, 0.4 + 0.6 * p);
    const double roll = rng.uniform();
    char answer[96];
    std::snprintf(answer, sizeof answer, "I am about %.0f%% confident the code is correct.", 100.0 * verbal);
    if (roll < 0.1) {
      r.verbalized_responses = std::vector<std::string>{"I cannot tell.", "n/a", "It depends on the tests."};
    } else if (roll < 0.3) {
      r.verbalized_responses = std::vector<std::string>{"Hard to say.", answer};
    } else {
      r.verbalized_responses = std::vector<std::string>{answer};
    }

    const double p_true = std::clamp(0.2 + 0.6 * p + 0.1 * (rng.uniform() - 0.5), 0.01, 0.95);
    const double p_false = 0.8 * (1.0 - p_true);
    const double p_other = 0.5 * (1.0 - p_true - p_false);
    std::vector<TfCandidate> first{{" True", std::log(p_true)}, {" False", std::log(p_false)},
                                   {" The", std::log(p_other)}};
    std::stable_sort(first.begin(), first.end(),
                     [](const TfCandidate& a, const TfCandidate& b) { return a.logprob > b.logprob; });
    TfResponse tf;
    tf.positions.push_back(std::move(first));
    tf.positions.push_back({{"\n", std::log(0.9)}, {".", std::log(0.05)}});
    r.tf_response = std::move(tf);

    corpus.push_back(std::move(r));
  }
  return corpus;
}

int cmd_synth(const SynthOptions& options, const std::filesystem::path& out_path, std::ostream& out,
              std::ostream& err) {
  if (options.n < 100) {
    err << "error: --n must be at least 100\n";
    return kConfigError;
  }
  try {
    if (out_path.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(out_path.parent_path(), ec);
    }
    save_records(out_path, synthesize(options));
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoFailure;
  }
  out << "wrote " << options.n << " records to " << out_path.string() << "\n";
  return kOk;
}

}  // namespace codecal::cli
