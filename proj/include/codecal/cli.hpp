#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "codecal/confidence.hpp"
#include "codecal/correctness.hpp"
#include "codecal/metrics.hpp"
#include "codecal/report.hpp"
#include "codecal/rescale.hpp"

namespace codecal::cli {

enum ExitCode : int { kOk = 0, kDataViolation = 1, kIoFailure = 2, kConfigError = 3 };

struct RunConfig {
  std::vector<std::filesystem::path> inputs;
  std::vector<Measure> measures{std::begin(kAllMeasures), std::end(kAllMeasures)};
  Notion notion = Notion::all_pass;
  std::size_t bins = kDefaultBins;
  BinScheme scheme = BinScheme::equal_width;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  double collapse_threshold = 0.05;
  double epsilon = kDefaultEpsilon;
  PlattFeature feature = PlattFeature::ln_prob;
  std::filesystem::path out_dir = "codecal-out";
  TableFormat format = TableFormat::markdown;
  bool full_precision = false;
};

/// Throws ConfigError describing the first invalid field.
void check_config(const RunConfig& config);

struct ValidateOptions {
  std::vector<std::filesystem::path> inputs;
  std::optional<Notion> notion;
};

int cmd_validate(const ValidateOptions& options, std::ostream& out, std::ostream& err);

/// Writes report.{md,csv}, reliability_<measure>_{raw,scaled}.svg,
/// bands.md and, when both labels exist, crosstab.md into out_dir.
int cmd_analyze(const RunConfig& config, std::ostream& out, std::ostream& err);

enum class SynthProfile { calibrated, overconfident, uninformative };

std::optional<SynthProfile> parse_synth_profile(std::string_view text) noexcept;

struct SynthOptions {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  SynthProfile profile = SynthProfile::calibrated;
};

/// Deterministic synthetic corpus. The latent confidence p ~ U(0.01, 0.99)
/// is exactly the record's average token probability; labels are drawn from
/// Bernoulli(p), Bernoulli(p^2) or Bernoulli(0.5) depending on the profile.
std::vector<GenerationRecord> synthesize(const SynthOptions& options);

int cmd_synth(const SynthOptions& options, const std::filesystem::path& out_path, std::ostream& out,
              std::ostream& err);

}  // namespace codecal::cli
