#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace codecal {

struct ScoredSample {
  double confidence = 0.0;
  bool correct = false;
};

enum class BinScheme { equal_width, quantile };

std::string_view to_string(BinScheme scheme) noexcept;
/// Accepts "equal", "equal_width", "quantile".
std::optional<BinScheme> parse_bin_scheme(std::string_view text) noexcept;

struct Bin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double conf = 0.0;  // mean confidence of members, 0 when empty
  double corr = 0.0;  // fraction correct, 0 when empty
};

struct ReliabilityBins {
  BinScheme scheme = BinScheme::equal_width;
  std::size_t m = 10;
  std::vector<Bin> bins;

  std::size_t total() const noexcept;
};

inline constexpr std::size_t kDefaultBins = 10;
inline constexpr std::size_t kDefaultQuantileBins = 5;

/// Left edge of equal-width bin i out of m: i / m.
double equal_width_edge(std::size_t i, std::size_t m) noexcept;

/// Index of the equal-width bin holding a confidence. Bins are half-open
/// [i/m, (i+1)/m) except the last, which also holds 1.0.
std::size_t equal_width_index(double confidence, std::size_t m) noexcept;

/// Throws DataError on empty input and ConfigError when m == 0.
///
/// Quantile bins cut the confidence-sorted sample at floor(j*n/m); a cut that
/// would split a run of equal confidences is moved to the end of that run,
/// so bin sizes differ from n/m by at most one tie group.
ReliabilityBins bin_samples(std::span<const ScoredSample> samples, BinScheme scheme, std::size_t m);

/// Count-weighted mean |corr - conf|. Throws DataError if the bin counts do not sum to n.
double ece(const ReliabilityBins& bins, std::size_t n);

double brier(std::span<const ScoredSample> samples);
double brier_ref(double base_rate) noexcept;
/// Throws DataError when brier_ref_value <= 0 (degenerate base rate).
double skill_score(double brier_actual, double brier_ref_value);
/// Rank-sum AUC with midranks for ties. Throws DataError on a single-class sample.
double auc_roc(std::span<const ScoredSample> samples);
double base_rate(std::span<const ScoredSample> samples);

struct CalibrationReport {
  std::size_t n = 0;
  double base_rate = 0.0;
  double brier = 0.0;
  double brier_ref = 0.0;
  std::optional<double> skill;  // absent when brier_ref == 0
  std::optional<double> ece;    // absent when omitted, see ece_omitted_reason
  std::optional<double> auc;    // absent for single-class samples
  std::optional<std::string> ece_omitted_reason;
  /// Caveat attached to a reported ECE (e.g. the constant base-rate predictor).
  std::optional<std::string> ece_note;
};

struct ReportOptions {
  BinScheme scheme = BinScheme::equal_width;
  std::size_t m = kDefaultBins;
  /// Set for Platt-rescaled scores; enables the collapse rule.
  bool rescaled = false;
  double collapse_threshold = 0.05;
};

CalibrationReport report(std::span<const ScoredSample> samples, const ReportOptions& options = {});

/// Report for the predictor that always answers the corpus base rate.
CalibrationReport unskilled_report(std::span<const ScoredSample> samples,
                                   const ReportOptions& options = {});

}  // namespace codecal
