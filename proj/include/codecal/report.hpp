#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "codecal/metrics.hpp"

namespace codecal {

struct ReportRow {
  std::string measure;
  std::string notion;
  std::string variant;  // "raw", "scaled", "baseline"
  CalibrationReport report;
};

enum class TableFormat { markdown, csv };

std::optional<TableFormat> parse_table_format(std::string_view text) noexcept;

struct TableOptions {
  TableFormat format = TableFormat::markdown;
  /// CSV only: print values with round-trip precision instead of 2 decimals.
  bool full_precision = false;
};

/// One row per entry, in the given order. Omitted ECE cells are blank and
/// carry a footnote (markdown) or a note column (CSV).
std::string render_report_table(std::span<const ReportRow> rows, const TableOptions& options = {});

/// Two-decimal rendering used in tables; skill scores carry an explicit sign.
std::string format_2dp(double value);
std::string format_signed_2dp(double value);

struct PlotAnnotations {
  double brier = 0.0;
  double brier_ref = 0.0;
  std::optional<double> ece;
  std::optional<double> skill;
};

PlotAnnotations annotations_from(const CalibrationReport& report);

struct PlotSpec {
  ReliabilityBins bins;
  PlotAnnotations annotations;
  std::optional<ReliabilityBins> quantile_overlay;
  std::string title;
};

/// Plot geometry in SVG user units. The unit square maps to
/// [left, left + size] x [top, top + size], y pointing down.
struct PlotLayout {
  static constexpr double width = 480.0;
  static constexpr double height = 500.0;
  static constexpr double left = 70.0;
  static constexpr double top = 50.0;
  static constexpr double size = 360.0;

  static constexpr double x(double u) noexcept { return left + size * u; }
  static constexpr double y(double v) noexcept { return top + size * (1.0 - v); }
};

std::string render_reliability_svg(const PlotSpec& spec);
/// Throws IoError when the file cannot be written.
void emit_reliability_plot(const PlotSpec& spec, const std::filesystem::path& path);

/// ROC curve as a polyline, diagonal for reference.
std::string render_roc_svg(std::span<const ScoredSample> samples, std::string_view title);

struct DecisionBand {
  double lower = 0.0;
  std::string action;
};

/// Graduated actions keyed by confidence. Lowers start at 0 and strictly
/// increase; a confidence maps to the band with the greatest lower <= c.
class DecisionBands {
 public:
  /// Throws ConfigError on invalid bands.
  explicit DecisionBands(std::vector<DecisionBand> bands);

  static DecisionBands defaults();

  const std::string& apply(double confidence) const noexcept;
  std::span<const DecisionBand> bands() const noexcept { return bands_; }

 private:
  std::vector<DecisionBand> bands_;
};

inline const std::string& apply_bands(const DecisionBands& bands, double confidence) noexcept {
  return bands.apply(confidence);
}

}  // namespace codecal
