#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "codecal/records.hpp"

namespace codecal {

enum class Notion { exact_match, all_pass };

std::string_view to_string(Notion notion) noexcept;
/// Accepts both "exact_match" and "exact-match" spellings.
std::optional<Notion> parse_notion(std::string_view text) noexcept;

struct CorrectnessLabel {
  Notion notion = Notion::exact_match;
  bool correct = false;
};

/// Equal after trimming leading/trailing whitespace of each whole string.
bool exact_match(std::string_view generated, std::string_view reference) noexcept;

/// All tests passed: the code parsed, nothing failed, and at least one test ran.
bool all_pass(const TestReport& report) noexcept;

/// Throws DataError when the record lacks the field the notion needs.
CorrectnessLabel label_record(const GenerationRecord& record, Notion notion);

/// Exact-match versus all-pass contingency table.
class CrossTab {
 public:
  void add(bool exact, bool passed) noexcept;

  std::int64_t count(bool exact, bool passed) const noexcept {
    return counts_[exact ? 1 : 0][passed ? 1 : 0];
  }
  std::int64_t total() const noexcept { return total_; }

  /// Cell share in percent (unrounded). Zero for an empty table.
  double percent(bool exact, bool passed) const noexcept;
  double exact_rate_percent(bool exact) const noexcept;
  double pass_rate_percent(bool passed) const noexcept;

  /// Exact matches whose tests still failed; candidates for flaky tests.
  std::int64_t possible_flakes() const noexcept { return count(true, false); }

  std::string to_markdown() const;
  std::string to_csv() const;

 private:
  std::array<std::array<std::int64_t, 2>, 2> counts_{};
  std::int64_t total_ = 0;
};

/// Throws DataError naming the first record without both a reference and a test report.
CrossTab cross_tab(std::span<const GenerationRecord> records);

}  // namespace codecal
