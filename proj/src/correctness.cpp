#include "codecal/correctness.hpp"

#include <cstdio>

#include "codecal/error.hpp"

namespace codecal {

namespace {

std::string_view trim(std::string_view s) noexcept {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", v);
  return buf;
}

}  // namespace

std::string_view to_string(Notion notion) noexcept {
  return notion == Notion::exact_match ? "exact_match" : "all_pass";
}

std::optional<Notion> parse_notion(std::string_view text) noexcept {
  if (text == "exact_match" || text == "exact-match") return Notion::exact_match;
  if (text == "all_pass" || text == "all-pass") return Notion::all_pass;
  return std::nullopt;
}

bool exact_match(std::string_view generated, std::string_view reference) noexcept {
  return trim(generated) == trim(reference);
}

bool all_pass(const TestReport& report) noexcept {
  return report.syntax_ok && report.failed == 0 && report.passed >= 1;
}

CorrectnessLabel label_record(const GenerationRecord& record, Notion notion) {
  if (notion == Notion::exact_match) {
    if (!record.reference_text)
      throw DataError("record '" + record.record_id + "': exact_match needs reference_text, which is missing");
    return {notion, exact_match(record.generated_text, *record.reference_text)};
  }
  if (!record.test_report)
    throw DataError("record '" + record.record_id + "': all_pass needs test_report, which is missing");
  return {notion, all_pass(*record.test_report)};
}

void CrossTab::add(bool exact, bool passed) noexcept {
  ++counts_[exact ? 1 : 0][passed ? 1 : 0];
  ++total_;
}

double CrossTab::percent(bool exact, bool passed) const noexcept {
  if (total_ == 0) return 0.0;
  return 100.0 * static_cast<double>(count(exact, passed)) / static_cast<double>(total_);
}

double CrossTab::exact_rate_percent(bool exact) const noexcept {
  if (total_ == 0) return 0.0;
  return 100.0 * static_cast<double>(count(exact, false) + count(exact, true)) / static_cast<double>(total_);
}

double CrossTab::pass_rate_percent(bool passed) const noexcept {
  if (total_ == 0) return 0.0;
  return 100.0 * static_cast<double>(count(false, passed) + count(true, passed)) / static_cast<double>(total_);
}

std::string CrossTab::to_markdown() const {
  std::string s;
  s += "| Exact-Match \\ All Pass@1 | False | True | Total |\n";
  s += "|---|---:|---:|---:|\n";
  for (bool exact : {false, true}) {
    s += std::string("| ") + (exact ? "True" : "False") + " | " + pct(percent(exact, false)) + " | " +
         pct(percent(exact, true)) + " | " + pct(exact_rate_percent(exact)) + " |\n";
  }
  s += "| Total | " + pct(pass_rate_percent(false)) + " | " + pct(pass_rate_percent(true)) + " | " +
       pct(total_ == 0 ? 0.0 : 100.0) + " |\n";
  s += "\nn = " + std::to_string(total_) + "; possible flakes (exact match, tests failing): " +
       std::to_string(possible_flakes()) + "\n";
  return s;
}

std::string CrossTab::to_csv() const {
  std::string s = "exact_match,all_pass_false,all_pass_true,total\r\n";
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  for (bool exact : {false, true}) {
    s += std::string(exact ? "True" : "False") + "," + num(percent(exact, false)) + "," +
         num(percent(exact, true)) + "," + num(exact_rate_percent(exact)) + "\r\n";
  }
  s += "Total," + num(pass_rate_percent(false)) + "," + num(pass_rate_percent(true)) + "," +
       num(total_ == 0 ? 0.0 : 100.0) + "\r\n";
  return s;
}

CrossTab cross_tab(std::span<const GenerationRecord> records) {
  CrossTab tab;
  for (const auto& r : records) {
    if (!r.reference_text || !r.test_report)
      throw DataError("record '" + r.record_id + "' lacks " +
                      (!r.reference_text ? "reference_text" : "test_report") + " needed for the cross-tab");
    tab.add(exact_match(r.generated_text, *r.reference_text), all_pass(*r.test_report));
  }
  return tab;
}

}  // namespace codecal
