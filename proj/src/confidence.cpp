#include "codecal/confidence.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "codecal/error.hpp"

namespace codecal {

namespace {

double clamp01(double v) noexcept { return std::clamp(v, 0.0, 1.0); }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) noexcept {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

struct NumberToken {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the last character
  double value = 0.0;
  bool negative = false;
};

bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

// Unsigned decimal literals such as "80", "80.00", ".8". A trailing period
// without digits ("80.") ends the sentence, not the number.
std::vector<NumberToken> scan_numbers(std::string_view s) {
  std::vector<NumberToken> numbers;
  std::size_t i = 0;
  while (i < s.size()) {
    const bool starts_digit = is_digit(s[i]);
    const bool starts_dot = s[i] == '.' && i + 1 < s.size() && is_digit(s[i + 1]);
    if (!starts_digit && !starts_dot) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    while (i < s.size() && is_digit(s[i])) ++i;
    if (i + 1 < s.size() && s[i] == '.' && is_digit(s[i + 1])) {
      ++i;
      while (i < s.size() && is_digit(s[i])) ++i;
    }
    // Identifiers like "gpt4" or version strings are not confidences.
    const bool glued = (begin > 0 && std::isalpha(static_cast<unsigned char>(s[begin - 1]))) ||
                       (i < s.size() && (std::isalpha(static_cast<unsigned char>(s[i])) || s[i] == '_'));
    if (glued && !(i < s.size() && s[i] == '%')) continue;
    NumberToken tok;
    tok.begin = begin;
    tok.end = i;
    tok.value = std::stod(std::string(s.substr(begin, i - begin)));
    tok.negative = begin > 0 && s[begin - 1] == '-';
    numbers.push_back(tok);
  }
  return numbers;
}

bool followed_by_percent(std::string_view lowered, const NumberToken& tok) {
  std::size_t j = tok.end;
  while (j < lowered.size() && (lowered[j] == ' ' || lowered[j] == '\t')) ++j;
  if (j < lowered.size() && lowered[j] == '%') return true;
  return lowered.substr(j, 7) == "percent";
}

constexpr std::string_view kConfidenceWords[] = {"probab", "confiden", "likel", "chance", "certain"};

}  // namespace

std::string_view to_string(Measure measure) noexcept {
  switch (measure) {
    case Measure::avg_prob: return "avg_prob";
    case Measure::total_prob: return "total_prob";
    case Measure::verbalize: return "verbalize";
    case Measure::ask_tf: return "ask_tf";
    case Measure::ask_tf_norm: return "ask_tf_norm";
    case Measure::length_baseline: return "length_baseline";
  }
  return "unknown";
}

std::optional<Measure> parse_measure(std::string_view text) noexcept {
  for (Measure m : kAllMeasures)
    if (to_string(m) == text) return m;
  return std::nullopt;
}

std::string_view to_string(Provenance provenance) noexcept {
  switch (provenance) {
    case Provenance::computed: return "computed";
    case Provenance::percent: return "percent";
    case Provenance::bare_percent: return "bare_percent";
    case Provenance::bare_probability: return "bare_probability";
    case Provenance::fallback: return "fallback";
  }
  return "unknown";
}

CorpusLengthStats corpus_length_stats(std::span<const GenerationRecord> records) {
  if (records.empty()) throw DataError("length statistics need a nonempty corpus");
  CorpusLengthStats stats{records.front().generated_length_chars, records.front().generated_length_chars};
  for (const auto& r : records) {
    stats.min_chars = std::min(stats.min_chars, r.generated_length_chars);
    stats.max_chars = std::max(stats.max_chars, r.generated_length_chars);
  }
  return stats;
}

double avg_token_probability(std::span<const double> logprobs) {
  if (logprobs.empty()) throw DataError("average token probability of an empty sequence is undefined");
  double sum = 0.0;
  for (double lp : logprobs) sum += std::exp(lp);
  return clamp01(sum / static_cast<double>(logprobs.size()));
}

double total_sequence_probability(std::span<const double> logprobs) {
  if (logprobs.empty()) throw DataError("total sequence probability of an empty sequence is undefined");
  long double log_total = 0.0L;
  for (double lp : logprobs) log_total += lp;
  return clamp01(std::exp(static_cast<double>(log_total)));
}

std::optional<VerbalizedConfidence> parse_verbalized_response(std::string_view response) {
  const std::string lowered = lower(trim(response));
  const auto numbers = scan_numbers(lowered);
  if (numbers.empty()) return std::nullopt;

  for (const auto& tok : numbers) {
    if (tok.negative || tok.value > 100.0 || !followed_by_percent(lowered, tok)) continue;
    return VerbalizedConfidence{tok.value / 100.0, false, Provenance::percent};
  }

  const NumberToken* chosen = nullptr;
  std::string_view stripped = lowered;
  while (!stripped.empty() && stripped.back() == '.') stripped.remove_suffix(1);
  if (numbers.size() == 1 && numbers[0].begin == 0 && numbers[0].end == stripped.size()) {
    chosen = &numbers[0];
  } else {
    std::size_t keyword_at = std::string::npos;
    for (auto word : kConfidenceWords) keyword_at = std::min(keyword_at, lowered.find(word));
    if (keyword_at == std::string::npos) return std::nullopt;
    for (const auto& tok : numbers) {
      if (tok.begin > keyword_at) {
        chosen = &tok;
        break;
      }
    }
    if (!chosen) chosen = &numbers.front();
  }

  if (chosen->negative || chosen->value > 100.0) return std::nullopt;
  if (chosen->value > 1.0) return VerbalizedConfidence{chosen->value / 100.0, false, Provenance::bare_percent};
  return VerbalizedConfidence{chosen->value, false, Provenance::bare_probability};
}

VerbalizedConfidence parse_verbalized(std::span<const std::string> responses) {
  for (const auto& response : responses)
    if (auto parsed = parse_verbalized_response(response)) return *parsed;
  return VerbalizedConfidence{0.5, true, Provenance::fallback};
}

TfConfidence ask_tf_probability(const TfResponse& response, bool normalized) {
  bool any = false;
  std::optional<double> p_true;
  std::optional<double> p_false;
  for (const auto& position : response.positions) {
    for (const auto& candidate : position) {
      any = true;
      const std::string token = lower(trim(candidate.token));
      const double p = clamp01(std::exp(candidate.logprob));
      if (token.find("true") != std::string::npos) p_true = std::max(p_true.value_or(0.0), p);
      if (token.find("false") != std::string::npos) p_false = std::max(p_false.value_or(0.0), p);
    }
  }
  if (!any) throw DataError("tf_response carries no candidate tokens");
  if (!p_true) return {0.5, true};
  if (!normalized) return {*p_true, false};
  if (!p_false) return {*p_true, true};
  const double mass = *p_true + *p_false;
  if (mass <= 0.0) return {0.5, true};
  return {clamp01(*p_true / mass), false};
}

double length_baseline(std::int64_t length_chars, const CorpusLengthStats& stats) noexcept {
  if (stats.max_chars <= stats.min_chars) return 1.0;
  const double span = static_cast<double>(stats.max_chars - stats.min_chars);
  return clamp01(1.0 - static_cast<double>(length_chars - stats.min_chars) / span);
}

ConfidenceScore score_record(const GenerationRecord& r, Measure measure,
                             const std::optional<CorpusLengthStats>& stats) {
  auto missing = [&](std::string_view field) {
    return DataError("record '" + r.record_id + "': measure " + std::string(to_string(measure)) + ": " +
                     std::string(field) + " missing");
  };
  ConfidenceScore score;
  score.measure = measure;
  switch (measure) {
    case Measure::avg_prob:
    case Measure::total_prob: {
      if (!r.token_logprobs || r.token_logprobs->empty()) throw missing("token_logprobs");
      score.value = measure == Measure::avg_prob ? avg_token_probability(*r.token_logprobs)
                                                 : total_sequence_probability(*r.token_logprobs);
      break;
    }
    case Measure::verbalize: {
      if (!r.verbalized_responses) throw missing("verbalized_responses");
      const auto v = parse_verbalized(*r.verbalized_responses);
      score.value = v.value;
      score.fallback_used = v.fallback_used;
      score.provenance = v.provenance;
      break;
    }
    case Measure::ask_tf:
    case Measure::ask_tf_norm: {
      if (!r.tf_response) throw missing("tf_response");
      const auto v = ask_tf_probability(*r.tf_response, measure == Measure::ask_tf_norm);
      score.value = v.value;
      score.fallback_used = v.fallback_used;
      if (v.fallback_used) score.provenance = Provenance::fallback;
      break;
    }
    case Measure::length_baseline: {
      if (!stats) throw missing("corpus length statistics");
      score.value = length_baseline(r.generated_length_chars, *stats);
      break;
    }
  }
  return score;
}

}  // namespace codecal
