#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "codecal/records.hpp"

namespace codecal {

enum class Measure { avg_prob, total_prob, verbalize, ask_tf, ask_tf_norm, length_baseline };

inline constexpr Measure kAllMeasures[] = {Measure::avg_prob,  Measure::total_prob,
                                           Measure::verbalize, Measure::ask_tf,
                                           Measure::ask_tf_norm, Measure::length_baseline};

std::string_view to_string(Measure measure) noexcept;
std::optional<Measure> parse_measure(std::string_view text) noexcept;

/// How a confidence value was obtained.
enum class Provenance {
  computed,          // direct evaluation of the measure
  percent,           // verbalized: "<number>%"
  bare_percent,      // verbalized: bare number in (1, 100] read as a percentage
  bare_probability,  // verbalized: bare number in [0, 1] read as a probability
  fallback,          // a defaulting rule produced the value
};

std::string_view to_string(Provenance provenance) noexcept;

struct ConfidenceScore {
  Measure measure = Measure::avg_prob;
  double value = 0.0;
  bool fallback_used = false;
  Provenance provenance = Provenance::computed;
};

struct CorpusLengthStats {
  std::int64_t min_chars = 0;
  std::int64_t max_chars = 0;
};

/// Min/max of generated_length_chars over a corpus. Throws DataError when empty.
CorpusLengthStats corpus_length_stats(std::span<const GenerationRecord> records);

/// Arithmetic mean of exp(logprob). Throws DataError on an empty list.
double avg_token_probability(std::span<const double> logprobs);

/// exp(sum of logprobs); the product is never formed in linear space.
double total_sequence_probability(std::span<const double> logprobs);

struct VerbalizedConfidence {
  double value = 0.5;
  bool fallback_used = true;
  Provenance provenance = Provenance::fallback;
};

/// Confidence extracted from one reflective answer, if any.
std::optional<VerbalizedConfidence> parse_verbalized_response(std::string_view response);

/// First parseable response wins; (0.5, fallback) when every retry failed.
VerbalizedConfidence parse_verbalized(std::span<const std::string> responses);

struct TfConfidence {
  double value = 0.5;
  bool fallback_used = true;
};

/// Probability of the "true" answer read from top-k candidate logprobs.
/// With normalized = true, returns p(true) / (p(true) + p(false)).
/// Throws DataError if the response carries no candidates.
TfConfidence ask_tf_probability(const TfResponse& response, bool normalized);

/// 1 for the shortest generation in the corpus, 0 for the longest, linear between.
double length_baseline(std::int64_t length_chars, const CorpusLengthStats& stats) noexcept;

/// Dispatches to the measure. Throws DataError naming the measure and the
/// missing field when the record lacks what the measure needs.
ConfidenceScore score_record(const GenerationRecord& record, Measure measure,
                             const std::optional<CorpusLengthStats>& stats = std::nullopt);

}  // namespace codecal
