#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace codecal {

enum class Task { function_synthesis, line_completion, program_repair };

std::string_view to_string(Task task) noexcept;
std::optional<Task> parse_task(std::string_view text) noexcept;

/// Outcome of running the project's tests against one generation.
struct TestReport {
  std::int64_t passed = 0;
  std::int64_t failed = 0;
  bool syntax_ok = true;

  friend bool operator==(const TestReport&, const TestReport&) = default;
};

struct TfCandidate {
  std::string token;
  double logprob = 0.0;

  friend bool operator==(const TfCandidate&, const TfCandidate&) = default;
};

/// Top-k candidate tokens for the first response positions of a True/False
/// self-evaluation prompt. Each position is sorted by descending logprob.
struct TfResponse {
  std::vector<std::vector<TfCandidate>> positions;

  friend bool operator==(const TfResponse&, const TfResponse&) = default;
};

struct GenerationRecord {
  std::string record_id;
  Task task = Task::function_synthesis;
  std::string generated_text;
  std::optional<std::vector<double>> token_logprobs;
  std::optional<std::string> reference_text;
  std::optional<TestReport> test_report;
  std::optional<std::vector<std::string>> verbalized_responses;
  std::optional<TfResponse> tf_response;
  std::int64_t generated_length_chars = 0;

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

/// Number of Unicode code points in a UTF-8 string. Continuation bytes are
/// not counted, so malformed sequences still yield a deterministic count.
std::int64_t utf8_length(std::string_view text) noexcept;

struct ValidationOptions {
  /// Additionally require passed + failed >= 1 for syntactically valid
  /// reports (needed when labelling with the all-pass notion).
  bool require_test_outcome = false;
};

/// Returns one human-readable violation per broken invariant. Each message
/// starts with the offending field name. Empty iff the record is valid.
std::vector<std::string> validate_record(const GenerationRecord& record,
                                         const ValidationOptions& options = {});

struct RecordSet {
  std::vector<GenerationRecord> records;
  /// Number of object keys that are not part of the schema.
  std::size_t unknown_fields = 0;
};

/// Parses one JSONL line. Throws DataError on malformed input.
GenerationRecord parse_record(std::string_view line, std::size_t* unknown_fields = nullptr);
std::string serialize_record(const GenerationRecord& record);

/// Loads a JSONL corpus. Blank lines are skipped. Throws IoError if the
/// file cannot be opened and DataError (naming the line) on malformed
/// records or duplicate record ids.
RecordSet load_records(const std::filesystem::path& path);

/// Writes one record per line. Throws IoError on failure.
void save_records(const std::filesystem::path& path, const std::vector<GenerationRecord>& records);

}  // namespace codecal
