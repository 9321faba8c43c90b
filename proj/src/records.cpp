#include "codecal/records.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include "json.hpp"

#include "codecal/error.hpp"

namespace codecal {

using nlohmann::json;

namespace {

constexpr std::string_view kTopLevelFields[] = {
    "record_id",      "task",        "generated_text",       "token_logprobs",
    "reference_text", "test_report", "verbalized_responses", "tf_response",
    "generated_length_chars"};

bool is_known(std::string_view key) {
  for (auto f : kTopLevelFields)
    if (f == key) return true;
  return false;
}

bool present(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it != obj.end() && !it->is_null();
}

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) throw DataError(std::string("missing required field '") + key + "'");
  return *it;
}

std::string get_string(const json& value, const char* field) {
  if (!value.is_string()) throw DataError(std::string("field '") + field + "' must be a string");
  return value.get<std::string>();
}

double get_number(const json& value, const char* field) {
  if (!value.is_number()) throw DataError(std::string("field '") + field + "' must be a number");
  return value.get<double>();
}

std::int64_t get_count(const json& value, const char* field) {
  if (!value.is_number_integer() || value.get<std::int64_t>() < 0)
    throw DataError(std::string("field '") + field + "' must be a nonnegative integer");
  return value.get<std::int64_t>();
}

TestReport parse_test_report(const json& obj, std::size_t& unknown) {
  if (!obj.is_object()) throw DataError("field 'test_report' must be an object");
  TestReport report;
  report.passed = get_count(require(obj, "passed"), "test_report.passed");
  report.failed = get_count(require(obj, "failed"), "test_report.failed");
  const json& syntax = require(obj, "syntax_ok");
  if (!syntax.is_boolean()) throw DataError("field 'test_report.syntax_ok' must be a boolean");
  report.syntax_ok = syntax.get<bool>();
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (it.key() != "passed" && it.key() != "failed" && it.key() != "syntax_ok") ++unknown;
  return report;
}

TfResponse parse_tf_response(const json& obj, std::size_t& unknown) {
  if (!obj.is_object()) throw DataError("field 'tf_response' must be an object");
  const json& positions = require(obj, "positions");
  if (!positions.is_array()) throw DataError("field 'tf_response.positions' must be an array");
  TfResponse response;
  for (const json& position : positions) {
    if (!position.is_array()) throw DataError("each tf_response position must be an array");
    auto& candidates = response.positions.emplace_back();
    for (const json& c : position) {
      if (!c.is_object()) throw DataError("each tf_response candidate must be an object");
      candidates.push_back({get_string(require(c, "token"), "tf_response.token"),
                            get_number(require(c, "logprob"), "tf_response.logprob")});
      for (auto it = c.begin(); it != c.end(); ++it)
        if (it.key() != "token" && it.key() != "logprob") ++unknown;
    }
  }
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (it.key() != "positions") ++unknown;
  return response;
}

json to_json(const GenerationRecord& r) {
  json obj = json::object();
  obj["record_id"] = r.record_id;
  obj["task"] = to_string(r.task);
  obj["generated_text"] = r.generated_text;
  if (r.token_logprobs) obj["token_logprobs"] = *r.token_logprobs;
  if (r.reference_text) obj["reference_text"] = *r.reference_text;
  if (r.test_report)
    obj["test_report"] = {{"passed", r.test_report->passed},
                          {"failed", r.test_report->failed},
                          {"syntax_ok", r.test_report->syntax_ok}};
  if (r.verbalized_responses) obj["verbalized_responses"] = *r.verbalized_responses;
  if (r.tf_response) {
    json positions = json::array();
    for (const auto& position : r.tf_response->positions) {
      json candidates = json::array();
      for (const auto& c : position) candidates.push_back({{"token", c.token}, {"logprob", c.logprob}});
      positions.push_back(std::move(candidates));
    }
    obj["tf_response"] = {{"positions", std::move(positions)}};
  }
  obj["generated_length_chars"] = r.generated_length_chars;
  return obj;
}

}  // namespace

std::string_view to_string(Task task) noexcept {
  switch (task) {
    case Task::function_synthesis: return "function_synthesis";
    case Task::line_completion: return "line_completion";
    case Task::program_repair: return "program_repair";
  }
  return "unknown";
}

std::optional<Task> parse_task(std::string_view text) noexcept {
  for (Task t : {Task::function_synthesis, Task::line_completion, Task::program_repair})
    if (to_string(t) == text) return t;
  return std::nullopt;
}

std::int64_t utf8_length(std::string_view text) noexcept {
  std::int64_t n = 0;
  for (unsigned char c : text)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

std::vector<std::string> validate_record(const GenerationRecord& r, const ValidationOptions& options) {
  std::vector<std::string> violations;
  auto add = [&](std::string msg) { violations.push_back(std::move(msg)); };

  if (r.record_id.empty()) add("record_id: must not be empty");

  if (r.token_logprobs) {
    for (std::size_t i = 0; i < r.token_logprobs->size(); ++i) {
      const double lp = (*r.token_logprobs)[i];
      if (std::isnan(lp) || lp > 0.0)
        add("token_logprobs: element " + std::to_string(i) + " is " + std::to_string(lp) +
            ", expected a log-probability <= 0");
    }
  }

  if (r.generated_length_chars < 0) {
    add("generated_length_chars: must be nonnegative");
  } else if (r.generated_length_chars != utf8_length(r.generated_text)) {
    add("generated_length_chars: " + std::to_string(r.generated_length_chars) +
        " does not match the character count " + std::to_string(utf8_length(r.generated_text)) +
        " of generated_text");
  }

  if (r.test_report) {
    const auto& t = *r.test_report;
    if (t.passed < 0 || t.failed < 0) add("test_report: passed and failed must be nonnegative");
    if (!t.syntax_ok && t.passed != 0)
      add("test_report: syntax_ok is false but passed = " + std::to_string(t.passed) +
          " (a syntax error fails every test)");
    if (options.require_test_outcome && t.syntax_ok && t.passed + t.failed < 1)
      add("test_report: no tests were run (passed + failed = 0)");
  }

  if (r.tf_response) {
    const auto& positions = r.tf_response->positions;
    if (positions.empty()) add("tf_response: has no positions");
    for (std::size_t p = 0; p < positions.size(); ++p) {
      const auto& cands = positions[p];
      const std::string where = "tf_response: position " + std::to_string(p);
      if (cands.empty()) add(where + " has no candidates");
      for (std::size_t i = 0; i < cands.size(); ++i) {
        if (std::isnan(cands[i].logprob) || cands[i].logprob > 0.0)
          add(where + " candidate " + std::to_string(i) + " has logprob > 0");
        if (i > 0 && cands[i].logprob > cands[i - 1].logprob)
          add(where + " candidates are not sorted by descending logprob");
      }
    }
  }
  return violations;
}

GenerationRecord parse_record(std::string_view line, std::size_t* unknown_fields) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw DataError("record must be a JSON object");

  std::size_t unknown = 0;
  GenerationRecord r;
  r.record_id = get_string(require(obj, "record_id"), "record_id");
  const std::string task = get_string(require(obj, "task"), "task");
  auto parsed_task = parse_task(task);
  if (!parsed_task) throw DataError("unknown task '" + task + "'");
  r.task = *parsed_task;
  r.generated_text = get_string(require(obj, "generated_text"), "generated_text");

  if (present(obj, "token_logprobs")) {
    const json& arr = obj["token_logprobs"];
    if (!arr.is_array()) throw DataError("field 'token_logprobs' must be an array");
    std::vector<double> lps;
    lps.reserve(arr.size());
    for (const json& v : arr) lps.push_back(get_number(v, "token_logprobs"));
    r.token_logprobs = std::move(lps);
  }
  if (present(obj, "reference_text")) r.reference_text = get_string(obj["reference_text"], "reference_text");
  if (present(obj, "test_report")) r.test_report = parse_test_report(obj["test_report"], unknown);
  if (present(obj, "verbalized_responses")) {
    const json& arr = obj["verbalized_responses"];
    if (!arr.is_array()) throw DataError("field 'verbalized_responses' must be an array");
    std::vector<std::string> responses;
    for (const json& v : arr) responses.push_back(get_string(v, "verbalized_responses"));
    r.verbalized_responses = std::move(responses);
  }
  if (present(obj, "tf_response")) r.tf_response = parse_tf_response(obj["tf_response"], unknown);

  // Producers may leave the length out; it is then derived from the text.
  if (present(obj, "generated_length_chars")) {
    r.generated_length_chars = get_count(obj["generated_length_chars"], "generated_length_chars");
  } else {
    r.generated_length_chars = utf8_length(r.generated_text);
  }

  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!is_known(it.key())) ++unknown;
  if (unknown_fields) *unknown_fields += unknown;
  return r;
}

std::string serialize_record(const GenerationRecord& record) { return to_json(record).dump(); }

RecordSet load_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");

  RecordSet set;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    GenerationRecord r;
    try {
      r = parse_record(line, &set.unknown_fields);
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    auto [it, inserted] = first_line.emplace(r.record_id, line_no);
    if (!inserted)
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": duplicate record_id '" +
                      r.record_id + "' (first seen at line " + std::to_string(it->second) + ")");
    set.records.push_back(std::move(r));
  }
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return set;
}

void save_records(const std::filesystem::path& path, const std::vector<GenerationRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const auto& r : records) out << serialize_record(r) << '\n';
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace codecal
