#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"

#include "codecal/error.hpp"
#include "codecal/records.hpp"

using namespace codecal;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  const fs::path path = fs::temp_directory_path() / ("codecal_test_" + name);
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

GenerationRecord minimal(std::string id) {
  GenerationRecord r;
  r.record_id = std::move(id);
  r.generated_text = "x = 1";
  r.generated_length_chars = 5;
  return r;
}

}  // namespace

TEST_CASE("load_records: empty file gives an empty corpus") {
  const auto set = load_records(temp_file("empty.jsonl", ""));
  CHECK(set.records.empty());
  CHECK(set.unknown_fields == 0);
}

TEST_CASE("load_records: three lines load in file order") {
  const std::string text =
      R"({"record_id":"a","task":"line_completion","generated_text":"x = 1","token_logprobs":[-0.1,-0.2]})"
      "\n"
      R"({"record_id":"b","task":"function_synthesis","generated_text":"def f(): pass","test_report":{"passed":2,"failed":0,"syntax_ok":true}})"
      "\n"
      R"({"record_id":"c","task":"program_repair","generated_text":"","reference_text":"y","generated_length_chars":0})"
      "\n";
  const auto set = load_records(temp_file("three.jsonl", text));
  REQUIRE(set.records.size() == 3);
  CHECK(set.records[0].record_id == "a");
  CHECK(set.records[1].record_id == "b");
  CHECK(set.records[2].record_id == "c");
  CHECK(set.records[0].task == Task::line_completion);
  CHECK(set.records[0].generated_length_chars == 5);  // derived when absent
  CHECK(set.records[1].test_report->passed == 2);
  CHECK(set.records[2].reference_text == "y");
}

TEST_CASE("load_records: a line without record_id is rejected at that line") {
  const std::string text = R"({"record_id":"a","task":"line_completion","generated_text":"x"})"
                           "\n"
                           R"({"task":"line_completion","generated_text":"y"})"
                           "\n";
  try {
    load_records(temp_file("noid.jsonl", text));
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(":2:") != std::string::npos);
    CHECK(msg.find("record_id") != std::string::npos);
  }
}

TEST_CASE("load_records: malformed JSON and duplicate ids name their lines") {
  CHECK_THROWS_AS(load_records(temp_file("bad.jsonl", "{not json}\n")), DataError);

  const std::string dup = R"({"record_id":"a","task":"line_completion","generated_text":"x"})"
                          "\n\n"
                          R"({"record_id":"a","task":"line_completion","generated_text":"y"})"
                          "\n";
  try {
    load_records(temp_file("dup.jsonl", dup));
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(":3:") != std::string::npos);
    CHECK(msg.find("line 1") != std::string::npos);
  }
}

TEST_CASE("load_records: unknown fields are counted, not fatal") {
  const std::string text =
      R"({"record_id":"a","task":"line_completion","generated_text":"x","model":"m","test_report":{"passed":1,"failed":0,"syntax_ok":true,"duration":3}})"
      "\n";
  const auto set = load_records(temp_file("unknown.jsonl", text));
  CHECK(set.records.size() == 1);
  CHECK(set.unknown_fields == 2);
}

TEST_CASE("load_records: missing file is an I/O error") {
  CHECK_THROWS_AS(load_records("/nonexistent/codecal/corpus.jsonl"), IoError);
}

TEST_CASE("validate_record: log-probabilities") {
  auto r = minimal("r");
  r.token_logprobs = std::vector<double>{0.0, -1.0};
  CHECK(validate_record(r).empty());

  r.token_logprobs = std::vector<double>{0.5};
  const auto v = validate_record(r);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rfind("token_logprobs", 0) == 0);
}

TEST_CASE("validate_record: syntax error with passing tests") {
  auto r = minimal("r");
  r.test_report = TestReport{3, 0, false};
  const auto v = validate_record(r);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rfind("test_report", 0) == 0);
}

TEST_CASE("validate_record: remaining invariants") {
  auto r = minimal("r");
  r.generated_length_chars = 7;
  CHECK(validate_record(r).size() == 1);

  r = minimal("r");
  r.generated_text = "λx";  // two code points, three bytes
  r.generated_length_chars = 2;
  CHECK(validate_record(r).empty());

  r = minimal("r");
  r.test_report = TestReport{0, 0, true};
  CHECK(validate_record(r).empty());
  CHECK(validate_record(r, {.require_test_outcome = true}).size() == 1);

  r = minimal("r");
  r.tf_response = TfResponse{{{{" False", std::log(0.2)}, {" True", std::log(0.6)}}}};
  const auto v = validate_record(r);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("sorted") != std::string::npos);

  r.tf_response = TfResponse{};
  CHECK(validate_record(r).size() == 1);
}

TEST_CASE("validate_record is pure") {
  auto r = minimal("r");
  r.token_logprobs = std::vector<double>{0.5, -0.1, 2.0};
  r.test_report = TestReport{1, 0, false};
  CHECK(validate_record(r) == validate_record(r));
}

TEST_CASE("save/load round trip preserves every field") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> lp(-30.0, 0.0);
  std::vector<GenerationRecord> corpus;
  for (int i = 0; i < 50; ++i) {
    GenerationRecord r;
    r.record_id = "rec-" + std::to_string(i);
    r.task = static_cast<Task>(i % 3);
    r.generated_text = i % 5 == 0 ? "" : "print(\"héllo\", " + std::to_string(i) + ")\n";
    r.generated_length_chars = utf8_length(r.generated_text);
    if (i % 2) {
      std::vector<double> lps(1 + i % 7);
      for (auto& v : lps) v = lp(gen);
      r.token_logprobs = lps;
    }
    if (i % 3) r.reference_text = "ref " + std::to_string(i);
    if (i % 4) r.test_report = TestReport{i % 6, i % 2, i % 7 != 0};
    if (i % 5) r.verbalized_responses = std::vector<std::string>{"maybe", "80%"};
    if (i % 6) r.tf_response = TfResponse{{{{" True", lp(gen)}}, {{"\n", 0.0}, {" x", -3.5}}}};
    corpus.push_back(std::move(r));
  }
  const fs::path path = fs::temp_directory_path() / "codecal_test_roundtrip.jsonl";
  save_records(path, corpus);
  const auto loaded = load_records(path);
  CHECK(loaded.records == corpus);
  CHECK(loaded.unknown_fields == 0);
}
