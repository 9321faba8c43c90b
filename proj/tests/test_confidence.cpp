#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "doctest.h"

#include "codecal/confidence.hpp"
#include "codecal/error.hpp"

using namespace codecal;
using doctest::Approx;

TEST_CASE("avg_token_probability") {
  const std::vector<double> halves{std::log(0.5), std::log(0.5)};
  CHECK(avg_token_probability(halves) == Approx(0.5).epsilon(1e-15));
  for (double p : {0.01, 0.3, 0.999}) {
    const std::vector<double> one{std::log(p)};
    CHECK(avg_token_probability(one) == Approx(p).epsilon(1e-14));
  }
  // exp of each, averaged; frozen from a 50-digit evaluation.
  const std::vector<double> three{-0.105361, -0.510826, -1.203973};
  CHECK(std::abs(avg_token_probability(three) - 0.6) < 1e-5);
  CHECK(avg_token_probability(three) == Approx(0.59999975988319089).epsilon(1e-14));
  CHECK_THROWS_AS(avg_token_probability(std::vector<double>{}), DataError);
}

TEST_CASE("total_sequence_probability") {
  const std::vector<double> three{std::log(0.9), std::log(0.6), std::log(0.3)};
  CHECK(std::abs(total_sequence_probability(three) - 0.162) < 1e-9);
  CHECK(total_sequence_probability(std::vector<double>{0.0, 0.0}) == 1.0);
  CHECK_THROWS_AS(total_sequence_probability(std::vector<double>{}), DataError);

  const std::vector<double> long_seq(500, std::log(0.9));
  const double p = total_sequence_probability(long_seq);
  using Dec = boost::multiprecision::cpp_dec_float_50;
  const double exact = static_cast<double>(boost::multiprecision::pow(Dec("0.9"), 500));
  CHECK(p > 0.0);
  CHECK(std::abs(p - exact) / exact < 1e-12);
}

TEST_CASE("intrinsic measures: ordering properties") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> lp(-5.0, 0.0);
  std::uniform_int_distribution<int> len(1, 40);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> lps(static_cast<std::size_t>(len(gen)));
    for (auto& v : lps) v = lp(gen);
    const double avg = avg_token_probability(lps);
    const double tot = total_sequence_probability(lps);
    double min_p = 1.0;
    for (double v : lps) min_p = std::min(min_p, std::exp(v));
    CHECK(tot <= min_p * (1 + 1e-12));
    CHECK(tot <= avg * (1 + 1e-12));
    CHECK(avg >= 0.0);
    CHECK(avg <= 1.0);
    if (lps.size() == 1) CHECK(avg == tot);
  }
}

TEST_CASE("parse_verbalized: percentages and sentences") {
  for (const char* text : {"80%", "80.00%", "The probability is about 80.", "I'd say 80 %", "confidence: 80 percent"}) {
    const std::vector<std::string> r{text};
    const auto v = parse_verbalized(r);
    CHECK_MESSAGE(v.value == Approx(0.8).epsilon(1e-12), text);
    CHECK_FALSE(v.fallback_used);
  }
  {
    const std::vector<std::string> r{"80%"};
    CHECK(parse_verbalized(r).provenance == Provenance::percent);
  }
  {
    const std::vector<std::string> r{"The probability is about 80."};
    CHECK(parse_verbalized(r).provenance == Provenance::bare_percent);
  }
}

TEST_CASE("parse_verbalized: bare probabilities are flagged") {
  const std::vector<std::string> r{"0.8"};
  const auto v = parse_verbalized(r);
  CHECK(v.value == Approx(0.8));
  CHECK(v.provenance == Provenance::bare_probability);
  const std::vector<std::string> r2{"My confidence is 0.35 overall"};
  CHECK(parse_verbalized(r2).value == Approx(0.35));
}

TEST_CASE("parse_verbalized: retries and fallback") {
  const std::vector<std::string> none{"no idea", "cannot say", "n/a"};
  const auto v = parse_verbalized(none);
  CHECK(v.value == 0.5);
  CHECK(v.fallback_used);
  CHECK(v.provenance == Provenance::fallback);

  CHECK(parse_verbalized(std::vector<std::string>{}).fallback_used);

  const std::vector<std::string> second{"I am not sure what you mean.", "Probability: 65%"};
  const auto w = parse_verbalized(second);
  CHECK(w.value == Approx(0.65));
  CHECK_FALSE(w.fallback_used);

  // Out-of-range numbers do not parse; the next retry is used.
  const std::vector<std::string> big{"Confidence 150%", "90%"};
  CHECK(parse_verbalized(big).value == Approx(0.9));
  const std::vector<std::string> only_big{"probability 250"};
  CHECK(parse_verbalized(only_big).fallback_used);
}

TEST_CASE("parse_verbalized: percent wins over bare numbers in one response") {
  const std::vector<std::string> r{"Out of 3 tests, I am 70% confident"};
  CHECK(parse_verbalized(r).value == Approx(0.7));
}

TEST_CASE("parse_verbalized: deterministic and trailing-whitespace insensitive") {
  for (const char* text : {"80%", "The probability is about 80.", "0.25", "nothing"}) {
    const std::vector<std::string> a{text};
    const std::vector<std::string> b{std::string(text) + "  \n\t"};
    const auto va = parse_verbalized(a);
    const auto vb = parse_verbalized(b);
    CHECK(va.value == vb.value);
    CHECK(va.fallback_used == vb.fallback_used);
    CHECK(parse_verbalized(a).value == va.value);
  }
}

TEST_CASE("ask_tf_probability") {
  TfResponse both{{{{" True", std::log(0.6)}, {" False", std::log(0.2)}}}};
  CHECK(ask_tf_probability(both, true).value == Approx(0.75).epsilon(1e-12));
  CHECK(ask_tf_probability(both, false).value == Approx(0.6).epsilon(1e-12));

  TfResponse only_true{{{{"True", std::log(0.9)}}}};
  const auto raw = ask_tf_probability(only_true, false);
  CHECK(raw.value == Approx(0.9).epsilon(1e-12));
  CHECK_FALSE(raw.fallback_used);
  // Normalized without a "false" candidate falls back to the raw value.
  const auto norm = ask_tf_probability(only_true, true);
  CHECK(norm.value == Approx(0.9).epsilon(1e-12));
  CHECK(norm.fallback_used);

  // Max per label across the first two positions.
  TfResponse split{{{{" True", std::log(0.5)}, {" true", std::log(0.3)}}, {{" False", std::log(0.4)}}}};
  const auto r = ask_tf_probability(split, false);
  CHECK(r.value == Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(r.fallback_used);
  const auto n = ask_tf_probability(split, true);
  CHECK(n.value == Approx(0.55555555555555556).epsilon(1e-12));
  CHECK_FALSE(n.fallback_used);

  TfResponse no_label{{{{" Yes", std::log(0.7)}, {" No", std::log(0.2)}}}};
  const auto fb = ask_tf_probability(no_label, false);
  CHECK(fb.value == 0.5);
  CHECK(fb.fallback_used);

  CHECK_THROWS_AS(ask_tf_probability(TfResponse{}, false), DataError);
  CHECK_THROWS_AS(ask_tf_probability(TfResponse{{{}, {}}}, true), DataError);
}

TEST_CASE("ask_tf normalized is monotone in p(True) and equals raw/(raw+false)") {
  const double p_false = 0.15;
  double previous = -1.0;
  for (double p_true = 0.05; p_true <= 0.8; p_true += 0.05) {
    TfResponse resp{{{{" TRUE ", std::log(p_true)}, {"false", std::log(p_false)}}}};
    const double v = ask_tf_probability(resp, true).value;
    CHECK(v == Approx(p_true / (p_true + p_false)).epsilon(1e-12));
    CHECK(v > previous);
    previous = v;
  }
}

TEST_CASE("length_baseline") {
  const CorpusLengthStats stats{10, 30};
  CHECK(length_baseline(10, stats) == 1.0);
  CHECK(length_baseline(30, stats) == 0.0);
  CHECK(length_baseline(20, stats) == 0.5);
  CHECK(length_baseline(5, stats) == 1.0);
  CHECK(length_baseline(45, stats) == 0.0);
  CHECK(length_baseline(17, CorpusLengthStats{17, 17}) == 1.0);

  double previous = 2.0;
  for (std::int64_t len = 0; len <= 40; ++len) {
    const double v = length_baseline(len, stats);
    CHECK(v <= previous);
    previous = v;
  }
}

TEST_CASE("score_record dispatch") {
  GenerationRecord r;
  r.record_id = "r1";
  r.generated_text = "return a + b";
  r.generated_length_chars = 12;
  r.token_logprobs = std::vector<double>{std::log(0.5), std::log(0.5)};

  try {
    score_record(r, Measure::verbalize);
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("verbalized_responses missing") != std::string::npos);
  }
  CHECK_THROWS_AS(score_record(r, Measure::ask_tf), DataError);
  CHECK_THROWS_AS(score_record(r, Measure::length_baseline), DataError);

  const auto avg = score_record(r, Measure::avg_prob);
  CHECK(avg.value == Approx(0.5));
  CHECK(avg.measure == Measure::avg_prob);
  CHECK_FALSE(avg.fallback_used);

  r.verbalized_responses = std::vector<std::string>{"n/a", "Around 70%"};
  r.tf_response = TfResponse{{{{" True", std::log(0.6)}, {" False", std::log(0.3)}}}};
  const CorpusLengthStats stats{4, 20};

  // Each measure against the per-measure oracle value worked out by hand.
  const std::pair<Measure, double> expected[] = {
      {Measure::avg_prob, 0.5},  {Measure::total_prob, 0.25},  {Measure::verbalize, 0.7},
      {Measure::ask_tf, 0.6},    {Measure::ask_tf_norm, 2.0 / 3.0}, {Measure::length_baseline, 0.5},
  };
  for (const auto& [measure, value] : expected) {
    const auto s = score_record(r, measure, stats);
    CHECK_MESSAGE(s.value == Approx(value).epsilon(1e-12), to_string(measure));
    CHECK(s.value >= 0.0);
    CHECK(s.value <= 1.0);
    CHECK_FALSE(s.fallback_used);
  }

  r.verbalized_responses = std::vector<std::string>{"no", "no", "no"};
  const auto fb = score_record(r, Measure::verbalize);
  CHECK(fb.fallback_used);
  CHECK(fb.provenance == Provenance::fallback);
}

TEST_CASE("measure names round-trip") {
  for (Measure m : kAllMeasures) CHECK(parse_measure(to_string(m)) == m);
  CHECK_FALSE(parse_measure("bogus").has_value());
}
