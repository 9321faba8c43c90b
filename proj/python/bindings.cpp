#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "codecal/confidence.hpp"
#include "codecal/correctness.hpp"
#include "codecal/error.hpp"
#include "codecal/metrics.hpp"
#include "codecal/records.hpp"
#include "codecal/report.hpp"
#include "codecal/rescale.hpp"

namespace py = pybind11;
using namespace codecal;

namespace {

std::vector<ScoredSample> zip_samples(const std::vector<double>& confidences, const std::vector<bool>& correct) {
  if (confidences.size() != correct.size()) throw py::value_error("confidences and correct differ in length");
  std::vector<ScoredSample> samples(confidences.size());
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = {confidences[i], correct[i]};
  return samples;
}

BinScheme scheme_of(const std::string& text) {
  auto s = parse_bin_scheme(text);
  if (!s) throw py::value_error("unknown bin scheme '" + text + "'");
  return *s;
}

Measure measure_of(const std::string& text) {
  auto m = parse_measure(text);
  if (!m) throw py::value_error("unknown measure '" + text + "'");
  return *m;
}

Notion notion_of(const std::string& text) {
  auto n = parse_notion(text);
  if (!n) throw py::value_error("unknown notion '" + text + "'");
  return *n;
}

py::dict report_dict(const CalibrationReport& r) {
  py::dict d;
  d["n"] = r.n;
  d["base_rate"] = r.base_rate;
  d["brier"] = r.brier;
  d["brier_ref"] = r.brier_ref;
  d["skill"] = r.skill;
  d["ece"] = r.ece;
  d["auc"] = r.auc;
  d["ece_omitted_reason"] = r.ece_omitted_reason;
  d["ece_note"] = r.ece_note;
  return d;
}

}  // namespace

PYBIND11_MODULE(_codecal, m) {
  m.doc() = "Calibration metrics for code-generation outputs";

  auto& base_error = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", base_error.ptr());
  py::register_exception<IoError>(m, "IoError", base_error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base_error.ptr());

  py::class_<TestReport>(m, "TestReport")
      .def(py::init<>())
      .def(py::init([](std::int64_t passed, std::int64_t failed, bool syntax_ok) {
             return TestReport{passed, failed, syntax_ok};
           }),
           py::arg("passed"), py::arg("failed"), py::arg("syntax_ok") = true)
      .def_readwrite("passed", &TestReport::passed)
      .def_readwrite("failed", &TestReport::failed)
      .def_readwrite("syntax_ok", &TestReport::syntax_ok);

  py::class_<GenerationRecord>(m, "GenerationRecord")
      .def(py::init<>())
      .def_readwrite("record_id", &GenerationRecord::record_id)
      .def_property(
          "task", [](const GenerationRecord& r) { return std::string(to_string(r.task)); },
          [](GenerationRecord& r, const std::string& t) {
            auto task = parse_task(t);
            if (!task) throw py::value_error("unknown task '" + t + "'");
            r.task = *task;
          })
      .def_readwrite("generated_text", &GenerationRecord::generated_text)
      .def_readwrite("token_logprobs", &GenerationRecord::token_logprobs)
      .def_readwrite("reference_text", &GenerationRecord::reference_text)
      .def_readwrite("test_report", &GenerationRecord::test_report)
      .def_readwrite("verbalized_responses", &GenerationRecord::verbalized_responses)
      .def_readwrite("generated_length_chars", &GenerationRecord::generated_length_chars)
      .def("to_json", &serialize_record);

  m.def("parse_record", [](const std::string& line) { return parse_record(line); });
  m.def("load_records", [](const std::filesystem::path& path) { return load_records(path).records; });
  m.def("save_records", &save_records);
  m.def("validate_record", [](const GenerationRecord& r) { return validate_record(r); });

  m.def("avg_token_probability", [](const std::vector<double>& lps) { return avg_token_probability(lps); });
  m.def("total_sequence_probability",
        [](const std::vector<double>& lps) { return total_sequence_probability(lps); });
  m.def("parse_verbalized", [](const std::vector<std::string>& responses) {
    const auto v = parse_verbalized(responses);
    return py::make_tuple(v.value, v.fallback_used);
  });
  m.def(
      "ask_tf_probability",
      [](const std::vector<std::vector<std::pair<std::string, double>>>& positions, bool normalized) {
        TfResponse resp;
        for (const auto& pos : positions) {
          auto& cands = resp.positions.emplace_back();
          for (const auto& [token, lp] : pos) cands.push_back({token, lp});
        }
        const auto v = ask_tf_probability(resp, normalized);
        return py::make_tuple(v.value, v.fallback_used);
      },
      py::arg("positions"), py::arg("normalized") = false);
  m.def(
      "length_baseline",
      [](std::int64_t len, std::int64_t min_chars, std::int64_t max_chars) {
        return length_baseline(len, {min_chars, max_chars});
      },
      py::arg("length"), py::arg("min_chars"), py::arg("max_chars"));
  m.def(
      "score_record",
      [](const GenerationRecord& r, const std::string& measure, std::optional<std::pair<std::int64_t, std::int64_t>> stats) {
        std::optional<CorpusLengthStats> s;
        if (stats) s = CorpusLengthStats{stats->first, stats->second};
        const auto score = score_record(r, measure_of(measure), s);
        return py::make_tuple(score.value, score.fallback_used);
      },
      py::arg("record"), py::arg("measure"), py::arg("length_stats") = py::none());

  m.def("exact_match", [](const std::string& g, const std::string& r) { return exact_match(g, r); });
  m.def("all_pass", &all_pass);
  m.def("label_record", [](const GenerationRecord& r, const std::string& notion) {
    return label_record(r, notion_of(notion)).correct;
  });

  m.def(
      "bin_samples",
      [](const std::vector<double>& conf, const std::vector<bool>& correct, const std::string& scheme,
         std::size_t bins) {
        const auto rb = bin_samples(zip_samples(conf, correct), scheme_of(scheme), bins);
        py::list out;
        for (const auto& b : rb.bins) {
          py::dict d;
          d["lo"] = b.lo;
          d["hi"] = b.hi;
          d["count"] = b.count;
          d["conf"] = b.conf;
          d["corr"] = b.corr;
          out.append(d);
        }
        return out;
      },
      py::arg("confidences"), py::arg("correct"), py::arg("scheme") = "equal", py::arg("bins") = kDefaultBins);
  m.def(
      "ece",
      [](const std::vector<double>& conf, const std::vector<bool>& correct, const std::string& scheme,
         std::size_t bins) {
        const auto samples = zip_samples(conf, correct);
        return ece(bin_samples(samples, scheme_of(scheme), bins), samples.size());
      },
      py::arg("confidences"), py::arg("correct"), py::arg("scheme") = "equal", py::arg("bins") = kDefaultBins);
  m.def("brier", [](const std::vector<double>& conf, const std::vector<bool>& correct) {
    return brier(zip_samples(conf, correct));
  });
  m.def("brier_ref", &brier_ref);
  m.def("skill_score", &skill_score);
  m.def("auc_roc", [](const std::vector<double>& conf, const std::vector<bool>& correct) {
    return auc_roc(zip_samples(conf, correct));
  });
  m.def(
      "report",
      [](const std::vector<double>& conf, const std::vector<bool>& correct, const std::string& scheme,
         std::size_t bins, bool rescaled, double collapse_threshold) {
        return report_dict(report(zip_samples(conf, correct),
                                  ReportOptions{scheme_of(scheme), bins, rescaled, collapse_threshold}));
      },
      py::arg("confidences"), py::arg("correct"), py::arg("scheme") = "equal", py::arg("bins") = kDefaultBins,
      py::arg("rescaled") = false, py::arg("collapse_threshold") = 0.05);

  m.def(
      "fit_platt",
      [](const std::vector<double>& conf, const std::vector<bool>& correct, double epsilon) {
        const auto model = fit_platt(zip_samples(conf, correct), epsilon);
        return py::make_tuple(model.slope, model.intercept);
      },
      py::arg("confidences"), py::arg("correct"), py::arg("epsilon") = kDefaultEpsilon);
  m.def(
      "apply_platt",
      [](double slope, double intercept, double p, double epsilon) {
        return apply_platt(PlattModel{slope, intercept, PlattFeature::ln_prob, epsilon}, p);
      },
      py::arg("slope"), py::arg("intercept"), py::arg("p"), py::arg("epsilon") = kDefaultEpsilon);
  m.def(
      "cross_fold_rescale",
      [](const std::vector<double>& conf, const std::vector<bool>& correct, std::size_t k, std::uint64_t seed) {
        return cross_fold_rescale(zip_samples(conf, correct), k, seed);
      },
      py::arg("confidences"), py::arg("correct"), py::arg("k") = 5, py::arg("seed") = 0);
  m.def(
      "detect_collapse",
      [](const std::vector<double>& rescaled, double base_rate, double skill, double threshold) {
        const auto v = detect_collapse(rescaled, base_rate, skill, threshold);
        return py::make_tuple(v.collapsed, v.reason);
      },
      py::arg("rescaled"), py::arg("base_rate"), py::arg("skill"), py::arg("threshold") = 0.05);
  m.def("apply_bands", [](double confidence) { return DecisionBands::defaults().apply(confidence); });
}
