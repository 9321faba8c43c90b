#include "codecal/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "codecal/error.hpp"

namespace codecal {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  // "-0.00" reads as a sign error in a table.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v) { return fixed(v, 2); }

std::string row_note(const CalibrationReport& r) {
  if (r.ece_omitted_reason) return *r.ece_omitted_reason;
  if (r.ece_note) return *r.ece_note;
  return {};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace

std::string format_2dp(double value) { return fixed(value, 2); }

std::string format_signed_2dp(double value) {
  std::string s = fixed(value, 2);
  if (s == "0.00") return s;
  return s.front() == '-' ? s : "+" + s;
}

std::optional<TableFormat> parse_table_format(std::string_view text) noexcept {
  if (text == "markdown" || text == "md") return TableFormat::markdown;
  if (text == "csv") return TableFormat::csv;
  return std::nullopt;
}

std::string render_report_table(std::span<const ReportRow> rows, const TableOptions& options) {
  const bool precise = options.format == TableFormat::csv && options.full_precision;
  auto num = [&](double v) { return precise ? full(v) : fixed(v, 2); };
  auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  auto skill = [&](const std::optional<double>& v) {
    if (!v) return std::string();
    return precise ? full(*v) : format_signed_2dp(*v);
  };

  const std::vector<std::string> header = {"Measure", "Notion", "Variant", "n",   "Base rate", "B",
                                           "B_ref",   "SS",     "ECE",     "AUC", "Note"};
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> footnotes;
  for (const auto& row : rows) {
    const auto& r = row.report;
    std::string note = row_note(r);
    std::string note_cell;
    if (!note.empty()) {
      if (options.format == TableFormat::markdown) {
        footnotes.push_back(std::move(note));
        note_cell = "[" + std::to_string(footnotes.size()) + "]";
      } else {
        note_cell = std::move(note);
      }
    }
    cells.push_back({row.measure, row.notion, row.variant, std::to_string(r.n), num(r.base_rate), num(r.brier),
                     num(r.brier_ref), skill(r.skill), opt(r.ece), opt(r.auc), std::move(note_cell)});
  }

  std::string out;
  if (options.format == TableFormat::csv) {
    auto line = [&](const std::vector<std::string>& fields) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_field(fields[i]);
      }
      out += "\r\n";
    };
    line({"measure", "notion", "variant", "n", "base_rate", "brier", "brier_ref", "skill", "ece", "auc", "note"});
    for (const auto& c : cells) line(c);
    return out;
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = std::max<std::size_t>(header[i].size(), 3);
  for (const auto& c : cells)
    for (std::size_t i = 0; i < c.size(); ++i) width[i] = std::max(width[i], c[i].size());

  // Text columns are left-aligned, numeric columns right-aligned.
  auto numeric = [](std::size_t col) { return col >= 3 && col <= 9; };
  auto line = [&](const std::vector<std::string>& fields) {
    out += '|';
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const std::string pad(width[i] - fields[i].size(), ' ');
      out += ' ';
      out += numeric(i) ? pad + fields[i] : fields[i] + pad;
      out += " |";
    }
    out += '\n';
  };
  line(header);
  out += '|';
  for (std::size_t i = 0; i < header.size(); ++i) {
    out += numeric(i) ? std::string(width[i] + 1, '-') + ":|" : ":" + std::string(width[i] + 1, '-') + '|';
  }
  out += '\n';
  for (const auto& c : cells) line(c);
  if (!footnotes.empty()) {
    out += '\n';
    for (std::size_t i = 0; i < footnotes.size(); ++i)
      out += "[" + std::to_string(i + 1) + "] " + footnotes[i] + "\n";
  }
  return out;
}

PlotAnnotations annotations_from(const CalibrationReport& report) {
  return {report.brier, report.brier_ref, report.ece, report.skill};
}

std::string render_reliability_svg(const PlotSpec& spec) {
  if (spec.bins.bins.empty()) throw DataError("reliability plot needs at least one bin");
  using L = PlotLayout;
  const double bottom = L::y(0.0);

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + px(L::width) + "\" height=\"" +
       px(L::height) + "\" viewBox=\"0 0 " + px(L::width) + " " + px(L::height) + "\">\n";
  s += "<title>" + xml_escape(spec.title) + "</title>\n";
  s += "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" + px(L::width) + "\" height=\"" + px(L::height) +
       "\" fill=\"white\"/>\n";
  s += "<text class=\"title\" x=\"" + px(L::width / 2) + "\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">" +
       xml_escape(spec.title) + "</text>\n";

  for (std::size_t i = 0; i < spec.bins.bins.size(); ++i) {
    const Bin& b = spec.bins.bins[i];
    const double x0 = L::x(b.lo);
    const double x1 = L::x(b.hi);
    const double top = L::y(b.count ? b.corr : 0.0);
    s += "<rect class=\"bar\" data-bin=\"" + std::to_string(i) + "\" data-count=\"" + std::to_string(b.count) +
         "\" x=\"" + px(x0) + "\" y=\"" + px(top) + "\" width=\"" + px(x1 - x0) + "\" height=\"" +
         px(bottom - top) + "\" fill=\"#4c72b0\" fill-opacity=\"0.75\" stroke=\"#2a3f63\" stroke-width=\"0.5\"/>\n";
  }
  for (std::size_t i = 0; i < spec.bins.bins.size(); ++i) {
    const Bin& b = spec.bins.bins[i];
    s += "<text class=\"count\" data-bin=\"" + std::to_string(i) + "\" x=\"" + px(L::x((b.lo + b.hi) / 2)) +
         "\" y=\"" + px(bottom - 4) + "\" text-anchor=\"middle\" font-size=\"9\">" + std::to_string(b.count) +
         "</text>\n";
  }

  s += "<rect class=\"frame\" x=\"" + px(L::left) + "\" y=\"" + px(L::top) + "\" width=\"" + px(L::size) +
       "\" height=\"" + px(L::size) + "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<line class=\"diagonal\" x1=\"" + px(L::x(0)) + "\" y1=\"" + px(L::y(0)) + "\" x2=\"" + px(L::x(1)) +
       "\" y2=\"" + px(L::y(1)) + "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";

  for (int t = 0; t <= 4; ++t) {
    const double v = t / 4.0;
    s += "<text class=\"tick\" x=\"" + px(L::x(v)) + "\" y=\"" + px(bottom + 16) +
         "\" text-anchor=\"middle\" font-size=\"10\">" + fixed(v, 2) + "</text>\n";
    s += "<text class=\"tick\" x=\"" + px(L::left - 6) + "\" y=\"" + px(L::y(v) + 3) +
         "\" text-anchor=\"end\" font-size=\"10\">" + fixed(v, 2) + "</text>\n";
  }
  s += "<text class=\"axis-label\" x=\"" + px(L::x(0.5)) + "\" y=\"" + px(bottom + 36) +
       "\" text-anchor=\"middle\" font-size=\"12\">Confidence</text>\n";
  s += "<text class=\"axis-label\" x=\"20\" y=\"" + px(L::y(0.5)) + "\" text-anchor=\"middle\" font-size=\"12\" "
       "transform=\"rotate(-90 20 " + px(L::y(0.5)) + ")\">Fraction correct</text>\n";

  if (spec.quantile_overlay) {
    std::string points;
    std::string markers;
    for (const auto& b : spec.quantile_overlay->bins) {
      if (b.count == 0) continue;
      if (!points.empty()) points += ' ';
      points += px(L::x(b.conf)) + "," + px(L::y(b.corr));
      markers += "<circle class=\"quantile-point\" cx=\"" + px(L::x(b.conf)) + "\" cy=\"" + px(L::y(b.corr)) +
                 "\" r=\"3\" fill=\"#c44e52\"/>\n";
    }
    s += "<polyline class=\"quantile\" points=\"" + points + "\" fill=\"none\" stroke=\"#c44e52\" stroke-width=\"2\"/>\n";
    s += markers;
  }

  const auto& a = spec.annotations;
  const std::vector<std::pair<std::string, std::string>> lines = {
      {"brier_ref", "B_ref = " + fixed(a.brier_ref, 2)},
      {"ece", "ECE = " + (a.ece ? fixed(*a.ece, 2) : std::string("omitted"))},
      {"brier", "B = " + fixed(a.brier, 2)},
      {"skill", "SS = " + (a.skill ? format_signed_2dp(*a.skill) : std::string("undefined"))},
  };
  s += "<g class=\"annotations\">\n";
  s += "<rect x=\"" + px(L::left + 8) + "\" y=\"" + px(L::top + 8) + "\" width=\"110\" height=\"" +
       px(16.0 * static_cast<double>(lines.size()) + 8) +
       "\" fill=\"white\" fill-opacity=\"0.85\" stroke=\"#888\"/>\n";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    s += "<text class=\"annotation\" data-key=\"" + lines[i].first + "\" x=\"" + px(L::left + 14) + "\" y=\"" +
         px(L::top + 24 + 16.0 * static_cast<double>(i)) + "\" font-size=\"11\">" + xml_escape(lines[i].second) +
         "</text>\n";
  }
  s += "</g>\n</svg>\n";
  return s;
}

void emit_reliability_plot(const PlotSpec& spec, const std::filesystem::path& path) {
  write_file(path, render_reliability_svg(spec));
}

std::string render_roc_svg(std::span<const ScoredSample> samples, std::string_view title) {
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return samples[a].confidence > samples[b].confidence; });
  double positives = 0, negatives = 0;
  for (const auto& s : samples) (s.correct ? positives : negatives) += 1;
  if (positives == 0 || negatives == 0) throw DataError("ROC curve undefined: sample contains a single class");

  using L = PlotLayout;
  std::string points = px(L::x(0)) + "," + px(L::y(0));
  double tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && samples[order[j]].confidence == samples[order[i]].confidence) {
      (samples[order[j]].correct ? tp : fp) += 1;
      ++j;
    }
    points += " " + px(L::x(fp / negatives)) + "," + px(L::y(tp / positives));
    i = j;
  }

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + px(L::width) + "\" height=\"" +
       px(L::height) + "\" viewBox=\"0 0 " + px(L::width) + " " + px(L::height) + "\">\n";
  s += "<title>" + xml_escape(title) + "</title>\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + px(L::width) + "\" height=\"" + px(L::height) + "\" fill=\"white\"/>\n";
  s += "<text class=\"title\" x=\"" + px(L::width / 2) + "\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">" +
       xml_escape(title) + "</text>\n";
  s += "<rect class=\"frame\" x=\"" + px(L::left) + "\" y=\"" + px(L::top) + "\" width=\"" + px(L::size) +
       "\" height=\"" + px(L::size) + "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<line class=\"diagonal\" x1=\"" + px(L::x(0)) + "\" y1=\"" + px(L::y(0)) + "\" x2=\"" + px(L::x(1)) +
       "\" y2=\"" + px(L::y(1)) + "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  s += "<polyline class=\"roc\" points=\"" + points + "\" fill=\"none\" stroke=\"#8172b2\" stroke-width=\"2\"/>\n";
  s += "<text class=\"axis-label\" x=\"" + px(L::x(0.5)) + "\" y=\"" + px(L::y(0) + 36) +
       "\" text-anchor=\"middle\" font-size=\"12\">False positive rate</text>\n";
  s += "<text class=\"axis-label\" x=\"20\" y=\"" + px(L::y(0.5)) + "\" text-anchor=\"middle\" font-size=\"12\" "
       "transform=\"rotate(-90 20 " + px(L::y(0.5)) + ")\">True positive rate</text>\n";
  s += "</svg>\n";
  return s;
}

DecisionBands::DecisionBands(std::vector<DecisionBand> bands) : bands_(std::move(bands)) {
  if (bands_.empty()) throw ConfigError("decision bands must not be empty");
  if (bands_.front().lower != 0.0) throw ConfigError("the first decision band must start at 0");
  for (std::size_t i = 0; i < bands_.size(); ++i) {
    const double lo = bands_[i].lower;
    if (!(lo >= 0.0 && lo <= 1.0)) throw ConfigError("decision band lower bounds must lie in [0, 1]");
    if (i > 0 && !(lo > bands_[i - 1].lower))
      throw ConfigError("decision band lower bounds must be strictly increasing");
  }
}

DecisionBands DecisionBands::defaults() {
  return DecisionBands({{0.0, "reject"}, {0.10, "careful review"}, {0.70, "self review"}, {0.90, "accept"}});
}

const std::string& DecisionBands::apply(double confidence) const noexcept {
  if (!(confidence >= 0.0)) return bands_.front().action;
  auto it = std::upper_bound(bands_.begin(), bands_.end(), confidence,
                             [](double c, const DecisionBand& b) { return c < b.lower; });
  if (it == bands_.begin()) return bands_.front().action;
  return std::prev(it)->action;
}

}  // namespace codecal
