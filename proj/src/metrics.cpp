#include "codecal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "codecal/error.hpp"
#include "codecal/rescale.hpp"

namespace codecal {

std::string_view to_string(BinScheme scheme) noexcept {
  return scheme == BinScheme::equal_width ? "equal_width" : "quantile";
}

std::optional<BinScheme> parse_bin_scheme(std::string_view text) noexcept {
  if (text == "equal" || text == "equal_width" || text == "equal-width") return BinScheme::equal_width;
  if (text == "quantile") return BinScheme::quantile;
  return std::nullopt;
}

std::size_t ReliabilityBins::total() const noexcept {
  std::size_t n = 0;
  for (const auto& b : bins) n += b.count;
  return n;
}

double equal_width_edge(std::size_t i, std::size_t m) noexcept {
  return static_cast<double>(i) / static_cast<double>(m);
}

std::size_t equal_width_index(double confidence, std::size_t m) noexcept {
  if (!(confidence > 0.0)) return 0;
  if (confidence >= 1.0) return m - 1;
  auto idx = static_cast<std::size_t>(std::floor(confidence * static_cast<double>(m)));
  idx = std::min(idx, m - 1);
  // confidence * m can round across an edge; settle against the edges themselves.
  while (idx > 0 && confidence < equal_width_edge(idx, m)) --idx;
  while (idx + 1 < m && confidence >= equal_width_edge(idx + 1, m)) ++idx;
  return idx;
}

namespace {

void summarize(Bin& bin, std::span<const ScoredSample> members) {
  bin.count = members.size();
  if (members.empty()) return;
  double conf = 0.0;
  std::size_t correct = 0;
  for (const auto& s : members) {
    conf += s.confidence;
    correct += s.correct ? 1 : 0;
  }
  bin.conf = conf / static_cast<double>(members.size());
  bin.corr = static_cast<double>(correct) / static_cast<double>(members.size());
}

}  // namespace

ReliabilityBins bin_samples(std::span<const ScoredSample> samples, BinScheme scheme, std::size_t m) {
  if (samples.empty()) throw DataError("cannot bin an empty sample");
  if (m == 0) throw ConfigError("bin count must be at least 1");

  ReliabilityBins out;
  out.scheme = scheme;
  out.m = m;
  out.bins.resize(m);

  if (scheme == BinScheme::equal_width) {
    std::vector<std::vector<ScoredSample>> members(m);
    for (const auto& s : samples) members[equal_width_index(s.confidence, m)].push_back(s);
    for (std::size_t i = 0; i < m; ++i) {
      out.bins[i].lo = equal_width_edge(i, m);
      out.bins[i].hi = equal_width_edge(i + 1, m);
      summarize(out.bins[i], members[i]);
    }
    return out;
  }

  std::vector<ScoredSample> sorted(samples.begin(), samples.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredSample& a, const ScoredSample& b) { return a.confidence < b.confidence; });
  const std::size_t n = sorted.size();
  std::size_t begin = 0;
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t end = j + 1 == m ? n : (j + 1) * n / m;
    end = std::max(end, begin);
    while (end > 0 && end < n && sorted[end].confidence == sorted[end - 1].confidence) ++end;
    Bin& bin = out.bins[j];
    summarize(bin, std::span(sorted).subspan(begin, end - begin));
    if (end > begin) {
      bin.lo = sorted[begin].confidence;
      bin.hi = sorted[end - 1].confidence;
    } else {
      const double edge = begin < n ? sorted[begin].confidence : sorted[n - 1].confidence;
      bin.lo = bin.hi = edge;
    }
    begin = end;
  }
  return out;
}

double ece(const ReliabilityBins& bins, std::size_t n) {
  if (n == 0 || bins.total() != n)
    throw DataError("bin counts sum to " + std::to_string(bins.total()) + ", expected " + std::to_string(n));
  double sum = 0.0;
  for (const auto& b : bins.bins) {
    if (b.count == 0) continue;
    sum += static_cast<double>(b.count) / static_cast<double>(n) * std::abs(b.corr - b.conf);
  }
  return std::clamp(sum, 0.0, 1.0);
}

double brier(std::span<const ScoredSample> samples) {
  if (samples.empty()) throw DataError("Brier score of an empty sample is undefined");
  double sum = 0.0;
  for (const auto& s : samples) {
    const double d = s.confidence - (s.correct ? 1.0 : 0.0);
    sum += d * d;
  }
  return sum / static_cast<double>(samples.size());
}

double brier_ref(double rate) noexcept { return rate * (1.0 - rate); }

double skill_score(double brier_actual, double brier_ref_value) {
  if (!(brier_ref_value > 0.0)) throw DataError("skill score undefined: reference Brier score is 0");
  return (brier_ref_value - brier_actual) / brier_ref_value;
}

double base_rate(std::span<const ScoredSample> samples) {
  if (samples.empty()) throw DataError("base rate of an empty sample is undefined");
  const auto correct = std::count_if(samples.begin(), samples.end(), [](const auto& s) { return s.correct; });
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

double auc_roc(std::span<const ScoredSample> samples) {
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return samples[a].confidence < samples[b].confidence; });

  // Sum of (doubled) midranks of the positives; doubling keeps it integral.
  std::uint64_t rank_sum_x2 = 0;
  std::uint64_t positives = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && samples[order[j]].confidence == samples[order[i]].confidence) ++j;
    const std::uint64_t midrank_x2 = (i + 1) + j;  // ranks i+1 .. j
    for (std::size_t t = i; t < j; ++t) {
      if (samples[order[t]].correct) {
        rank_sum_x2 += midrank_x2;
        ++positives;
      }
    }
    i = j;
  }
  const std::uint64_t negatives = samples.size() - positives;
  if (positives == 0 || negatives == 0) throw DataError("AUC undefined: sample contains a single class");
  const double u = static_cast<double>(rank_sum_x2 - positives * (positives + 1)) / 2.0;
  return u / (static_cast<double>(positives) * static_cast<double>(negatives));
}

CalibrationReport report(std::span<const ScoredSample> samples, const ReportOptions& options) {
  if (samples.empty()) throw DataError("cannot report on an empty sample");
  CalibrationReport r;
  r.n = samples.size();
  r.base_rate = base_rate(samples);
  r.brier = brier(samples);
  r.brier_ref = brier_ref(r.base_rate);
  if (r.brier_ref > 0.0) {
    r.skill = skill_score(r.brier, r.brier_ref);
    r.auc = auc_roc(samples);
  }
  r.ece = ece(bin_samples(samples, options.scheme, options.m), r.n);

  if (options.rescaled) {
    if (!r.skill) {
      r.ece.reset();
      r.ece_omitted_reason = "skill score undefined for a single-class sample; ECE carries no information";
    } else {
      std::vector<double> confidences;
      confidences.reserve(samples.size());
      for (const auto& s : samples) confidences.push_back(s.confidence);
      auto verdict = detect_collapse(confidences, r.base_rate, *r.skill, options.collapse_threshold);
      if (verdict.collapsed) {
        r.ece.reset();
        r.ece_omitted_reason = std::move(verdict.reason);
      }
    }
  }
  return r;
}

CalibrationReport unskilled_report(std::span<const ScoredSample> samples, const ReportOptions& options) {
  const double rate = base_rate(samples);
  std::vector<ScoredSample> constant(samples.begin(), samples.end());
  for (auto& s : constant) s.confidence = rate;
  ReportOptions plain = options;
  plain.rescaled = false;
  CalibrationReport r = report(constant, plain);
  r.ece_note =
      "constant predictor at the base rate: ECE is zero by construction here, while the skill score "
      "is 0; read ECE together with skill";
  return r;
}

}  // namespace codecal
