#include "codecal/rescale.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "codecal/rng.hpp"

namespace codecal {

namespace {

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(sigmoid(z)) without overflow.
double log_sigmoid(double z) noexcept {
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

struct Design {
  std::vector<double> x;
  std::vector<double> y;
};

double objective(const Design& d, double slope, double intercept, double l2) {
  // Extended accumulator: naive double sums are noisier than the last Newton steps.
  long double ll = 0.0L;
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    const double z = slope * d.x[i] + intercept;
    ll += d.y[i] > 0.5 ? log_sigmoid(z) : log_sigmoid(-z);
  }
  return static_cast<double>(ll / static_cast<long double>(d.x.size())) -
         0.5 * l2 * (slope * slope + intercept * intercept);
}

}  // namespace

std::string_view to_string(PlattFeature feature) noexcept {
  return feature == PlattFeature::ln_prob ? "ln_prob" : "logit";
}

std::optional<PlattFeature> parse_platt_feature(std::string_view text) noexcept {
  if (text == "ln_prob" || text == "ln-prob") return PlattFeature::ln_prob;
  if (text == "logit") return PlattFeature::logit;
  return std::nullopt;
}

double platt_feature(double p, PlattFeature feature, double epsilon) noexcept {
  const double q = std::clamp(p, epsilon, 1.0 - epsilon);
  return feature == PlattFeature::ln_prob ? std::log(q) : std::log(q) - std::log1p(-q);
}

double apply_platt(const PlattModel& model, double p) noexcept {
  const double v = sigmoid(model.slope * platt_feature(p, model.feature, model.epsilon) + model.intercept);
  // Keep the open interval even where sigmoid saturates in double precision.
  return std::clamp(v, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

PlattFit fit_platt_detailed(std::span<const ScoredSample> samples, const PlattFitOptions& options) {
  const std::size_t n = samples.size();
  std::size_t positives = 0;
  for (const auto& s : samples) positives += s.correct ? 1 : 0;
  if (positives == 0 || positives == n)
    throw DataError("Platt fit needs both correct and incorrect samples (got " + std::to_string(positives) +
                    " correct of " + std::to_string(n) + ")");

  Design d;
  d.x.reserve(n);
  d.y.reserve(n);
  for (const auto& s : samples) {
    d.x.push_back(platt_feature(s.confidence, options.feature, options.epsilon));
    d.y.push_back(s.correct ? 1.0 : 0.0);
  }

  const double rate = static_cast<double>(positives) / static_cast<double>(n);
  PlattFit fit;
  fit.model.feature = options.feature;
  fit.model.epsilon = options.epsilon;
  fit.model.slope = 0.0;
  fit.model.intercept = std::log(rate / (1.0 - rate));

  const double inv_n = 1.0 / static_cast<double>(n);
  double a = fit.model.slope;
  double b = fit.model.intercept;
  double current = objective(d, a, b, options.l2);
  fit.objective_trace.push_back(current);

  for (int iter = 0;; ++iter) {
    long double sa = 0, sb = 0, saa = 0, sab = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = a * d.x[i] + b;
      const double p = sigmoid(z);
      // 1 - p computed directly to keep precision when p is close to 1.
      const double r = d.y[i] > 0.5 ? sigmoid(-z) : -p;
      const double w = p * sigmoid(-z);
      sa += r * d.x[i];
      sb += r;
      saa += w * d.x[i] * d.x[i];
      sab += w * d.x[i];
      sbb += w;
    }
    const double ga = static_cast<double>(sa) * inv_n - options.l2 * a;
    const double gb = static_cast<double>(sb) * inv_n - options.l2 * b;
    const double haa = static_cast<double>(saa) * inv_n + options.l2;
    const double hab = static_cast<double>(sab) * inv_n;
    const double hbb = static_cast<double>(sbb) * inv_n + options.l2;

    fit.iterations = iter;
    fit.gradient_norm = std::hypot(ga, gb);
    fit.model.slope = a;
    fit.model.intercept = b;
    if (fit.gradient_norm < options.gradient_tolerance) return fit;
    if (iter >= options.max_iterations) break;

    // Newton direction: solve (-H) delta = g for the 2x2 system.
    const double det = haa * hbb - hab * hab;
    const double da = (hbb * ga - hab * gb) / det;
    const double db = (haa * gb - hab * ga) / det;
    const double decrement = ga * da + gb * db;
    if (!std::isfinite(decrement)) break;
    // Below this the objective cannot move in double precision.
    if (decrement < 1e-24) return fit;

    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double candidate = objective(d, na, nb, options.l2);
      if (candidate >= current) {
        a = na;
        b = nb;
        current = candidate;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    fit.objective_trace.push_back(current);
  }

  char buf[160];
  std::snprintf(buf, sizeof buf,
                "Platt fit did not converge after %d iterations (slope %.6g, intercept %.6g, |grad| %.3g)",
                fit.iterations, fit.model.slope, fit.model.intercept, fit.gradient_norm);
  throw PlattFitError(buf, fit);
}

PlattModel fit_platt(std::span<const ScoredSample> samples, double epsilon) {
  PlattFitOptions options;
  options.epsilon = epsilon;
  return fit_platt_detailed(samples, options).model;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (auto f : assignment) ++sizes[f];
  return sizes;
}

FoldPlan make_fold_plan(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("fold count must be at least 2");
  if (k > n)
    throw ConfigError("fold count " + std::to_string(k) + " exceeds sample size " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span(order));

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) plan.assignment[order[i]] = i % k;
  return plan;
}

CrossFoldResult cross_fold_rescale_detailed(std::span<const ScoredSample> samples, std::size_t k,
                                            std::uint64_t seed, const PlattFitOptions& options) {
  CrossFoldResult result;
  result.plan = make_fold_plan(samples.size(), k, seed);
  result.rescaled.assign(samples.size(), 0.0);
  result.models.reserve(k);

  std::vector<ScoredSample> train;
  for (std::size_t fold = 0; fold < k; ++fold) {
    train.clear();
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (result.plan.assignment[i] != fold) train.push_back(samples[i]);
    const auto positives = std::count_if(train.begin(), train.end(), [](const auto& s) { return s.correct; });
    if (positives == 0 || static_cast<std::size_t>(positives) == train.size())
      throw DataError("fold " + std::to_string(fold) + ": training split contains only " +
                      (positives == 0 ? "incorrect" : "correct") + " samples");
    const PlattModel model = fit_platt_detailed(train, options).model;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (result.plan.assignment[i] == fold) result.rescaled[i] = apply_platt(model, samples[i].confidence);
    result.models.push_back(model);
  }
  return result;
}

std::vector<double> cross_fold_rescale(std::span<const ScoredSample> samples, std::size_t k,
                                       std::uint64_t seed, const PlattFitOptions& options) {
  return cross_fold_rescale_detailed(samples, k, seed, options).rescaled;
}

CollapseVerdict detect_collapse(std::span<const double> rescaled, double base_rate, double skill,
                                double threshold) {
  if (!(skill < threshold)) return {false, std::nullopt};
  double lo = base_rate, hi = base_rate;
  if (!rescaled.empty()) {
    const auto [mn, mx] = std::minmax_element(rescaled.begin(), rescaled.end());
    lo = *mn;
    hi = *mx;
  }
  char buf[400];
  std::snprintf(buf, sizeof buf,
                "ECE omitted: skill score %.3f < %.2f. The rescaled scores hug the base rate %.3f "
                "(range [%.3f, %.3f]), so nearly all samples share a bin and ECE is close to zero "
                "whether or not the measure ranks anything.",
                skill, threshold, base_rate, lo, hi);
  return {true, std::string(buf)};
}

}  // namespace codecal
