#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "codecal/error.hpp"
#include "codecal/metrics.hpp"

namespace codecal {

/// Input transform fed to the logistic regression.
enum class PlattFeature {
  ln_prob,  // ln(p)
  logit,    // ln(p / (1 - p))
};

std::string_view to_string(PlattFeature feature) noexcept;
std::optional<PlattFeature> parse_platt_feature(std::string_view text) noexcept;

inline constexpr double kDefaultEpsilon = 1e-9;

struct PlattModel {
  double slope = 0.0;
  double intercept = 0.0;
  PlattFeature feature = PlattFeature::ln_prob;
  double epsilon = kDefaultEpsilon;
};

/// Feature value of p after clamping to [epsilon, 1 - epsilon].
double platt_feature(double p, PlattFeature feature, double epsilon) noexcept;

/// sigmoid(slope * feature(p) + intercept), always in (0, 1).
double apply_platt(const PlattModel& model, double p) noexcept;

struct PlattFitOptions {
  double epsilon = kDefaultEpsilon;
  PlattFeature feature = PlattFeature::ln_prob;
  double l2 = 1e-6;
  double gradient_tolerance = 1e-8;
  int max_iterations = 100;
};

struct PlattFit {
  PlattModel model;
  int iterations = 0;
  double gradient_norm = 0.0;
  /// Penalized mean log-likelihood at the start and after every accepted step.
  std::vector<double> objective_trace;
};

/// Raised when Newton iterations stop short of the gradient tolerance.
class PlattFitError : public DataError {
 public:
  PlattFitError(const std::string& what, PlattFit last) : DataError(what), last_(std::move(last)) {}
  const PlattFit& last_iterate() const noexcept { return last_; }

 private:
  PlattFit last_;
};

/// Newton-Raphson maximization of the L2-penalized mean Bernoulli
/// log-likelihood, halving the step whenever the objective would decrease.
/// Throws DataError unless both classes are present.
PlattFit fit_platt_detailed(std::span<const ScoredSample> samples, const PlattFitOptions& options = {});
PlattModel fit_platt(std::span<const ScoredSample> samples, double epsilon = kDefaultEpsilon);

struct FoldPlan {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::vector<std::size_t> assignment;  // sample index -> fold id

  std::vector<std::size_t> fold_sizes() const;
};

/// Seeded shuffle of [0, n), then fold = position mod k. Throws ConfigError
/// if k < 2 or k > n.
FoldPlan make_fold_plan(std::size_t n, std::size_t k, std::uint64_t seed);

struct CrossFoldResult {
  std::vector<double> rescaled;  // aligned with the input samples
  FoldPlan plan;
  std::vector<PlattModel> models;  // one per fold
};

/// Fits on every fold but f and scores fold f, for each f. Throws DataError
/// naming the fold when a training split lacks a class.
CrossFoldResult cross_fold_rescale_detailed(std::span<const ScoredSample> samples, std::size_t k,
                                            std::uint64_t seed, const PlattFitOptions& options = {});
std::vector<double> cross_fold_rescale(std::span<const ScoredSample> samples, std::size_t k,
                                       std::uint64_t seed, const PlattFitOptions& options = {});

struct CollapseVerdict {
  bool collapsed = false;
  std::optional<std::string> reason;
};

/// Flags a rescaled measure whose skill score is below threshold (strictly).
/// Such scores crowd around the base rate and fill a single bin,
/// so their ECE carries no information.
CollapseVerdict detect_collapse(std::span<const double> rescaled, double base_rate, double skill,
                                double threshold = 0.05);

}  // namespace codecal
